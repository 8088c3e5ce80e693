#include "causalflow/diffnet.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>

#include "causalflow/errors.hpp"
#include "causalflow/kernels.hpp"

namespace causalflow {

const char* activation_name(Activation a) {
    switch (a) {
        case Activation::tanh: return "tanh";
        case Activation::leaky_relu: return "leaky_relu";
        case Activation::identity: return "identity";
    }
    return "?";
}

Activation activation_from_name(const std::string& name) {
    if (name == "tanh") return Activation::tanh;
    if (name == "leaky_relu") return Activation::leaky_relu;
    if (name == "identity") return Activation::identity;
    throw std::invalid_argument("unknown activation: " + name);
}

void MlpConfig::validate() const {
    if (layer_sizes.size() < 2) {
        throw std::invalid_argument("MlpConfig: need at least input and output sizes");
    }
    for (int s : layer_sizes) {
        if (s < 1) throw std::invalid_argument("MlpConfig: layer sizes must be >= 1");
    }
}

MlpParams MlpParams::zeros(const MlpConfig& cfg) {
    cfg.validate();
    MlpParams p;
    for (std::size_t l = 0; l + 1 < cfg.layer_sizes.size(); ++l) {
        const std::size_t in = cfg.layer_sizes[l];
        const std::size_t out = cfg.layer_sizes[l + 1];
        p.weights.emplace_back(in * out, 0.0);
        p.biases.emplace_back(out, 0.0);
    }
    return p;
}

MlpParams MlpParams::glorot(const MlpConfig& cfg, Rng& rng) {
    MlpParams p = zeros(cfg);
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
        const double fan_in = cfg.layer_sizes[l];
        const double fan_out = cfg.layer_sizes[l + 1];
        const double a = std::sqrt(6.0 / (fan_in + fan_out));
        for (double& w : p.weights[l]) w = rng.uniform(-a, a);
    }
    return p;
}

std::size_t MlpParams::count() const {
    std::size_t n = 0;
    for (const auto& w : weights) n += w.size();
    for (const auto& b : biases) n += b.size();
    return n;
}

void MlpParams::fill(double value) {
    for (auto& w : weights) std::fill(w.begin(), w.end(), value);
    for (auto& b : biases) std::fill(b.begin(), b.end(), value);
}

bool MlpParams::all_finite() const {
    for (const auto& w : weights) {
        for (double v : w) {
            if (!std::isfinite(v)) return false;
        }
    }
    for (const auto& b : biases) {
        for (double v : b) {
            if (!std::isfinite(v)) return false;
        }
    }
    return true;
}

void MlpParams::check_shapes(const MlpConfig& cfg) const {
    cfg.validate();
    if (weights.size() != cfg.num_layers() || biases.size() != cfg.num_layers()) {
        throw std::invalid_argument("MlpParams: layer count mismatch");
    }
    for (std::size_t l = 0; l < weights.size(); ++l) {
        const std::size_t in = cfg.layer_sizes[l];
        const std::size_t out = cfg.layer_sizes[l + 1];
        if (weights[l].size() != in * out || biases[l].size() != out) {
            throw std::invalid_argument("MlpParams: shape mismatch at layer " +
                                        std::to_string(l));
        }
    }
}

AdamState AdamState::zeros(const MlpConfig& cfg, double lr) {
    AdamState s;
    MlpParams z = MlpParams::zeros(cfg);
    s.m_w = z.weights;
    s.v_w = z.weights;
    s.m_b = z.biases;
    s.v_b = z.biases;
    s.lr = lr;
    return s;
}

void MlpWorkspace::prepare(const MlpConfig& cfg, std::size_t batch) {
    const std::size_t layers = cfg.num_layers();
    pre.resize(layers);
    act.resize(layers);
    delta.resize(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t out = cfg.layer_sizes[l + 1];
        if (pre[l].units != out || pre[l].batch != batch) {
            pre[l].resize(out, batch);
            act[l].resize(out, batch);
            delta[l].resize(out, batch);
        }
    }
}

namespace {

void apply_activation(Activation act, std::size_t n, const double* pre, double* out) {
    switch (act) {
        case Activation::leaky_relu:
            kernels::leaky_relu(n, pre, out, kLeakyReluSlope);
            break;
        case Activation::tanh:
            kernels::tanh_eval(n, pre, out);
            break;
        case Activation::identity:
            std::memcpy(out, pre, n * sizeof(double));
            break;
    }
}

void activation_grad(Activation act, std::size_t n, const double* pre,
                     const double* post, const double* g_out, double* g_in) {
    switch (act) {
        case Activation::leaky_relu:
            kernels::leaky_relu_grad(n, pre, g_out, g_in, kLeakyReluSlope);
            break;
        case Activation::tanh:
            kernels::tanh_grad(n, post, g_out, g_in);
            break;
        case Activation::identity:
            if (g_in != g_out) std::memcpy(g_in, g_out, n * sizeof(double));
            break;
    }
}

}  // namespace

void mlp_forward_batch(const MlpParams& params, const MlpConfig& cfg,
                       std::span<const double* const> in_rows, std::size_t batch,
                       MlpWorkspace& ws) {
    if (in_rows.size() != static_cast<std::size_t>(cfg.input_dim())) {
        throw std::invalid_argument("mlp_forward_batch: input dim mismatch");
    }
    ws.prepare(cfg, batch);
    const std::size_t layers = cfg.num_layers();
    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t in = cfg.layer_sizes[l];
        const std::size_t out = cfg.layer_sizes[l + 1];
        const std::vector<double>& w = params.weights[l];
        const std::vector<double>& b = params.biases[l];
        BatchMatrix& pre = ws.pre[l];
        for (std::size_t o = 0; o < out; ++o) {
            double* dst = pre.row(o);
            std::fill(dst, dst + batch, b[o]);
            for (std::size_t k = 0; k < in; ++k) {
                const double* src = (l == 0) ? in_rows[k] : ws.act[l - 1].row(k);
                kernels::axpy(batch, w[o * in + k], src, dst);
            }
        }
        const bool hidden = l + 1 < layers;
        const Activation a = hidden ? cfg.activation : Activation::identity;
        for (std::size_t o = 0; o < out; ++o) {
            apply_activation(a, batch, pre.row(o), ws.act[l].row(o));
        }
    }
}

void mlp_backward_batch(const MlpParams& params, const MlpConfig& cfg,
                        std::span<const double* const> in_rows, std::size_t batch,
                        MlpWorkspace& ws,
                        std::span<const double* const> upstream_rows,
                        MlpParams& grad_acc,
                        std::span<double* const> in_grad_rows) {
    const std::size_t layers = cfg.num_layers();
    if (upstream_rows.size() != static_cast<std::size_t>(cfg.output_dim())) {
        throw std::invalid_argument("mlp_backward_batch: upstream dim mismatch");
    }

    // delta[l] = dLoss/d pre[l]
    for (std::size_t li = layers; li-- > 0;) {
        const std::size_t in = cfg.layer_sizes[li];
        const std::size_t out = cfg.layer_sizes[li + 1];
        BatchMatrix& d = ws.delta[li];
        const bool hidden = li + 1 < layers;
        const Activation a = hidden ? cfg.activation : Activation::identity;
        if (li + 1 == layers) {
            for (std::size_t o = 0; o < out; ++o) {
                activation_grad(a, batch, ws.pre[li].row(o), ws.act[li].row(o),
                                upstream_rows[o], d.row(o));
            }
        } else {
            // dLoss/d act[li] = W[li+1]^T * delta[li+1]
            const std::size_t out_next = cfg.layer_sizes[li + 2];
            const std::vector<double>& w_next = params.weights[li + 1];
            BatchMatrix& g_act = ws.delta[li];  // reuse as scratch, then in place
            for (std::size_t k = 0; k < out; ++k) {
                double* dst = g_act.row(k);
                std::fill(dst, dst + batch, 0.0);
                for (std::size_t o = 0; o < out_next; ++o) {
                    kernels::axpy(batch, w_next[o * out + k], ws.delta[li + 1].row(o), dst);
                }
            }
            for (std::size_t o = 0; o < out; ++o) {
                activation_grad(a, batch, ws.pre[li].row(o), ws.act[li].row(o),
                                d.row(o), d.row(o));
            }
        }
        // Parameter gradients for this layer.
        std::vector<double>& gw = grad_acc.weights[li];
        std::vector<double>& gb = grad_acc.biases[li];
        for (std::size_t o = 0; o < out; ++o) {
            const double* del = d.row(o);
            gb[o] += kernels::sum(batch, del);
            for (std::size_t k = 0; k < in; ++k) {
                const double* src = (li == 0) ? in_rows[k] : ws.act[li - 1].row(k);
                gw[o * in + k] += kernels::dot(batch, del, src);
            }
        }
    }

    if (!in_grad_rows.empty()) {
        const std::size_t in = cfg.layer_sizes[0];
        const std::size_t out0 = cfg.layer_sizes[1];
        const std::vector<double>& w0 = params.weights[0];
        for (std::size_t k = 0; k < in; ++k) {
            for (std::size_t o = 0; o < out0; ++o) {
                kernels::axpy(batch, w0[o * in + k], ws.delta[0].row(o), in_grad_rows[k]);
            }
        }
    }
}

std::vector<double> mlp_forward(const MlpParams& params, const MlpConfig& cfg,
                                std::span<const double> input) {
    params.check_shapes(cfg);
    if (input.size() != static_cast<std::size_t>(cfg.input_dim())) {
        throw std::invalid_argument("mlp_forward: input length mismatch");
    }
    std::vector<const double*> rows(input.size());
    for (std::size_t i = 0; i < input.size(); ++i) rows[i] = &input[i];
    MlpWorkspace ws;
    mlp_forward_batch(params, cfg, rows, 1, ws);
    const BatchMatrix& out = ws.output();
    std::vector<double> result(out.units);
    for (std::size_t o = 0; o < out.units; ++o) result[o] = out.at(o, 0);
    return result;
}

MlpGradients mlp_backward(const MlpParams& params, const MlpConfig& cfg,
                          std::span<const double> input,
                          std::span<const double> upstream_grad) {
    params.check_shapes(cfg);
    if (input.size() != static_cast<std::size_t>(cfg.input_dim())) {
        throw std::invalid_argument("mlp_backward: input length mismatch");
    }
    if (upstream_grad.size() != static_cast<std::size_t>(cfg.output_dim())) {
        throw std::invalid_argument("mlp_backward: upstream length mismatch");
    }
    std::vector<const double*> in_rows(input.size());
    for (std::size_t i = 0; i < input.size(); ++i) in_rows[i] = &input[i];
    std::vector<const double*> up_rows(upstream_grad.size());
    for (std::size_t i = 0; i < upstream_grad.size(); ++i) up_rows[i] = &upstream_grad[i];

    MlpWorkspace ws;
    mlp_forward_batch(params, cfg, in_rows, 1, ws);

    MlpGradients g;
    g.param_grads = MlpParams::zeros(cfg);
    g.input_grad.assign(input.size(), 0.0);
    std::vector<double*> gin_rows(input.size());
    for (std::size_t i = 0; i < input.size(); ++i) gin_rows[i] = &g.input_grad[i];
    mlp_backward_batch(params, cfg, in_rows, 1, ws, up_rows, g.param_grads, gin_rows);
    return g;
}

void adam_step(MlpParams& params, const MlpParams& grads, AdamState& state) {
    if (grads.weights.size() != params.weights.size()) {
        throw std::invalid_argument("adam_step: gradient layer count mismatch");
    }
    for (std::size_t l = 0; l < grads.weights.size(); ++l) {
        for (double v : grads.weights[l]) {
            if (!std::isfinite(v)) {
                throw NumericError("adam_step: non-finite weight gradient at layer " +
                                   std::to_string(l));
            }
        }
        for (double v : grads.biases[l]) {
            if (!std::isfinite(v)) {
                throw NumericError("adam_step: non-finite bias gradient at layer " +
                                   std::to_string(l));
            }
        }
    }
    state.step += 1;
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        kernels::adam_update(params.weights[l].size(), params.weights[l].data(),
                             state.m_w[l].data(), state.v_w[l].data(),
                             grads.weights[l].data(), state.lr, state.beta1,
                             state.beta2, state.eps, state.step);
        kernels::adam_update(params.biases[l].size(), params.biases[l].data(),
                             state.m_b[l].data(), state.v_b[l].data(),
                             grads.biases[l].data(), state.lr, state.beta1,
                             state.beta2, state.eps, state.step);
    }
}

}  // namespace causalflow
