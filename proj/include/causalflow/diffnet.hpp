#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "causalflow/rng.hpp"

namespace causalflow {

enum class Activation { tanh, leaky_relu, identity };

constexpr double kLeakyReluSlope = 0.01;

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& name);

struct MlpConfig {
    // input dim, hidden dims..., output dim
    std::vector<int> layer_sizes;
    // applied to hidden layers only; the output layer is always identity
    Activation activation = Activation::leaky_relu;

    int input_dim() const { return layer_sizes.front(); }
    int output_dim() const { return layer_sizes.back(); }
    std::size_t num_layers() const { return layer_sizes.size() - 1; }
    void validate() const;  // >= 2 entries, all >= 1
};

// Weight matrices are row-major (out x in); one flat array per layer.
struct MlpParams {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;

    static MlpParams zeros(const MlpConfig& cfg);
    // Uniform weights in [-a, a], a = sqrt(6 / (fan_in + fan_out)); zero biases.
    static MlpParams glorot(const MlpConfig& cfg, Rng& rng);

    std::size_t count() const;
    void fill(double value);
    bool all_finite() const;
    void check_shapes(const MlpConfig& cfg) const;
};

struct AdamState {
    std::vector<std::vector<double>> m_w, v_w;  // first/second moments, weights
    std::vector<std::vector<double>> m_b, v_b;  // first/second moments, biases
    long step = 0;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    static AdamState zeros(const MlpConfig& cfg, double lr);
};

// ---- batched evaluation -------------------------------------------------
//
// Batches are stored unit-major: row u is the contiguous batch vector of
// unit u. This keeps all hot loops (axpy / dot / reductions over the batch)
// on contiguous memory.

struct BatchMatrix {
    std::size_t units = 0;
    std::size_t batch = 0;
    std::vector<double> data;

    BatchMatrix() = default;
    BatchMatrix(std::size_t units_, std::size_t batch_)
        : units(units_), batch(batch_), data(units_ * batch_, 0.0) {}

    void resize(std::size_t units_, std::size_t batch_) {
        units = units_;
        batch = batch_;
        data.assign(units_ * batch_, 0.0);
    }

    double* row(std::size_t u) { return data.data() + u * batch; }
    const double* row(std::size_t u) const { return data.data() + u * batch; }
    double& at(std::size_t u, std::size_t b) { return data[u * batch + b]; }
    double at(std::size_t u, std::size_t b) const { return data[u * batch + b]; }
};

// Per-batch scratch: pre-activations and activations for every layer, plus
// backward delta buffers. Reused across minibatches to avoid reallocation.
struct MlpWorkspace {
    std::vector<BatchMatrix> pre;    // one per layer, out_units x batch
    std::vector<BatchMatrix> act;    // post-activation, same shapes
    std::vector<BatchMatrix> delta;  // backward scratch

    void prepare(const MlpConfig& cfg, std::size_t batch);
    const BatchMatrix& output() const { return act.back(); }
};

// Forward pass over a batch. in_rows holds input_dim pointers, each to a
// contiguous batch vector; results land in ws.output().
void mlp_forward_batch(const MlpParams& params, const MlpConfig& cfg,
                       std::span<const double* const> in_rows, std::size_t batch,
                       MlpWorkspace& ws);

// Reverse pass for <upstream, output> summed over the batch. Parameter
// gradients accumulate into grad_acc (+=); input gradients accumulate into
// in_grad_rows when non-empty. Requires the workspace of the matching
// forward call.
void mlp_backward_batch(const MlpParams& params, const MlpConfig& cfg,
                        std::span<const double* const> in_rows, std::size_t batch,
                        MlpWorkspace& ws,
                        std::span<const double* const> upstream_rows,
                        MlpParams& grad_acc,
                        std::span<double* const> in_grad_rows);

// ---- single-sample API ----------------------------------------------------

std::vector<double> mlp_forward(const MlpParams& params, const MlpConfig& cfg,
                                std::span<const double> input);

struct MlpGradients {
    MlpParams param_grads;
    std::vector<double> input_grad;
};

// Exact reverse-mode gradients of <upstream_grad, mlp(input)> with respect
// to every parameter and the input.
MlpGradients mlp_backward(const MlpParams& params, const MlpConfig& cfg,
                          std::span<const double> input,
                          std::span<const double> upstream_grad);

// Standard bias-corrected Adam step, in place; state.step advances by one.
// Throws NumericError naming the layer if any gradient entry is non-finite.
void adam_step(MlpParams& params, const MlpParams& grads, AdamState& state);

}  // namespace causalflow
