#include "causalflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "causalflow/errors.hpp"
#include "causalflow/kernels.hpp"

namespace causalflow {

void Ordering::validate() const {
    const int d = dim();
    if (d < 1) throw std::invalid_argument("Ordering: empty permutation");
    std::vector<bool> seen(d, false);
    for (int v : perm) {
        if (v < 0 || v >= d || seen[v]) {
            throw std::invalid_argument("Ordering: not a permutation of {0.." +
                                        std::to_string(d - 1) + "}");
        }
        seen[v] = true;
    }
}

std::vector<int> Ordering::positions() const {
    std::vector<int> pos(perm.size(), -1);
    for (std::size_t k = 0; k < perm.size(); ++k) pos[perm[k]] = static_cast<int>(k);
    return pos;
}

Ordering Ordering::identity(int d) {
    Ordering o;
    o.perm.resize(d);
    std::iota(o.perm.begin(), o.perm.end(), 0);
    return o;
}

const char* base_name(BaseDistribution b) {
    return b == BaseDistribution::laplace ? "laplace" : "gaussian";
}

BaseDistribution base_from_name(const std::string& name) {
    if (name == "laplace") return BaseDistribution::laplace;
    if (name == "gaussian") return BaseDistribution::gaussian;
    throw std::invalid_argument("unknown base distribution: " + name);
}

namespace {
constexpr double kLogTwo = 0.6931471805599453;
constexpr double kHalfLogTwoPi = 0.9189385332046727;
}  // namespace

double base_log_density(BaseDistribution base, double u) {
    if (base == BaseDistribution::laplace) return -std::abs(u) - kLogTwo;
    return -0.5 * u * u - kHalfLogTwoPi;
}

double base_log_density_grad(BaseDistribution base, double u) {
    if (base == BaseDistribution::laplace) {
        // subgradient at 0 taken as 0
        return u > 0.0 ? -1.0 : (u < 0.0 ? 1.0 : 0.0);
    }
    return -u;
}

double base_sample(BaseDistribution base, Rng& rng) {
    return base == BaseDistribution::laplace ? rng.laplace() : rng.gaussian();
}

std::size_t AffineFlow::param_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers) {
        n += 2;  // constants
        for (const auto& c : layer.conds) n += c.shift.count() + c.logscale.count();
    }
    return n;
}

AffineFlow make_flow(int d, int n_layers, const Ordering& ordering,
                     const std::vector<int>& hidden, Activation activation,
                     BaseDistribution base, Rng& rng) {
    ordering.validate();
    if (ordering.dim() != d) throw std::invalid_argument("make_flow: ordering dim mismatch");
    if (n_layers < 1) throw std::invalid_argument("make_flow: need at least one layer");
    AffineFlow flow;
    flow.ordering = ordering;
    flow.base = base;
    flow.layers.resize(n_layers);
    for (auto& layer : flow.layers) {
        layer.d = d;
        for (int k = 1; k < d; ++k) {
            Conditioner c;
            c.cfg.layer_sizes.push_back(k);
            for (int h : hidden) c.cfg.layer_sizes.push_back(h);
            c.cfg.layer_sizes.push_back(1);
            c.cfg.activation = activation;
            c.shift = MlpParams::glorot(c.cfg, rng);
            c.logscale = MlpParams::glorot(c.cfg, rng);
            layer.conds.push_back(std::move(c));
        }
    }
    return flow;
}

namespace {

inline double clamp_logscale(double traw) {
    return kLogScaleCap * std::tanh(traw / kLogScaleCap);
}

// derivative of the clamp expressed through its own output
inline double clamp_logscale_grad(double tcap) {
    const double r = tcap / kLogScaleCap;
    return 1.0 - r * r;
}

void check_finite_row(const double* row, std::size_t n, const char* op,
                      std::size_t layer, int variable) {
    for (std::size_t b = 0; b < n; ++b) {
        if (!std::isfinite(row[b])) {
            throw NumericError(std::string(op) + ": non-finite value at layer " +
                               std::to_string(layer) + ", variable " +
                               std::to_string(variable));
        }
    }
}

void gather_row_ptrs(const BatchMatrix& m, const std::vector<int>& perm, int count,
                     std::vector<const double*>& out) {
    out.resize(count);
    for (int i = 0; i < count; ++i) out[i] = m.row(perm[i]);
}

}  // namespace

void forward_batch(const AffineFlow& flow, const BatchMatrix& x, FlowCache& cache) {
    const int d = flow.dim();
    const std::size_t B = x.batch;
    const std::size_t L = flow.layers.size();
    if (x.units != static_cast<std::size_t>(d)) {
        throw std::invalid_argument("forward_batch: dimension mismatch");
    }
    const std::vector<int>& perm = flow.ordering.perm;

    cache.u.resize(L + 1);
    cache.layers.resize(L);
    cache.u[0] = x;
    cache.log_det.assign(B, 0.0);

    std::vector<const double*> in_rows;
    for (std::size_t l = 0; l < L; ++l) {
        const AffineLayer& layer = flow.layers[l];
        FlowCache::LayerCache& lc = cache.layers[l];
        if (lc.sh.units != static_cast<std::size_t>(d) || lc.sh.batch != B) {
            lc.sh.resize(d, B);
            lc.traw.resize(d, B);
            lc.tcap.resize(d, B);
            lc.eexp.resize(d, B);
        }
        lc.shift_ws.resize(d > 1 ? d - 1 : 0);
        lc.logscale_ws.resize(d > 1 ? d - 1 : 0);

        const BatchMatrix& u = cache.u[l];
        BatchMatrix& v = cache.u[l + 1];
        if (v.units != static_cast<std::size_t>(d) || v.batch != B) v.resize(d, B);

        for (int k = 0; k < d; ++k) {
            const int j = perm[k];
            double* sh = lc.sh.row(j);
            double* traw = lc.traw.row(j);
            if (k == 0) {
                std::fill(sh, sh + B, layer.const_shift);
                std::fill(traw, traw + B, layer.const_logscale);
            } else {
                const Conditioner& c = layer.conds[k - 1];
                gather_row_ptrs(u, perm, k, in_rows);
                mlp_forward_batch(c.shift, c.cfg, in_rows, B, lc.shift_ws[k - 1]);
                std::copy_n(lc.shift_ws[k - 1].output().row(0), B, sh);
                mlp_forward_batch(c.logscale, c.cfg, in_rows, B, lc.logscale_ws[k - 1]);
                std::copy_n(lc.logscale_ws[k - 1].output().row(0), B, traw);
            }
            double* tcap = lc.tcap.row(j);
            double* eexp = lc.eexp.row(j);
            double* vj = v.row(j);
            const double* uj = u.row(j);
            double* logdet = cache.log_det.data();
            for (std::size_t b = 0; b < B; ++b) {
                tcap[b] = clamp_logscale(traw[b]);
                eexp[b] = std::exp(tcap[b]);
                vj[b] = sh[b] + eexp[b] * uj[b];
                logdet[b] += tcap[b];
            }
            check_finite_row(vj, B, "flow forward", l, j);
        }
    }
}

void inverse_batch(const AffineFlow& flow, const BatchMatrix& z, BatchMatrix& x) {
    const int d = flow.dim();
    const std::size_t B = z.batch;
    const std::size_t L = flow.layers.size();
    if (z.units != static_cast<std::size_t>(d)) {
        throw std::invalid_argument("inverse_batch: dimension mismatch");
    }
    const std::vector<int>& perm = flow.ordering.perm;

    BatchMatrix v = z;
    BatchMatrix u(d, B);
    MlpWorkspace ws;
    std::vector<const double*> in_rows;
    std::vector<double> sh(B), traw(B);

    for (std::size_t li = L; li-- > 0;) {
        const AffineLayer& layer = flow.layers[li];
        for (int k = 0; k < d; ++k) {
            const int j = perm[k];
            if (k == 0) {
                std::fill(sh.begin(), sh.end(), layer.const_shift);
                std::fill(traw.begin(), traw.end(), layer.const_logscale);
            } else {
                const Conditioner& c = layer.conds[k - 1];
                gather_row_ptrs(u, perm, k, in_rows);
                mlp_forward_batch(c.shift, c.cfg, in_rows, B, ws);
                std::copy_n(ws.output().row(0), B, sh.begin());
                mlp_forward_batch(c.logscale, c.cfg, in_rows, B, ws);
                std::copy_n(ws.output().row(0), B, traw.begin());
            }
            double* uj = u.row(j);
            const double* vj = v.row(j);
            for (std::size_t b = 0; b < B; ++b) {
                uj[b] = (vj[b] - sh[b]) * std::exp(-clamp_logscale(traw[b]));
            }
            check_finite_row(uj, B, "flow inverse", li, j);
        }
        std::swap(v, u);
    }
    x = std::move(v);
}

std::vector<double> log_prob_batch(const AffineFlow& flow, const BatchMatrix& x) {
    FlowCache cache;
    forward_batch(flow, x, cache);
    const BatchMatrix& z = cache.u.back();
    std::vector<double> ll = cache.log_det;
    for (std::size_t j = 0; j < z.units; ++j) {
        const double* zj = z.row(j);
        for (std::size_t b = 0; b < z.batch; ++b) {
            ll[b] += base_log_density(flow.base, zj[b]);
        }
    }
    return ll;
}

ForwardResult forward(const AffineFlow& flow, std::span<const double> x) {
    if (x.size() != static_cast<std::size_t>(flow.dim())) {
        throw std::invalid_argument("forward: input length mismatch");
    }
    BatchMatrix xb(flow.dim(), 1);
    for (int j = 0; j < flow.dim(); ++j) xb.at(j, 0) = x[j];
    FlowCache cache;
    forward_batch(flow, xb, cache);
    ForwardResult r;
    r.z.resize(flow.dim());
    for (int j = 0; j < flow.dim(); ++j) r.z[j] = cache.u.back().at(j, 0);
    r.log_det = cache.log_det[0];
    return r;
}

std::vector<double> inverse(const AffineFlow& flow, std::span<const double> z) {
    if (z.size() != static_cast<std::size_t>(flow.dim())) {
        throw std::invalid_argument("inverse: input length mismatch");
    }
    BatchMatrix zb(flow.dim(), 1);
    for (int j = 0; j < flow.dim(); ++j) zb.at(j, 0) = z[j];
    BatchMatrix xb;
    inverse_batch(flow, zb, xb);
    std::vector<double> x(flow.dim());
    for (int j = 0; j < flow.dim(); ++j) x[j] = xb.at(j, 0);
    return x;
}

double log_prob(const AffineFlow& flow, std::span<const double> x) {
    BatchMatrix xb(flow.dim(), 1);
    if (x.size() != static_cast<std::size_t>(flow.dim())) {
        throw std::invalid_argument("log_prob: input length mismatch");
    }
    for (int j = 0; j < flow.dim(); ++j) xb.at(j, 0) = x[j];
    return log_prob_batch(flow, xb)[0];
}

FlowGrads FlowGrads::zeros(const AffineFlow& flow) {
    FlowGrads g;
    g.layers.resize(flow.layers.size());
    for (std::size_t l = 0; l < flow.layers.size(); ++l) {
        for (const Conditioner& c : flow.layers[l].conds) {
            g.layers[l].shift.push_back(MlpParams::zeros(c.cfg));
            g.layers[l].logscale.push_back(MlpParams::zeros(c.cfg));
        }
    }
    return g;
}

void FlowGrads::zero() {
    for (auto& lg : layers) {
        lg.const_shift = 0.0;
        lg.const_logscale = 0.0;
        for (auto& p : lg.shift) p.fill(0.0);
        for (auto& p : lg.logscale) p.fill(0.0);
    }
}

bool FlowGrads::all_finite() const {
    for (const auto& lg : layers) {
        if (!std::isfinite(lg.const_shift) || !std::isfinite(lg.const_logscale)) return false;
        for (const auto& p : lg.shift) {
            if (!p.all_finite()) return false;
        }
        for (const auto& p : lg.logscale) {
            if (!p.all_finite()) return false;
        }
    }
    return true;
}

void FlowGrads::scale(double a) {
    for (auto& lg : layers) {
        lg.const_shift *= a;
        lg.const_logscale *= a;
        for (auto& p : lg.shift) {
            for (auto& w : p.weights) {
                for (double& v : w) v *= a;
            }
            for (auto& b : p.biases) {
                for (double& v : b) v *= a;
            }
        }
        for (auto& p : lg.logscale) {
            for (auto& w : p.weights) {
                for (double& v : w) v *= a;
            }
            for (auto& b : p.biases) {
                for (double& v : b) v *= a;
            }
        }
    }
}

double log_prob_grad(const AffineFlow& flow, const BatchMatrix& x,
                     FlowCache& cache, FlowGrads& grads) {
    const int d = flow.dim();
    const std::size_t B = x.batch;
    const std::size_t L = flow.layers.size();
    if (B == 0) throw std::invalid_argument("log_prob_grad: empty batch");
    const std::vector<int>& perm = flow.ordering.perm;

    forward_batch(flow, x, cache);
    if (grads.layers.size() != L) grads = FlowGrads::zeros(flow);
    grads.zero();

    const BatchMatrix& z = cache.u[L];
    double ll_sum = 0.0;
    for (std::size_t b = 0; b < B; ++b) ll_sum += cache.log_det[b];
    for (int j = 0; j < d; ++j) {
        const double* zj = z.row(j);
        for (std::size_t b = 0; b < B; ++b) ll_sum += base_log_density(flow.base, zj[b]);
    }
    const double mean_ll = ll_sum / static_cast<double>(B);
    if (!std::isfinite(mean_ll)) throw NumericError("log_prob_grad: non-finite loss");

    const double inv_b = 1.0 / static_cast<double>(B);
    BatchMatrix& g_cur = cache.grad_cur;
    BatchMatrix& g_next = cache.grad_next;
    BatchMatrix& g_traw = cache.grad_traw;
    if (g_cur.units != static_cast<std::size_t>(d) || g_cur.batch != B) {
        g_cur.resize(d, B);
        g_next.resize(d, B);
        g_traw.resize(d, B);
    }

    // seed: d(mean ll)/dz
    for (int j = 0; j < d; ++j) {
        const double* zj = z.row(j);
        double* gj = g_cur.row(j);
        for (std::size_t b = 0; b < B; ++b) {
            gj[b] = base_log_density_grad(flow.base, zj[b]) * inv_b;
        }
    }

    std::vector<const double*> in_rows;
    std::vector<double*> in_grad_rows;
    for (std::size_t li = L; li-- > 0;) {
        const AffineLayer& layer = flow.layers[li];
        FlowCache::LayerCache& lc = cache.layers[li];
        FlowGrads::LayerGrads& lg = grads.layers[li];
        const BatchMatrix& u = cache.u[li];

        // direct paths: d/du_j through e^t * u_j, and the log-scale gradient
        // collecting both the log-det term (1/B each sample) and the output path
        for (int j = 0; j < d; ++j) {
            const double* gv = g_cur.row(j);
            const double* eexp = lc.eexp.row(j);
            const double* tcap = lc.tcap.row(j);
            const double* uj = u.row(j);
            double* gn = g_next.row(j);
            double* gt = g_traw.row(j);
            for (std::size_t b = 0; b < B; ++b) {
                gt[b] = (inv_b + gv[b] * eexp[b] * uj[b]) * clamp_logscale_grad(tcap[b]);
                gn[b] = gv[b] * eexp[b];
            }
        }

        lg.const_shift += kernels::sum(B, g_cur.row(perm[0]));
        lg.const_logscale += kernels::sum(B, g_traw.row(perm[0]));

        for (int k = 1; k < d; ++k) {
            const int j = perm[k];
            const Conditioner& c = layer.conds[k - 1];
            gather_row_ptrs(u, perm, k, in_rows);
            in_grad_rows.resize(k);
            for (int i = 0; i < k; ++i) in_grad_rows[i] = g_next.row(perm[i]);

            const double* up_shift[1] = {g_cur.row(j)};
            mlp_backward_batch(c.shift, c.cfg, in_rows, B, lc.shift_ws[k - 1],
                               std::span<const double* const>(up_shift, 1),
                               lg.shift[k - 1], in_grad_rows);
            const double* up_scale[1] = {g_traw.row(j)};
            mlp_backward_batch(c.logscale, c.cfg, in_rows, B, lc.logscale_ws[k - 1],
                               std::span<const double* const>(up_scale, 1),
                               lg.logscale[k - 1], in_grad_rows);
        }
        std::swap(g_cur, g_next);
    }
    return mean_ll;
}

double log_prob_grad(const AffineFlow& flow,
                     const std::vector<std::vector<double>>& batch,
                     FlowGrads& grads) {
    if (batch.empty()) throw std::invalid_argument("log_prob_grad: empty batch");
    const int d = flow.dim();
    BatchMatrix x(d, batch.size());
    for (std::size_t b = 0; b < batch.size(); ++b) {
        if (batch[b].size() != static_cast<std::size_t>(d)) {
            throw std::invalid_argument("log_prob_grad: row length mismatch");
        }
        for (int j = 0; j < d; ++j) x.at(j, b) = batch[b][j];
    }
    FlowCache cache;
    return log_prob_grad(flow, x, cache, grads);
}

BatchMatrix sample(const AffineFlow& flow, std::size_t n, Rng& rng) {
    if (n == 0) throw std::invalid_argument("sample: n must be >= 1");
    const int d = flow.dim();
    BatchMatrix z(d, n);
    for (std::size_t b = 0; b < n; ++b) {
        for (int j = 0; j < d; ++j) z.at(j, b) = base_sample(flow.base, rng);
    }
    BatchMatrix x;
    inverse_batch(flow, z, x);
    return x;
}

}  // namespace causalflow
