#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "causalflow/diffnet.hpp"
#include "causalflow/rng.hpp"

namespace causalflow {

// Log-scale outputs pass through the smooth clamp cap*tanh(t/cap) so that
// e^t stays within e^(+-7); unclamped scales overflow long before training
// signals can pull them back.
constexpr double kLogScaleCap = 7.0;

// Autoregressive (causal) order: perm[k] is the variable placed k-th.
struct Ordering {
    std::vector<int> perm;

    int dim() const { return static_cast<int>(perm.size()); }
    void validate() const;  // must be a bijection on {0..d-1}
    // positions()[v] = position of variable v in the ordering
    std::vector<int> positions() const;
    static Ordering identity(int d);
};

enum class BaseDistribution { laplace, gaussian };

const char* base_name(BaseDistribution b);
BaseDistribution base_from_name(const std::string& name);

double base_log_density(BaseDistribution base, double u);
double base_log_density_grad(BaseDistribution base, double u);
double base_sample(BaseDistribution base, Rng& rng);

// Shift and log-scale conditioner pair for one variable at ordering
// position k >= 1; both nets map the k predecessor values to one real.
struct Conditioner {
    MlpConfig cfg;
    MlpParams shift;
    MlpParams logscale;
};

// One affine autoregressive layer: z_j = s_j(pred) + e^{t_j(pred)} * x_j.
// The first variable in the ordering has no predecessors, so its shift and
// log-scale are learned scalar constants.
struct AffineLayer {
    int d = 0;
    double const_shift = 0.0;
    double const_logscale = 0.0;
    std::vector<Conditioner> conds;  // index k-1 holds ordering position k
};

struct AffineFlow {
    Ordering ordering;
    BaseDistribution base = BaseDistribution::laplace;
    std::vector<AffineLayer> layers;  // data-side layer first

    int dim() const { return ordering.dim(); }
    std::size_t param_count() const;
};

// Zero constants, Glorot conditioner weights, zero biases.
AffineFlow make_flow(int d, int n_layers, const Ordering& ordering,
                     const std::vector<int>& hidden, Activation activation,
                     BaseDistribution base, Rng& rng);

struct ForwardResult {
    std::vector<double> z;
    double log_det = 0.0;  // log |det J| of the x -> z map: the sum of all t_j
};

ForwardResult forward(const AffineFlow& flow, std::span<const double> x);
std::vector<double> inverse(const AffineFlow& flow, std::span<const double> z);
double log_prob(const AffineFlow& flow, std::span<const double> x);

// ---- batched paths ---------------------------------------------------------

// Per-batch caches for the training pass: layer inputs plus the shift /
// raw and clamped log-scale / e^t rows every backward step needs.
struct FlowCache {
    struct LayerCache {
        BatchMatrix sh, traw, tcap, eexp;          // d x batch each
        std::vector<MlpWorkspace> shift_ws;        // per ordering position 1..d-1
        std::vector<MlpWorkspace> logscale_ws;
    };
    std::vector<BatchMatrix> u;  // layer inputs; u[0] = x, u[layers] = z
    std::vector<LayerCache> layers;
    std::vector<double> log_det;  // per sample
    BatchMatrix grad_cur, grad_next, grad_traw;  // backward scratch
};

// x and z are d x batch. Fills cache; z lands in cache.u.back().
void forward_batch(const AffineFlow& flow, const BatchMatrix& x, FlowCache& cache);

// z -> x, layers inverted last-to-first, variables reconstructed in
// ordering sequence.
void inverse_batch(const AffineFlow& flow, const BatchMatrix& z, BatchMatrix& x);

std::vector<double> log_prob_batch(const AffineFlow& flow, const BatchMatrix& x);

// Gradient mirror of the flow parameters, accumulated with +=.
struct FlowGrads {
    struct LayerGrads {
        double const_shift = 0.0;
        double const_logscale = 0.0;
        std::vector<MlpParams> shift;     // per ordering position 1..d-1
        std::vector<MlpParams> logscale;
    };
    std::vector<LayerGrads> layers;

    static FlowGrads zeros(const AffineFlow& flow);
    void zero();
    bool all_finite() const;
    void scale(double a);
};

// Mean log-likelihood of the batch and its exact gradient with respect to
// every flow parameter (conditioner weights/biases and the per-layer
// constants). Gradients are written, not accumulated.
double log_prob_grad(const AffineFlow& flow, const BatchMatrix& x,
                     FlowCache& cache, FlowGrads& grads);

// Convenience overload matching the row-vector interface.
double log_prob_grad(const AffineFlow& flow,
                     const std::vector<std::vector<double>>& batch,
                     FlowGrads& grads);

// n base draws pushed through the inverse map; d x n, deterministic per seed.
BatchMatrix sample(const AffineFlow& flow, std::size_t n, Rng& rng);

}  // namespace causalflow
