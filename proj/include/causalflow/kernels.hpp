#pragma once

#include <cstddef>

// Data-parallel inner loops shared by the network and optimizer code.
// Every kernel has a scalar reference implementation and, on x86-64 with
// AVX2+FMA, a vector variant selected at runtime. The two are equivalence
// tested against each other; callers never observe which one ran apart from
// last-ulp rounding (FMA contraction, reassociated reductions).
namespace causalflow::kernels {

enum class Backend { scalar, avx2 };

// Backend picked at startup: AVX2 when the CPU supports it, unless the
// CAUSAL_FLOW_KERNELS environment variable ("scalar" | "avx2" | "auto")
// says otherwise.
Backend active_backend();
void set_backend(Backend b);
bool avx2_available();
const char* backend_name(Backend b);

// y[i] += a * x[i]
void axpy(std::size_t n, double a, const double* x, double* y);

// sum_i x[i] * y[i]
double dot(std::size_t n, const double* x, const double* y);

// sum_i x[i]
double sum(std::size_t n, const double* x);

// dst[i] = src[i] > 0 ? src[i] : slope * src[i]
void leaky_relu(std::size_t n, const double* src, double* dst, double slope);

// g_in[i] = g_out[i] * (pre[i] > 0 ? 1 : slope)
void leaky_relu_grad(std::size_t n, const double* pre, const double* g_out,
                     double* g_in, double slope);

// dst[i] = tanh(src[i]); scalar libm on every backend so results are
// identical across them.
void tanh_eval(std::size_t n, const double* src, double* dst);

// g_in[i] = g_out[i] * (1 - act[i]^2), act being tanh outputs.
void tanh_grad(std::size_t n, const double* act, const double* g_out, double* g_in);

// One bias-corrected Adam update over a flat parameter array, in place.
// step is the 1-based index of this update.
void adam_update(std::size_t n, double* p, double* m, double* v, const double* g,
                 double lr, double beta1, double beta2, double eps, long step);

}  // namespace causalflow::kernels
