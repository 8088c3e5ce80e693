#pragma once

#include <cstddef>

// Internal: per-backend kernel entry points. kernels.cpp owns dispatch.
namespace causalflow::kernels {

namespace scalar {
void axpy(std::size_t n, double a, const double* x, double* y);
double dot(std::size_t n, const double* x, const double* y);
double sum(std::size_t n, const double* x);
void leaky_relu(std::size_t n, const double* src, double* dst, double slope);
void leaky_relu_grad(std::size_t n, const double* pre, const double* g_out,
                     double* g_in, double slope);
void tanh_grad(std::size_t n, const double* act, const double* g_out, double* g_in);
void adam_update(std::size_t n, double* p, double* m, double* v, const double* g,
                 double lr, double beta1, double beta2, double eps, long step);
}  // namespace scalar

#if CAUSALFLOW_HAVE_AVX2_TU
namespace avx2 {
void axpy(std::size_t n, double a, const double* x, double* y);
double dot(std::size_t n, const double* x, const double* y);
double sum(std::size_t n, const double* x);
void leaky_relu(std::size_t n, const double* src, double* dst, double slope);
void leaky_relu_grad(std::size_t n, const double* pre, const double* g_out,
                     double* g_in, double slope);
void tanh_grad(std::size_t n, const double* act, const double* g_out, double* g_in);
void adam_update(std::size_t n, double* p, double* m, double* v, const double* g,
                 double lr, double beta1, double beta2, double eps, long step);
}  // namespace avx2
#endif

}  // namespace causalflow::kernels
