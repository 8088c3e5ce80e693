#include "causalflow/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <string>

#include "kernels_impl.hpp"

namespace causalflow::kernels {

namespace scalar {

void axpy(std::size_t n, double a, const double* x, double* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double dot(std::size_t n, const double* x, const double* y) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

double sum(std::size_t n, const double* x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

void leaky_relu(std::size_t n, const double* src, double* dst, double slope) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = src[i] > 0.0 ? src[i] : slope * src[i];
}

void leaky_relu_grad(std::size_t n, const double* pre, const double* g_out,
                     double* g_in, double slope) {
    for (std::size_t i = 0; i < n; ++i) g_in[i] = g_out[i] * (pre[i] > 0.0 ? 1.0 : slope);
}

void tanh_grad(std::size_t n, const double* act, const double* g_out, double* g_in) {
    for (std::size_t i = 0; i < n; ++i) g_in[i] = g_out[i] * (1.0 - act[i] * act[i]);
}

void adam_update(std::size_t n, double* p, double* m, double* v, const double* g,
                 double lr, double beta1, double beta2, double eps, long step) {
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

}  // namespace scalar

namespace {

bool cpu_has_avx2() {
#if CAUSALFLOW_HAVE_AVX2_TU
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend detect_backend() {
    const char* env = std::getenv("CAUSAL_FLOW_KERNELS");
    if (env != nullptr) {
        if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
        if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2()) return Backend::avx2;
        // "auto" and anything unrecognized fall through to detection
    }
    return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend> g_backend{detect_backend()};

}  // namespace

Backend active_backend() { return g_backend.load(std::memory_order_relaxed); }

void set_backend(Backend b) {
    if (b == Backend::avx2 && !cpu_has_avx2()) b = Backend::scalar;
    g_backend.store(b, std::memory_order_relaxed);
}

bool avx2_available() { return cpu_has_avx2(); }

const char* backend_name(Backend b) {
    return b == Backend::avx2 ? "avx2" : "scalar";
}

#if CAUSALFLOW_HAVE_AVX2_TU
#define CF_DISPATCH(fn, ...)                                        \
    (active_backend() == Backend::avx2 ? avx2::fn(__VA_ARGS__)     \
                                       : scalar::fn(__VA_ARGS__))
#else
#define CF_DISPATCH(fn, ...) scalar::fn(__VA_ARGS__)
#endif

void axpy(std::size_t n, double a, const double* x, double* y) {
    CF_DISPATCH(axpy, n, a, x, y);
}

double dot(std::size_t n, const double* x, const double* y) {
    return CF_DISPATCH(dot, n, x, y);
}

double sum(std::size_t n, const double* x) { return CF_DISPATCH(sum, n, x); }

void leaky_relu(std::size_t n, const double* src, double* dst, double slope) {
    CF_DISPATCH(leaky_relu, n, src, dst, slope);
}

void leaky_relu_grad(std::size_t n, const double* pre, const double* g_out,
                     double* g_in, double slope) {
    CF_DISPATCH(leaky_relu_grad, n, pre, g_out, g_in, slope);
}

void tanh_eval(std::size_t n, const double* src, double* dst) {
    // libm tanh on both backends: a vector polynomial would break the
    // backend-equivalence guarantee for no measurable gain here.
    for (std::size_t i = 0; i < n; ++i) dst[i] = std::tanh(src[i]);
}

void tanh_grad(std::size_t n, const double* act, const double* g_out, double* g_in) {
    CF_DISPATCH(tanh_grad, n, act, g_out, g_in);
}

void adam_update(std::size_t n, double* p, double* m, double* v, const double* g,
                 double lr, double beta1, double beta2, double eps, long step) {
    CF_DISPATCH(adam_update, n, p, m, v, g, lr, beta1, beta2, eps, step);
}

}  // namespace causalflow::kernels
