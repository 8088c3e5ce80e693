// AVX2+FMA kernel variants. This translation unit is the only one compiled
// with -mavx2 -mfma; it must not be entered on CPUs without those features
// (dispatch in kernels.cpp guarantees that).

#include <cmath>
#include <immintrin.h>

#include "kernels_impl.hpp"

namespace causalflow::kernels::avx2 {

void axpy(std::size_t n, double a, const double* x, double* y) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vx = _mm256_loadu_pd(x + i);
        const __m256d vy = _mm256_loadu_pd(y + i);
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, vx, vy));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

double dot(std::size_t n, const double* x, const double* y) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    }
    const __m256d acc = _mm256_add_pd(acc0, acc1);
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double r = lanes[0] + lanes[1] + lanes[2] + lanes[3];
    for (; i < n; ++i) r += x[i] * y[i];
    return r;
}

double sum(std::size_t n, const double* x) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double r = lanes[0] + lanes[1] + lanes[2] + lanes[3];
    for (; i < n; ++i) r += x[i];
    return r;
}

void leaky_relu(std::size_t n, const double* src, double* dst, double slope) {
    const __m256d vslope = _mm256_set1_pd(slope);
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(src + i);
        const __m256d mask = _mm256_cmp_pd(v, zero, _CMP_GT_OQ);
        const __m256d scaled = _mm256_mul_pd(v, vslope);
        _mm256_storeu_pd(dst + i, _mm256_blendv_pd(scaled, v, mask));
    }
    for (; i < n; ++i) dst[i] = src[i] > 0.0 ? src[i] : slope * src[i];
}

void leaky_relu_grad(std::size_t n, const double* pre, const double* g_out,
                     double* g_in, double slope) {
    const __m256d vslope = _mm256_set1_pd(slope);
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d p = _mm256_loadu_pd(pre + i);
        const __m256d mask = _mm256_cmp_pd(p, zero, _CMP_GT_OQ);
        const __m256d factor = _mm256_blendv_pd(vslope, one, mask);
        _mm256_storeu_pd(g_in + i, _mm256_mul_pd(_mm256_loadu_pd(g_out + i), factor));
    }
    for (; i < n; ++i) g_in[i] = g_out[i] * (pre[i] > 0.0 ? 1.0 : slope);
}

void tanh_grad(std::size_t n, const double* act, const double* g_out, double* g_in) {
    const __m256d one = _mm256_set1_pd(1.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d a = _mm256_loadu_pd(act + i);
        const __m256d onem = _mm256_fnmadd_pd(a, a, one);
        _mm256_storeu_pd(g_in + i, _mm256_mul_pd(_mm256_loadu_pd(g_out + i), onem));
    }
    for (; i < n; ++i) g_in[i] = g_out[i] * (1.0 - act[i] * act[i]);
}

void adam_update(std::size_t n, double* p, double* m, double* v, const double* g,
                 double lr, double beta1, double beta2, double eps, long step) {
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    const __m256d vb1 = _mm256_set1_pd(beta1);
    const __m256d vb2 = _mm256_set1_pd(beta2);
    const __m256d v1mb1 = _mm256_set1_pd(1.0 - beta1);
    const __m256d v1mb2 = _mm256_set1_pd(1.0 - beta2);
    const __m256d vbc1 = _mm256_set1_pd(bc1);
    const __m256d vbc2 = _mm256_set1_pd(bc2);
    const __m256d vlr = _mm256_set1_pd(lr);
    const __m256d veps = _mm256_set1_pd(eps);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vg = _mm256_loadu_pd(g + i);
        __m256d vm = _mm256_loadu_pd(m + i);
        __m256d vv = _mm256_loadu_pd(v + i);
        vm = _mm256_fmadd_pd(vb1, vm, _mm256_mul_pd(v1mb1, vg));
        vv = _mm256_fmadd_pd(vb2, vv, _mm256_mul_pd(v1mb2, _mm256_mul_pd(vg, vg)));
        _mm256_storeu_pd(m + i, vm);
        _mm256_storeu_pd(v + i, vv);
        const __m256d mhat = _mm256_div_pd(vm, vbc1);
        const __m256d vhat = _mm256_div_pd(vv, vbc2);
        const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), veps);
        const __m256d upd = _mm256_div_pd(_mm256_mul_pd(vlr, mhat), denom);
        _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), upd));
    }
    for (; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        p[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
    }
}

}  // namespace causalflow::kernels::avx2
