#include "igsyn/kernels.hpp"

#if defined(IGSYN_HAVE_AVX2)

#include <immintrin.h>

#include <cmath>
#include <cstddef>

namespace igsyn::kernels::avx2 {

namespace {

inline double reduce_add_f64x4(__m256d x) {
    __m128d lo = _mm256_castpd256_pd128(x);
    __m128d hi = _mm256_extractf128_pd(x, 1);
    __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

double dot(const double* x, const double* y, std::size_t n) {
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
    double acc = reduce_add_f64x4(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

double sumsq(const double* x, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256d a = _mm256_loadu_pd(x + i);
        __m256d b = _mm256_loadu_pd(x + i + 4);
        acc0 = _mm256_fmadd_pd(a, a, acc0);
        acc1 = _mm256_fmadd_pd(b, b, acc1);
    }
    for (; i + 4 <= n; i += 4) {
        __m256d a = _mm256_loadu_pd(x + i);
        acc0 = _mm256_fmadd_pd(a, a, acc0);
    }
    double acc = reduce_add_f64x4(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += x[i] * x[i];
    return acc;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    const __m256d av = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d yi = _mm256_loadu_pd(y + i);
        yi = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), yi);
        _mm256_storeu_pd(y + i, yi);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void adam_moments(double* m, double* v, const double* g, std::size_t n,
                  double b1, double b2) {
    const __m256d b1v = _mm256_set1_pd(b1);
    const __m256d b2v = _mm256_set1_pd(b2);
    const __m256d c1v = _mm256_set1_pd(1.0 - b1);
    const __m256d c2v = _mm256_set1_pd(1.0 - b2);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d gi = _mm256_loadu_pd(g + i);
        __m256d mi = _mm256_mul_pd(b1v, _mm256_loadu_pd(m + i));
        mi = _mm256_fmadd_pd(c1v, gi, mi);
        _mm256_storeu_pd(m + i, mi);
        __m256d g2 = _mm256_mul_pd(gi, gi);
        __m256d vi = _mm256_mul_pd(b2v, _mm256_loadu_pd(v + i));
        vi = _mm256_fmadd_pd(c2v, g2, vi);
        _mm256_storeu_pd(v + i, vi);
    }
    const double c1 = 1.0 - b1;
    const double c2 = 1.0 - b2;
    for (; i < n; ++i) {
        m[i] = b1 * m[i] + c1 * g[i];
        v[i] = b2 * v[i] + c2 * g[i] * g[i];
    }
}

void adam_direction(double* out, const double* m, const double* v,
                    std::size_t n, double inv_bc1, double inv_bc2, double eps) {
    const __m256d bc1 = _mm256_set1_pd(inv_bc1);
    const __m256d bc2 = _mm256_set1_pd(inv_bc2);
    const __m256d ev = _mm256_set1_pd(eps);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d num = _mm256_mul_pd(_mm256_loadu_pd(m + i), bc1);
        __m256d den = _mm256_sqrt_pd(_mm256_mul_pd(_mm256_loadu_pd(v + i), bc2));
        den = _mm256_add_pd(den, ev);
        _mm256_storeu_pd(out + i, _mm256_div_pd(num, den));
    }
    for (; i < n; ++i) {
        out[i] = (m[i] * inv_bc1) / (std::sqrt(v[i] * inv_bc2) + eps);
    }
}

}  // namespace igsyn::kernels::avx2

#endif  // IGSYN_HAVE_AVX2
