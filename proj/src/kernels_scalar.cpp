#include <cmath>
#include <cstddef>

#include "igsyn/kernels.hpp"

namespace igsyn::kernels::scalar {

double dot(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

double sumsq(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
    return acc;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void adam_moments(double* m, double* v, const double* g, std::size_t n,
                  double b1, double b2) {
    const double c1 = 1.0 - b1;
    const double c2 = 1.0 - b2;
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = b1 * m[i] + c1 * g[i];
        v[i] = b2 * v[i] + c2 * g[i] * g[i];
    }
}

void adam_direction(double* out, const double* m, const double* v,
                    std::size_t n, double inv_bc1, double inv_bc2, double eps) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = (m[i] * inv_bc1) / (std::sqrt(v[i] * inv_bc2) + eps);
    }
}

}  // namespace igsyn::kernels::scalar
