#pragma once

#include <cstddef>
#include <string_view>

// Vector kernels used by the training / scoring inner loops. Every kernel has
// a scalar reference implementation and (on x86-64) an AVX2+FMA variant; the
// active set is chosen once at startup from CPU capabilities and can be forced
// with select_backend() or the IGSYN_KERNELS environment variable
// ("scalar" / "avx2"). Variants are equivalence-tested against the reference.

namespace igsyn::kernels {

enum class Backend { kScalar, kAvx2 };

// Active implementations. Function pointers, rebindable via select_backend().
extern double (*dot)(const double* x, const double* y, std::size_t n);
extern double (*sumsq)(const double* x, std::size_t n);
// y += a * x
extern void (*axpy)(double a, const double* x, double* y, std::size_t n);
// m = b1*m + (1-b1)*g ; v = b2*v + (1-b2)*g^2
extern void (*adam_moments)(double* m, double* v, const double* g,
                            std::size_t n, double b1, double b2);
// out = (m*inv_bc1) / (sqrt(v*inv_bc2) + eps)
extern void (*adam_direction)(double* out, const double* m, const double* v,
                              std::size_t n, double inv_bc1, double inv_bc2,
                              double eps);

// Scalar reference set, always available (oracle for equivalence tests).
namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
double sumsq(const double* x, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void adam_moments(double* m, double* v, const double* g, std::size_t n,
                  double b1, double b2);
void adam_direction(double* out, const double* m, const double* v,
                    std::size_t n, double inv_bc1, double inv_bc2, double eps);
}  // namespace scalar

#if defined(IGSYN_HAVE_AVX2)
namespace avx2 {
double dot(const double* x, const double* y, std::size_t n);
double sumsq(const double* x, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void adam_moments(double* m, double* v, const double* g, std::size_t n,
                  double b1, double b2);
void adam_direction(double* out, const double* m, const double* v,
                    std::size_t n, double inv_bc1, double inv_bc2, double eps);
}  // namespace avx2
#endif

bool cpu_supports_avx2();
// Rebinds the active set. Requesting kAvx2 on a CPU without AVX2 keeps scalar
// and returns false.
bool select_backend(Backend b);
Backend active_backend();
std::string_view backend_name();

}  // namespace igsyn::kernels
