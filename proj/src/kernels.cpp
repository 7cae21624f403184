#include "igsyn/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace igsyn::kernels {

double (*dot)(const double*, const double*, std::size_t) = scalar::dot;
double (*sumsq)(const double*, std::size_t) = scalar::sumsq;
void (*axpy)(double, const double*, double*, std::size_t) = scalar::axpy;
void (*adam_moments)(double*, double*, const double*, std::size_t, double,
                     double) = scalar::adam_moments;
void (*adam_direction)(double*, const double*, const double*, std::size_t,
                       double, double, double) = scalar::adam_direction;

namespace {
Backend g_active = Backend::kScalar;
}

bool cpu_supports_avx2() {
#if defined(IGSYN_HAVE_AVX2)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

bool select_backend(Backend b) {
#if defined(IGSYN_HAVE_AVX2)
    if (b == Backend::kAvx2 && cpu_supports_avx2()) {
        dot = avx2::dot;
        sumsq = avx2::sumsq;
        axpy = avx2::axpy;
        adam_moments = avx2::adam_moments;
        adam_direction = avx2::adam_direction;
        g_active = Backend::kAvx2;
        return true;
    }
#endif
    dot = scalar::dot;
    sumsq = scalar::sumsq;
    axpy = scalar::axpy;
    adam_moments = scalar::adam_moments;
    adam_direction = scalar::adam_direction;
    g_active = Backend::kScalar;
    return b == Backend::kScalar;
}

Backend active_backend() { return g_active; }

std::string_view backend_name() {
    return g_active == Backend::kAvx2 ? "avx2" : "scalar";
}

namespace {

int init_dispatch() {
    Backend want = cpu_supports_avx2() ? Backend::kAvx2 : Backend::kScalar;
    if (const char* env = std::getenv("IGSYN_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) want = Backend::kScalar;
        else if (std::strcmp(env, "avx2") == 0) want = Backend::kAvx2;
    }
    select_backend(want);
    return 0;
}

const int g_init = init_dispatch();

}  // namespace

}  // namespace igsyn::kernels
