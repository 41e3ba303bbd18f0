#include "unic/kernels.hpp"

#include <stdexcept>

namespace unic::kernels {

namespace {

constexpr KernelTable kScalarTable = {
    &scalar::dot_f32, &scalar::sqdist_f32,
    &scalar::dot_f64, &scalar::sqdist_f64, &scalar::axpy_f64,
};

#if defined(UNIC_HAVE_AVX2)
constexpr KernelTable kAvx2Table = {
    &avx2::dot_f32, &avx2::sqdist_f32,
    &avx2::dot_f64, &avx2::sqdist_f64, &avx2::axpy_f64,
};
#endif

#if defined(UNIC_HAVE_NEON)
constexpr KernelTable kNeonTable = {
    &neon::dot_f32, &neon::sqdist_f32,
    &neon::dot_f64, &neon::sqdist_f64, &neon::axpy_f64,
};
#endif

struct Active {
    const KernelTable* table;
    Backend backend;
};

Active pick_auto() {
#if defined(UNIC_HAVE_AVX2)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
        return {&kAvx2Table, Backend::avx2};
    }
#endif
#if defined(UNIC_HAVE_NEON)
    return {&kNeonTable, Backend::neon};
#endif
    return {&kScalarTable, Backend::scalar};
}

Active g_active = pick_auto();

}  // namespace

bool available(Backend b) {
    switch (b) {
        case Backend::scalar:
            return true;
        case Backend::avx2:
#if defined(UNIC_HAVE_AVX2)
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
        case Backend::neon:
#if defined(UNIC_HAVE_NEON)
            return true;
#else
            return false;
#endif
    }
    return false;
}

void select(Backend b) {
    if (!available(b)) {
        throw std::runtime_error("kernel backend not available: " + backend_name(b));
    }
    switch (b) {
        case Backend::scalar:
            g_active = {&kScalarTable, Backend::scalar};
            break;
        case Backend::avx2:
#if defined(UNIC_HAVE_AVX2)
            g_active = {&kAvx2Table, Backend::avx2};
#endif
            break;
        case Backend::neon:
#if defined(UNIC_HAVE_NEON)
            g_active = {&kNeonTable, Backend::neon};
#endif
            break;
    }
}

void select_auto() { g_active = pick_auto(); }

Backend active() { return g_active.backend; }

std::string backend_name(Backend b) {
    switch (b) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
        case Backend::neon: return "neon";
    }
    return "?";
}

float dot_f32(const float* a, const float* b, std::size_t n) {
    return g_active.table->dot_f32(a, b, n);
}
float sqdist_f32(const float* a, const float* b, std::size_t n) {
    return g_active.table->sqdist_f32(a, b, n);
}
double dot_f64(const double* a, const double* b, std::size_t n) {
    return g_active.table->dot_f64(a, b, n);
}
double sqdist_f64(const double* a, const double* b, std::size_t n) {
    return g_active.table->sqdist_f64(a, b, n);
}
void axpy_f64(double alpha, const double* x, double* y, std::size_t n) {
    g_active.table->axpy_f64(alpha, x, y, n);
}

}  // namespace unic::kernels
