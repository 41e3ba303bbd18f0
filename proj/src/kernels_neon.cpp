// NEON variants for aarch64, where Advanced SIMD is baseline.

#include "unic/kernels.hpp"

#if defined(UNIC_HAVE_NEON)

#include <arm_neon.h>

namespace unic::kernels::neon {

float dot_f32(const float* a, const float* b, std::size_t n) {
    float32x4_t acc = vdupq_n_f32(0.0f);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = vfmaq_f32(acc, vld1q_f32(a + i), vld1q_f32(b + i));
    }
    float acc_s = vaddvq_f32(acc);
    for (; i < n; ++i) acc_s += a[i] * b[i];
    return acc_s;
}

float sqdist_f32(const float* a, const float* b, std::size_t n) {
    float32x4_t acc = vdupq_n_f32(0.0f);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        float32x4_t d = vsubq_f32(vld1q_f32(a + i), vld1q_f32(b + i));
        acc = vfmaq_f32(acc, d, d);
    }
    float acc_s = vaddvq_f32(acc);
    for (; i < n; ++i) {
        float d = a[i] - b[i];
        acc_s += d * d;
    }
    return acc_s;
}

double dot_f64(const double* a, const double* b, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        acc = vfmaq_f64(acc, vld1q_f64(a + i), vld1q_f64(b + i));
    }
    double acc_s = vaddvq_f64(acc);
    for (; i < n; ++i) acc_s += a[i] * b[i];
    return acc_s;
}

double sqdist_f64(const double* a, const double* b, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        acc = vfmaq_f64(acc, d, d);
    }
    double acc_s = vaddvq_f64(acc);
    for (; i < n; ++i) {
        double d = a[i] - b[i];
        acc_s += d * d;
    }
    return acc_s;
}

void axpy_f64(double alpha, const double* x, double* y, std::size_t n) {
    float64x2_t va = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t vy = vld1q_f64(y + i);
        vy = vfmaq_f64(vy, va, vld1q_f64(x + i));
        vst1q_f64(y + i, vy);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace unic::kernels::neon

#endif  // UNIC_HAVE_NEON
