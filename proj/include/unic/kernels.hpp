#pragma once
// Data-parallel inner loops used by the distance engine, the clustering
// head, and k-means. Every kernel has a scalar reference implementation
// and, where the hardware supports it, a vectorized variant selected at
// runtime. Variants are equivalence-tested against the scalar versions.

#include <cstddef>
#include <string>

namespace unic::kernels {

enum class Backend {
    scalar,
    avx2,
    neon,
};

struct KernelTable {
    // f32 kernels (embedding-space distances)
    float (*dot_f32)(const float*, const float*, std::size_t);
    float (*sqdist_f32)(const float*, const float*, std::size_t);
    // f64 kernels (head math, k-means accumulation)
    double (*dot_f64)(const double*, const double*, std::size_t);
    double (*sqdist_f64)(const double*, const double*, std::size_t);
    void (*axpy_f64)(double, const double*, double*, std::size_t);
};

namespace scalar {
float dot_f32(const float* a, const float* b, std::size_t n);
float sqdist_f32(const float* a, const float* b, std::size_t n);
double dot_f64(const double* a, const double* b, std::size_t n);
double sqdist_f64(const double* a, const double* b, std::size_t n);
void axpy_f64(double alpha, const double* x, double* y, std::size_t n);
}  // namespace scalar

#if defined(UNIC_HAVE_AVX2)
namespace avx2 {
float dot_f32(const float* a, const float* b, std::size_t n);
float sqdist_f32(const float* a, const float* b, std::size_t n);
double dot_f64(const double* a, const double* b, std::size_t n);
double sqdist_f64(const double* a, const double* b, std::size_t n);
void axpy_f64(double alpha, const double* x, double* y, std::size_t n);
}  // namespace avx2
#endif

#if defined(UNIC_HAVE_NEON)
namespace neon {
float dot_f32(const float* a, const float* b, std::size_t n);
float sqdist_f32(const float* a, const float* b, std::size_t n);
double dot_f64(const double* a, const double* b, std::size_t n);
double sqdist_f64(const double* a, const double* b, std::size_t n);
void axpy_f64(double alpha, const double* x, double* y, std::size_t n);
}  // namespace neon
#endif

// Backend selection. select(Backend::avx2) throws if the CPU lacks the
// feature; select_auto() picks the best available. The active table is
// process-global; switch it before spawning worker threads.
void select(Backend b);
void select_auto();
Backend active();
std::string backend_name(Backend b);
bool available(Backend b);

// Dispatched entry points. These read the active table.
float dot_f32(const float* a, const float* b, std::size_t n);
float sqdist_f32(const float* a, const float* b, std::size_t n);
double dot_f64(const double* a, const double* b, std::size_t n);
double sqdist_f64(const double* a, const double* b, std::size_t n);
void axpy_f64(double alpha, const double* x, double* y, std::size_t n);

}  // namespace unic::kernels
