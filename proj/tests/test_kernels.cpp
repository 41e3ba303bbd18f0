#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "unic/kernels.hpp"
#include "unic/knn.hpp"
#include "test_util.hpp"

using namespace unic;

namespace {

struct BackendGuard {
    kernels::Backend saved;
    BackendGuard() : saved(kernels::active()) {}
    ~BackendGuard() { kernels::select(saved); }
};

std::vector<float> random_f32(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> d(0.0f, 1.0f);
    std::vector<float> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

std::vector<double> random_f64(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d(0.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

double ref_dot(const float* a, const float* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += double(a[i]) * double(b[i]);
    return acc;
}

}  // namespace

TEST_CASE("scalar backend always available, auto picks something usable") {
    CHECK(kernels::available(kernels::Backend::scalar));
    BackendGuard guard;
    kernels::select_auto();
    CHECK(kernels::available(kernels::active()));
}

TEST_CASE("vector variants match scalar reference across sizes including remainders") {
    BackendGuard guard;
    for (auto backend : {kernels::Backend::avx2, kernels::Backend::neon}) {
        if (!kernels::available(backend)) continue;
        CAPTURE(kernels::backend_name(backend));
        for (std::size_t n : {0, 1, 2, 3, 5, 7, 8, 9, 15, 16, 17, 31, 32, 33, 63, 64, 100, 257}) {
            auto a = random_f32(n, 7000 + n);
            auto b = random_f32(n, 9000 + n);
            double ref = ref_dot(a.data(), b.data(), n);
            kernels::select(kernels::Backend::scalar);
            float s_dot = kernels::dot_f32(a.data(), b.data(), n);
            float s_sq = kernels::sqdist_f32(a.data(), b.data(), n);
            kernels::select(backend);
            float v_dot = kernels::dot_f32(a.data(), b.data(), n);
            float v_sq = kernels::sqdist_f32(a.data(), b.data(), n);
            double scale = std::max(1.0, std::abs(ref));
            CHECK(std::abs(double(v_dot) - double(s_dot)) / scale < 1e-5);
            CHECK(std::abs(double(v_sq) - double(s_sq)) / std::max(1.0, double(s_sq)) < 1e-5);

            auto ad = random_f64(n, 100 + n);
            auto bd = random_f64(n, 200 + n);
            kernels::select(kernels::Backend::scalar);
            double sd = kernels::dot_f64(ad.data(), bd.data(), n);
            double ss = kernels::sqdist_f64(ad.data(), bd.data(), n);
            kernels::select(backend);
            double vd = kernels::dot_f64(ad.data(), bd.data(), n);
            double vs = kernels::sqdist_f64(ad.data(), bd.data(), n);
            CHECK(std::abs(vd - sd) / std::max(1.0, std::abs(sd)) < 1e-12);
            CHECK(std::abs(vs - ss) / std::max(1.0, ss) < 1e-12);

            auto x = random_f64(n, 300 + n);
            auto y0 = random_f64(n, 400 + n);
            auto y1 = y0;
            kernels::select(kernels::Backend::scalar);
            kernels::axpy_f64(0.37, x.data(), y0.data(), n);
            kernels::select(backend);
            kernels::axpy_f64(0.37, x.data(), y1.data(), n);
            for (std::size_t i = 0; i < n; ++i) {
                CHECK(std::abs(y0[i] - y1[i]) < 1e-12);
            }
        }
    }
}

TEST_CASE("neighbor ranking agrees between backends on random data") {
    if (!kernels::available(kernels::Backend::avx2) &&
        !kernels::available(kernels::Backend::neon)) {
        return;
    }
    BackendGuard guard;
    auto set = testutil::random_set(120, 13, 42);
    kernels::select(kernels::Backend::scalar);
    auto scalar_mined = compute_neighborhoods(set, 5, 20, 1);
    kernels::Backend vec = kernels::available(kernels::Backend::avx2) ? kernels::Backend::avx2
                                                                      : kernels::Backend::neon;
    kernels::select(vec);
    auto vec_mined = compute_neighborhoods(set, 5, 20, 1);
    for (std::uint32_t i = 0; i < set.n; ++i) {
        CHECK(scalar_mined.items[i].positives == vec_mined.items[i].positives);
        CHECK(scalar_mined.items[i].negative_tiebreak == vec_mined.items[i].negative_tiebreak);
        CHECK(std::abs(scalar_mined.items[i].negative_radius -
                       vec_mined.items[i].negative_radius) /
                  std::max(1.0f, scalar_mined.items[i].negative_radius) <
              1e-5);
    }
}

TEST_CASE("selecting an unavailable backend throws") {
    if (!kernels::available(kernels::Backend::neon)) {
        CHECK_THROWS(kernels::select(kernels::Backend::neon));
    }
    if (!kernels::available(kernels::Backend::avx2)) {
        CHECK_THROWS(kernels::select(kernels::Backend::avx2));
    }
}
