#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "unic/kernels.hpp"
#include "unic/knn.hpp"
#include "test_util.hpp"

using namespace unic;

namespace {

EmbeddingSet line_points() {
    return testutil::from_rows({{0.0f}, {1.0f}, {2.0f}, {10.0f}});
}

void check_equal(const MinedNeighborhoods& a, const MinedNeighborhoods& b) {
    REQUIRE(a.items.size() == b.items.size());
    for (std::size_t i = 0; i < a.items.size(); ++i) {
        CHECK(a.items[i].positives == b.items[i].positives);
        CHECK(a.items[i].negative_radius == b.items[i].negative_radius);
        CHECK(a.items[i].negative_tiebreak == b.items[i].negative_tiebreak);
    }
}

}  // namespace

TEST_CASE("line example: positives, radius and negative membership") {
    EmbeddingSet set = line_points();
    auto mined = compute_neighborhoods(set, 2, 3, 1);
    const auto& nb0 = mined.items[0];
    CHECK(nb0.positives == std::vector<std::uint32_t>{0, 1});
    CHECK(nb0.negative_radius == doctest::Approx(2.0f));
    CHECK(nb0.negative_tiebreak == 2);
    CHECK(is_negative(set, nb0, 3));
    CHECK(!is_negative(set, nb0, 2));
    CHECK(!is_negative(set, nb0, 0));  // self is rank 0
    CHECK(!is_negative(set, nb0, 1));
}

TEST_CASE("tau1 = 1 keeps only the anchor") {
    auto set = testutil::random_set(20, 3, 1);
    auto mined = compute_neighborhoods(set, 1, 2, 1);
    for (std::uint32_t i = 0; i < set.n; ++i) {
        CHECK(mined.items[i].positives == std::vector<std::uint32_t>{i});
    }
}

TEST_CASE("duplicate points break ties by index with self pinned first") {
    EmbeddingSet set = testutil::from_rows({{1.0f, 1.0f}, {1.0f, 1.0f}, {5.0f, 5.0f}});
    auto mined = compute_neighborhoods(set, 2, 3, 1);
    CHECK(mined.items[0].positives == std::vector<std::uint32_t>{0, 1});
    // anchor 1 is its own closest neighbor even though 0 is an exact twin
    CHECK(mined.items[1].positives == std::vector<std::uint32_t>{1, 0});
}

TEST_CASE("all duplicates with tau2 = n leaves the negative set empty") {
    EmbeddingSet set = testutil::from_rows({{2.0f}, {2.0f}, {2.0f}, {2.0f}});
    auto mined = compute_neighborhoods(set, 2, 4, 1);
    for (std::uint32_t i = 0; i < set.n; ++i) {
        for (std::uint32_t j = 0; j < set.n; ++j) {
            CHECK(!is_negative(set, mined.items[i], j));
        }
    }
}

TEST_CASE("tau constraint violations and empty sets rejected") {
    auto set = testutil::random_set(10, 2, 2);
    CHECK_THROWS_AS(compute_neighborhoods(set, 0, 3, 1), std::invalid_argument);
    CHECK_THROWS_AS(compute_neighborhoods(set, 3, 3, 1), std::invalid_argument);
    CHECK_THROWS_AS(compute_neighborhoods(set, 3, 11, 1), std::invalid_argument);
}

TEST_CASE("oracle equivalence against the naive reference") {
    std::mt19937_64 rng(99);
    for (int inst = 0; inst < 12; ++inst) {
        std::uint32_t n = 20 + rng() % 120;
        std::uint32_t dim = 1 + rng() % 12;
        auto set = testutil::random_set(n, dim, rng());
        if (inst % 3 == 0) {
            // inject duplicate rows
            for (int d = 0; d < 5; ++d) {
                std::uint32_t from = rng() % n, to = rng() % n;
                std::copy_n(set.row(from), dim, set.row(to));
            }
        }
        std::uint32_t tau1 = 1 + rng() % (n / 2);
        std::uint32_t tau2 = tau1 + 1 + rng() % (n - tau1);
        auto fast = compute_neighborhoods(set, tau1, tau2, 2);
        auto naive = testutil::naive_neighborhoods(set, tau1, tau2);
        check_equal(fast, naive);
    }
}

TEST_CASE("results independent of worker count") {
    auto set = testutil::random_set(150, 8, 5);
    auto one = compute_neighborhoods(set, 7, 40, 1);
    auto four = compute_neighborhoods(set, 7, 40, 4);
    check_equal(one, four);
}

TEST_CASE("engine distance matches a plain scalar loop within 1e-5") {
    auto set = testutil::random_set(60, 9, 8);
    for (std::uint32_t i = 0; i < set.n; i += 7) {
        for (std::uint32_t j = 0; j < set.n; j += 5) {
            double acc = 0.0;
            for (std::uint32_t d = 0; d < set.dim; ++d) {
                double diff = double(set.row(i)[d]) - double(set.row(j)[d]);
                acc += diff * diff;
            }
            double ref = std::sqrt(acc);
            double got = ranking_distance(set, i, j);
            CHECK(std::abs(got - ref) <= 1e-5 * std::max(1.0, ref));
        }
    }
}

TEST_CASE("monotone cutoffs: larger tau2 shrinks the negative set") {
    auto set = testutil::random_set(80, 5, 13);
    auto small = compute_neighborhoods(set, 4, 20, 1);
    auto large = compute_neighborhoods(set, 4, 50, 1);
    for (std::uint32_t i = 0; i < set.n; ++i) {
        for (std::uint32_t j = 0; j < set.n; ++j) {
            if (is_negative(set, large.items[i], j)) {
                CHECK(is_negative(set, small.items[i], j));
            }
        }
    }
}

TEST_CASE("accuracy curve: separated two-class step shape") {
    MixtureParams params;
    params.k = 2;
    params.n = 100;
    params.dim = 4;
    params.separation = 50.0;
    params.seed = 21;
    auto [set, split] = generate_gaussian_mixture(params);
    auto curve = neighbor_accuracy_curve(set, 5, 2);
    for (const auto& [frac, rate] : curve) {
        if (frac < 0.49) CHECK(rate == doctest::Approx(1.0));
        if (frac > 0.51) CHECK(rate == doctest::Approx(0.0));
    }
}

TEST_CASE("accuracy curve: single class is flat at one") {
    auto set = testutil::random_set(50, 3, 4, true, 1);
    auto curve = neighbor_accuracy_curve(set, 7, 1);
    for (const auto& [frac, rate] : curve) CHECK(rate == doctest::Approx(1.0));
}

TEST_CASE("accuracy curve: random labels hover near 1/K") {
    auto set = testutil::random_set(2000, 6, 17, true, 10);
    auto curve = neighbor_accuracy_curve(set, 100, 2);
    for (std::size_t idx = 1; idx < curve.size(); ++idx) {  // skip self rank
        CHECK(std::abs(curve[idx].second - 0.1) < 0.05);
    }
}

TEST_CASE("accuracy curve requires labels") {
    auto set = testutil::random_set(10, 2, 3);
    CHECK_THROWS_AS(neighbor_accuracy_curve(set, 1, 1), std::invalid_argument);
}
