#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "unic/kmeans.hpp"
#include "unic/metrics.hpp"
#include "test_util.hpp"

using namespace unic;

TEST_CASE("k = 1 recovers the mean and total variance") {
    auto set = testutil::random_set(200, 5, 3);
    KMeansResult result = kmeans(set, 1, 0, 2, 50);
    std::vector<double> mean(set.dim, 0.0);
    for (std::uint32_t i = 0; i < set.n; ++i) {
        for (std::uint32_t d = 0; d < set.dim; ++d) mean[d] += set.row(i)[d];
    }
    double expected_inertia = 0.0;
    for (auto& m : mean) m /= set.n;
    for (std::uint32_t i = 0; i < set.n; ++i) {
        for (std::uint32_t d = 0; d < set.dim; ++d) {
            double diff = set.row(i)[d] - mean[d];
            expected_inertia += diff * diff;
        }
    }
    for (std::uint32_t d = 0; d < set.dim; ++d) {
        CHECK(result.centroids[d] == doctest::Approx(mean[d]).epsilon(1e-9));
    }
    CHECK(result.inertia == doctest::Approx(expected_inertia).epsilon(1e-9));
}

TEST_CASE("two separated 1-D blobs recovered exactly") {
    EmbeddingSet set = testutil::from_rows(
        {{0.0f}, {0.1f}, {0.2f}, {10.0f}, {10.1f}, {10.2f}}, {0, 0, 0, 1, 1, 1});
    KMeansResult result = kmeans(set, 2, 7, 5, 100);
    auto [acc, matching] = clustering_accuracy(result.assignments, set.labels, 2);
    CHECK(acc == doctest::Approx(1.0));
    double lo = std::min(result.centroids[0], result.centroids[1]);
    double hi = std::max(result.centroids[0], result.centroids[1]);
    CHECK(lo == doctest::Approx(0.1));
    CHECK(hi == doctest::Approx(10.1));
}

TEST_CASE("k = n drives inertia to zero") {
    auto set = testutil::random_set(12, 3, 9);
    KMeansResult result = kmeans(set, 12, 1, 3, 50);
    CHECK(result.inertia == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("inertia nonincreasing within the winning restart") {
    auto set = testutil::random_set(300, 6, 11);
    KMeansResult result = kmeans(set, 5, 2, 4, 100);
    for (std::size_t i = 1; i < result.inertia_history.size(); ++i) {
        CHECK(result.inertia_history[i] <=
              result.inertia_history[i - 1] * (1.0 + 1e-12) + 1e-9);
    }
}

TEST_CASE("more restarts never hurt") {
    auto set = testutil::random_set(250, 4, 13);
    double ten = kmeans(set, 6, 3, 10, 100).inertia;
    double one = kmeans(set, 6, 3, 1, 100).inertia;
    CHECK(ten <= one + 1e-9);
}

TEST_CASE("deterministic under seed") {
    auto set = testutil::random_set(150, 4, 17);
    KMeansResult a = kmeans(set, 4, 9, 6, 100);
    KMeansResult b = kmeans(set, 4, 9, 6, 100);
    CHECK(a.assignments == b.assignments);
    CHECK(a.centroids == b.centroids);
    CHECK(a.inertia == b.inertia);
    KMeansResult c = kmeans(set, 4, 10, 6, 100);
    CHECK((a.assignments != c.assignments || a.inertia != c.inertia));
}

TEST_CASE("n < k rejected") {
    auto set = testutil::random_set(3, 2, 1);
    CHECK_THROWS_AS(kmeans(set, 4, 0), std::invalid_argument);
}

TEST_CASE("thread count does not change the outcome") {
    auto set = testutil::random_set(200, 5, 19);
    KMeansResult a = kmeans(set, 4, 5, 8, 100, 1e-6, 1);
    KMeansResult b = kmeans(set, 4, 5, 8, 100, 1e-6, 4);
    CHECK(a.assignments == b.assignments);
    CHECK(a.inertia == b.inertia);
}
