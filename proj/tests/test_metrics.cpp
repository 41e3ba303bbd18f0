#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "unic/metrics.hpp"
#include "test_util.hpp"

using namespace unic;

namespace {

std::vector<std::int32_t> random_partition(std::size_t n, std::int32_t k, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::int32_t> d(0, k - 1);
    std::vector<std::int32_t> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

double assignment_cost(const std::vector<double>& cost, std::size_t k,
                       const std::vector<std::int32_t>& sigma) {
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) total += cost[i * k + sigma[i]];
    return total;
}

}  // namespace

TEST_CASE("hungarian picks the obvious assignments") {
    std::vector<double> identity{0, 1, 1, 1, 0, 1, 1, 1, 0};
    CHECK(hungarian(identity, 3) == std::vector<std::int32_t>{0, 1, 2});
    std::vector<double> swap{1, 0, 0, 1};
    CHECK(hungarian(swap, 2) == std::vector<std::int32_t>{1, 0});
}

TEST_CASE("hungarian equals exhaustive search with lexicographic ties") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> cost_d(0, 6);  // small ints force ties
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t k = 2 + trial % 5;
        std::vector<double> cost(k * k);
        for (auto& c : cost) c = cost_d(rng);
        auto got = hungarian(cost, k);
        auto [best_total, best_perm] = testutil::brute_force_assignment(cost, k);
        CHECK(assignment_cost(cost, k, got) == best_total);
        CHECK(got == best_perm);
    }
}

TEST_CASE("hungarian on real-valued costs matches brute force") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> cost_d(-5.0, 5.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t k = 2 + trial % 5;
        std::vector<double> cost(k * k);
        for (auto& c : cost) c = cost_d(rng);
        auto got = hungarian(cost, k);
        auto [best_total, best_perm] = testutil::brute_force_assignment(cost, k);
        CHECK(assignment_cost(cost, k, got) == doctest::Approx(best_total).epsilon(1e-12));
        CHECK(got == best_perm);
    }
}

TEST_CASE("hungarian beats random permutations") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> cost_d(0.0, 10.0);
    std::size_t k = 8;
    std::vector<double> cost(k * k);
    for (auto& c : cost) c = cost_d(rng);
    auto got = hungarian(cost, k);
    double best = assignment_cost(cost, k, got);
    std::vector<std::int32_t> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    for (int trial = 0; trial < 1000; ++trial) {
        std::shuffle(perm.begin(), perm.end(), rng);
        CHECK(best <= assignment_cost(cost, k, perm));
    }
}

TEST_CASE("hungarian rejects bad input") {
    CHECK_THROWS_AS(hungarian({1.0, 2.0, 3.0}, 2), std::invalid_argument);
    CHECK_THROWS_AS(hungarian({1.0, std::nan(""), 0.0, 1.0}, 2), std::invalid_argument);
    CHECK_THROWS_AS(hungarian({}, 0), std::invalid_argument);
}

TEST_CASE("clustering accuracy basics") {
    std::vector<std::int32_t> truth{0, 0, 1, 1, 2, 2};
    auto [acc1, m1] = clustering_accuracy(truth, truth, 3);
    CHECK(acc1 == doctest::Approx(1.0));

    std::vector<std::int32_t> relabeled{2, 2, 0, 0, 1, 1};
    auto [acc2, m2] = clustering_accuracy(relabeled, truth, 3);
    CHECK(acc2 == doctest::Approx(1.0));
    CHECK(m2 == std::vector<std::int32_t>{1, 2, 0});
}

TEST_CASE("clustering accuracy on the 2x2 confusion example") {
    // confusion [[3,1],[2,4]]: identity matching keeps 7 of 10
    std::vector<std::int32_t> pred, truth;
    auto add = [&](std::int32_t p, std::int32_t t, int count) {
        for (int i = 0; i < count; ++i) {
            pred.push_back(p);
            truth.push_back(t);
        }
    };
    add(0, 0, 3);
    add(0, 1, 1);
    add(1, 0, 2);
    add(1, 1, 4);
    auto [acc, matching] = clustering_accuracy(pred, truth, 2);
    CHECK(acc == doctest::Approx(0.7));
    CHECK(matching == std::vector<std::int32_t>{0, 1});
}

TEST_CASE("clustering accuracy validates ids") {
    CHECK_THROWS_AS(clustering_accuracy({0, 3}, {0, 1}, 2), std::invalid_argument);
    CHECK_THROWS_AS(clustering_accuracy({0, -1}, {0, 1}, 2), std::invalid_argument);
}

TEST_CASE("nmi endpoints") {
    CHECK(nmi({0, 0, 1, 1, 2}, {4, 4, 7, 7, 9}) == doctest::Approx(1.0));
    CHECK(nmi({0, 0, 0, 0}, {0, 1, 0, 1}) == doctest::Approx(0.0));
    CHECK(nmi({0, 0, 1, 1}, {0, 1, 0, 1}) == doctest::Approx(0.0));
    CHECK(nmi({5, 5, 5}, {5, 5, 5}) == doctest::Approx(1.0));  // both trivial
}

TEST_CASE("ari matches the direct pair-count oracle") {
    CHECK(ari({0, 0, 1, 1}, {0, 0, 1, 1}) == doctest::Approx(1.0));
    // the adjusted (expected-index corrected) value for this pair is -1/2
    double spec_pair = ari({0, 0, 1, 1}, {0, 1, 0, 1});
    CHECK(spec_pair == doctest::Approx(testutil::pairwise_ari({0, 0, 1, 1}, {0, 1, 0, 1})));
    CHECK(spec_pair == doctest::Approx(-0.5));

    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        std::size_t n = 10 + rng() % 40;
        auto pred = random_partition(n, 3, rng());
        auto truth = random_partition(n, 4, rng());
        CHECK(ari(pred, truth) ==
              doctest::Approx(testutil::pairwise_ari(pred, truth)).epsilon(1e-12));
    }
}

TEST_CASE("ari of independent partitions is centered on zero") {
    double sum = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto pred = random_partition(1000, 2, 2 * seed);
        auto truth = random_partition(1000, 2, 2 * seed + 1);
        sum += ari(pred, truth);
    }
    CHECK(std::abs(sum / 100.0) < 0.02);
}

TEST_CASE("ari degenerate identical partitions score one") {
    CHECK(ari({0, 0, 0}, {1, 1, 1}) == doctest::Approx(1.0));
    CHECK(ari({0, 1, 2}, {2, 1, 0}) == doctest::Approx(1.0));  // all singletons
}

TEST_CASE("metrics are invariant under relabeling") {
    std::mt19937_64 rng(13);
    auto pred = random_partition(200, 5, 1);
    auto truth = random_partition(200, 5, 2);
    std::vector<std::int32_t> perm{3, 0, 4, 2, 1};
    std::vector<std::int32_t> pred2(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) pred2[i] = perm[pred[i]];
    CHECK(clustering_accuracy(pred, truth, 5).first ==
          doctest::Approx(clustering_accuracy(pred2, truth, 5).first));
    CHECK(nmi(pred, truth) == doctest::Approx(nmi(pred2, truth)));
    CHECK(ari(pred, truth) == doctest::Approx(ari(pred2, truth)));
}

TEST_CASE("metric ranges") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        auto pred = random_partition(60, 4, rng());
        auto truth = random_partition(60, 4, rng());
        auto [acc, m] = clustering_accuracy(pred, truth, 4);
        CHECK(acc >= 0.0);
        CHECK(acc <= 1.0);
        double v = nmi(pred, truth);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        CHECK(ari(pred, truth) <= 1.0);
    }
}

TEST_CASE("gcd toy split: one wrong new-class sample") {
    // classes 0,1 old; 2,3 new; 4 unlabeled samples per class plus a
    // couple of labeled old-class samples.
    SplitSpec split;
    split.old_classes = {0, 1};
    split.new_classes = {2, 3};
    std::vector<std::int32_t> truth, pred;
    for (std::int32_t c = 0; c < 4; ++c) {
        for (int i = 0; i < 4; ++i) {
            truth.push_back(c);
            pred.push_back(c);
        }
    }
    // labeled extras (one per old class)
    truth.push_back(0);
    pred.push_back(0);
    truth.push_back(1);
    pred.push_back(1);
    split.labeled_mask.assign(truth.size(), 0);
    split.labeled_mask[16] = 1;
    split.labeled_mask[17] = 1;
    pred[15] = 2;  // mispredict one class-3 sample

    MetricsReport rep = gcd_report(pred, truth, split, 4);
    CHECK(rep.acc_old == doctest::Approx(1.0));
    CHECK(rep.acc_new == doctest::Approx(7.0 / 8.0));
    CHECK(rep.acc_all == doctest::Approx(15.0 / 16.0));
    // exact integer consistency
    CHECK(rep.acc_all * 16.0 == rep.acc_old * 8.0 + rep.acc_new * 8.0);
}

TEST_CASE("gcd matching absorbs wholesale relabeling") {
    SplitSpec split;
    split.old_classes = {0, 1};
    split.new_classes = {2, 3};
    std::vector<std::int32_t> truth, pred;
    for (std::int32_t c = 0; c < 4; ++c) {
        for (int i = 0; i < 5; ++i) {
            truth.push_back(c);
            pred.push_back((c + 2) % 4);  // swap old and new blocks
        }
    }
    split.labeled_mask.assign(truth.size(), 0);
    MetricsReport rep = gcd_report(pred, truth, split, 4);
    CHECK(rep.acc_all == doctest::Approx(1.0));
    CHECK(rep.acc_old == doctest::Approx(1.0));
    CHECK(rep.acc_new == doctest::Approx(1.0));
}

TEST_CASE("gcd report needs unlabeled samples") {
    SplitSpec split;
    split.old_classes = {0};
    split.labeled_mask = {1, 1};
    CHECK_THROWS_AS(gcd_report({0, 0}, {0, 0}, split, 1), std::invalid_argument);
}

TEST_CASE("report json shape") {
    MetricsReport rep = cluster_report({0, 1, 0, 1}, {1, 0, 1, 0}, 2);
    std::string j = rep.to_json();
    CHECK(j.find("\"acc\":1.0") != std::string::npos);
    CHECK(j.find("\"acc_all\"") == std::string::npos);
    CHECK(j.find("\"matching\":[1,0]") != std::string::npos);
}
