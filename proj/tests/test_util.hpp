#pragma once
// Shared test fixtures and independent oracles. Oracles deliberately take
// the straightforward road (full sorts, exhaustive permutations, direct
// pair counting) so they stay decoupled from the library's fast paths.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <random>
#include <unistd.h>
#include <vector>

#include "unic/embedding.hpp"
#include "unic/kernels.hpp"
#include "unic/knn.hpp"

namespace testutil {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("unic_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

inline unic::EmbeddingSet random_set(std::uint32_t n, std::uint32_t dim, std::uint64_t seed,
                                     bool with_labels = false, std::int32_t classes = 4) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> normal(0.0f, 1.0f);
    unic::EmbeddingSet set;
    set.n = n;
    set.dim = dim;
    set.data.resize(std::size_t(n) * dim);
    for (float& v : set.data) v = normal(rng);
    if (with_labels) {
        std::uniform_int_distribution<std::int32_t> lab(0, classes - 1);
        set.labels.resize(n);
        for (auto& l : set.labels) l = lab(rng);
    }
    return set;
}

inline unic::EmbeddingSet from_rows(const std::vector<std::vector<float>>& rows,
                                    std::vector<std::int32_t> labels = {}) {
    unic::EmbeddingSet set;
    set.n = static_cast<std::uint32_t>(rows.size());
    set.dim = static_cast<std::uint32_t>(rows.front().size());
    for (const auto& r : rows) set.data.insert(set.data.end(), r.begin(), r.end());
    set.labels = std::move(labels);
    return set;
}

// Naive O(n^2 d) neighbor reference: recomputes every pairwise distance
// with the same elementary distance definition as the engine, pins the
// anchor first, and fully sorts. No precomputation, no top-k selection,
// no threading.
inline unic::MinedNeighborhoods naive_neighborhoods(const unic::EmbeddingSet& set,
                                                    std::uint32_t tau1, std::uint32_t tau2) {
    unic::MinedNeighborhoods out;
    out.tau1 = tau1;
    out.tau2 = tau2;
    out.items.resize(set.n);
    for (std::uint32_t a = 0; a < set.n; ++a) {
        std::vector<std::pair<float, std::uint32_t>> keys(set.n);
        for (std::uint32_t j = 0; j < set.n; ++j) {
            keys[j] = {unic::ranking_distance(set, a, j), j};
        }
        keys[a].first = -1.0f;
        std::sort(keys.begin(), keys.end());
        unic::RankedNeighborhood& nb = out.items[a];
        nb.anchor = a;
        nb.positives.resize(tau1);
        for (std::uint32_t r = 0; r < tau1; ++r) nb.positives[r] = keys[r].second;
        nb.negative_radius = keys[tau2 - 1].first;
        nb.negative_tiebreak = keys[tau2 - 1].second;
    }
    return out;
}

// Exhaustive min-cost assignment for small K, lexicographically smallest
// among ties.
inline std::pair<double, std::vector<std::int32_t>> brute_force_assignment(
    const std::vector<double>& cost, std::size_t k) {
    std::vector<std::int32_t> perm(k), best;
    std::iota(perm.begin(), perm.end(), 0);
    double best_total = 0.0;
    bool first = true;
    do {
        double total = 0.0;
        for (std::size_t i = 0; i < k; ++i) total += cost[i * k + perm[i]];
        if (first || total < best_total) {
            best_total = total;
            best = perm;
            first = false;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return {best_total, best};
}

// Direct O(n^2) adjusted Rand index from the four pair-agreement counts.
inline double pairwise_ari(const std::vector<std::int32_t>& pred,
                           const std::vector<std::int32_t>& truth) {
    double a = 0, b = 0, c = 0, d = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        for (std::size_t j = i + 1; j < pred.size(); ++j) {
            bool sp = pred[i] == pred[j], st = truth[i] == truth[j];
            if (sp && st) a += 1;
            else if (sp) b += 1;
            else if (st) c += 1;
            else d += 1;
        }
    }
    double num = 2.0 * (a * d - b * c);
    double den = (a + b) * (b + d) + (a + c) * (c + d);
    if (den == 0.0) return 1.0;
    return num / den;
}

}  // namespace testutil
