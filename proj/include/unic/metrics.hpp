#pragma once
// Clustering evaluation: optimal cluster-to-class matching, accuracy,
// NMI, ARI, and the GCD All/Old/New protocol.

#include <cstdint>
#include <string>
#include <vector>

#include "unic/embedding.hpp"

namespace unic {

struct MetricsReport {
    double acc = 0.0;
    double nmi = 0.0;
    double ari = 0.0;
    bool gcd = false;
    double acc_all = 0.0;
    double acc_old = 0.0;
    double acc_new = 0.0;
    std::vector<std::int32_t> matching;  // cluster id -> class id

    std::string to_json() const;
};

// Minimum-cost assignment on a square cost matrix (O(K^3) augmenting-path
// Kuhn-Munkres). Ties are broken toward the lexicographically smallest
// permutation; returns the column assigned to each row.
std::vector<std::int32_t> hungarian(const std::vector<double>& cost, std::size_t k);

// Confusion-matrix accuracy under the optimal matching. Ids must lie in
// [0, K).
std::pair<double, std::vector<std::int32_t>> clustering_accuracy(
    const std::vector<std::int32_t>& pred, const std::vector<std::int32_t>& truth,
    std::size_t k);

// Mutual information normalized by the arithmetic mean of the two
// entropies; two trivial partitions score 1.
double nmi(const std::vector<std::int32_t>& pred, const std::vector<std::int32_t>& truth);

// Adjusted Rand index (pair counts with expected-index correction).
double ari(const std::vector<std::int32_t>& pred, const std::vector<std::int32_t>& truth);

// Convenience: acc + nmi + ari + matching on the full vectors.
MetricsReport cluster_report(const std::vector<std::int32_t>& pred,
                             const std::vector<std::int32_t>& truth, std::size_t k);

// GCD protocol: restrict to unlabeled samples, compute one matching over
// all K classes on that restriction, then score All plus the Old/New
// subsets under that single matching.
MetricsReport gcd_report(const std::vector<std::int32_t>& pred,
                         const std::vector<std::int32_t>& truth, const SplitSpec& split,
                         std::size_t k);

}  // namespace unic
