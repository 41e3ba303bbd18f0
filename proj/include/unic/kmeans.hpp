#pragma once
// k-means baseline: k-means++ seeding, Lloyd iterations, best of several
// restarts. Deterministic given the seed; restarts use independent RNG
// streams and may run concurrently.

#include <cstdint>
#include <vector>

#include "unic/embedding.hpp"

namespace unic {

struct KMeansResult {
    std::vector<double> centroids;          // k x dim row-major
    std::vector<std::int32_t> assignments;  // length n
    double inertia = 0.0;
    std::uint32_t iterations = 0;
    std::uint32_t best_restart = 0;
    std::vector<double> inertia_history;  // per Lloyd iteration of the winning restart
};

KMeansResult kmeans(const EmbeddingSet& set, std::uint32_t k, std::uint64_t seed,
                    std::uint32_t restarts = 10, std::uint32_t max_iter = 300,
                    double tol = 1e-6, unsigned threads = 0);

}  // namespace unic
