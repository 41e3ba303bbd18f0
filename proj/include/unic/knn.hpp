#pragma once
// Exact brute-force Euclidean neighbor ranking. Per anchor, the full
// sample set is ordered by the key (distance, index) with the anchor
// pinned at rank 0; the first tau1 entries are the mined positives and
// the entry at rank tau2-1 defines the boundary of the negative set.

#include <cstdint>
#include <vector>

#include "unic/embedding.hpp"

namespace unic {

struct RankedNeighborhood {
    std::uint32_t anchor = 0;
    std::vector<std::uint32_t> positives;  // tau1 indices, anchor first
    float negative_radius = 0.0f;          // distance at rank tau2-1
    std::uint32_t negative_tiebreak = 0;   // index at rank tau2-1
};

struct MinedNeighborhoods {
    std::uint32_t tau1 = 0;
    std::uint32_t tau2 = 0;
    std::vector<RankedNeighborhood> items;
};

// Squared distance and ranking key as the engine computes them:
// d2 = |a|^2 + |b|^2 - 2<a,b> via the active kernel, clamped at zero.
float ranking_distance(const EmbeddingSet& set, std::uint32_t i, std::uint32_t j);

// Requires 0 < tau1 < tau2 <= n. Deterministic and independent of the
// worker count (threads = 0 picks hardware concurrency).
MinedNeighborhoods compute_neighborhoods(const EmbeddingSet& set, std::uint32_t tau1,
                                         std::uint32_t tau2, unsigned threads = 0);

// True iff j ranks at or beyond tau2 in the anchor's ordering, i.e.
// (distance, j) is lexicographically past the stored boundary.
bool is_negative(const EmbeddingSet& set, const RankedNeighborhood& nb, std::uint32_t j);
bool is_negative(const EmbeddingSet& set, std::uint32_t anchor, float negative_radius,
                 std::uint32_t negative_tiebreak, std::uint32_t j);

// Same-class rate by neighbor rank (Euclidean ordering, self at rank 0),
// sampled every `stride` ranks. Returns (rank/n, rate) pairs.
std::vector<std::pair<double, double>> neighbor_accuracy_curve(const EmbeddingSet& set,
                                                               std::uint32_t stride,
                                                               unsigned threads = 0);

// Fraction of mined positives (self excluded) sharing the anchor's class,
// averaged over anchors. Diagnostic printed by the CLI after gen/mine.
double positive_purity(const MinedNeighborhoods& mined, const EmbeddingSet& set);

}  // namespace unic
