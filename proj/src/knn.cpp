#include "unic/knn.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>

#include "unic/kernels.hpp"
#include "unic/parallel.hpp"

namespace unic {

namespace {

struct Key {
    float dist;
    std::uint32_t index;
    bool operator<(const Key& o) const {
        if (dist != o.dist) return dist < o.dist;
        return index < o.index;
    }
};

std::vector<float> row_norms(const EmbeddingSet& set) {
    std::vector<float> norms(set.n);
    for (std::uint32_t i = 0; i < set.n; ++i) {
        norms[i] = kernels::dot_f32(set.row(i), set.row(i), set.dim);
    }
    return norms;
}

inline float expansion_distance(const EmbeddingSet& set, const std::vector<float>& norms,
                                std::uint32_t i, std::uint32_t j) {
    float d2 = norms[i] + norms[j] - 2.0f * kernels::dot_f32(set.row(i), set.row(j), set.dim);
    if (d2 < 0.0f) d2 = 0.0f;
    return std::sqrt(d2);
}

// Keys for one anchor against the whole set, anchor pinned first with a
// sentinel distance so it sorts ahead of exact duplicates.
void fill_keys(const EmbeddingSet& set, const std::vector<float>& norms,
               std::uint32_t anchor, std::vector<Key>& keys) {
    keys.resize(set.n);
    for (std::uint32_t j = 0; j < set.n; ++j) {
        keys[j] = {expansion_distance(set, norms, anchor, j), j};
    }
    keys[anchor].dist = -1.0f;
}

}  // namespace

float ranking_distance(const EmbeddingSet& set, std::uint32_t i, std::uint32_t j) {
    float ni = kernels::dot_f32(set.row(i), set.row(i), set.dim);
    float nj = kernels::dot_f32(set.row(j), set.row(j), set.dim);
    float d2 = ni + nj - 2.0f * kernels::dot_f32(set.row(i), set.row(j), set.dim);
    if (d2 < 0.0f) d2 = 0.0f;
    return std::sqrt(d2);
}

MinedNeighborhoods compute_neighborhoods(const EmbeddingSet& set, std::uint32_t tau1,
                                         std::uint32_t tau2, unsigned threads) {
    set.validate();
    if (!(0 < tau1 && tau1 < tau2 && tau2 <= set.n)) {
        throw std::invalid_argument("tau constraints violated: need 0 < tau1 < tau2 <= n");
    }
    MinedNeighborhoods out;
    out.tau1 = tau1;
    out.tau2 = tau2;
    out.items.resize(set.n);
    std::vector<float> norms = row_norms(set);

    parallel_chunks(set.n, threads, [&](std::size_t begin, std::size_t end) {
        std::vector<Key> keys;
        for (std::size_t a = begin; a < end; ++a) {
            auto anchor = static_cast<std::uint32_t>(a);
            fill_keys(set, norms, anchor, keys);
            std::partial_sort(keys.begin(), keys.begin() + tau2, keys.end());
            RankedNeighborhood& nb = out.items[a];
            nb.anchor = anchor;
            nb.positives.resize(tau1);
            for (std::uint32_t r = 0; r < tau1; ++r) nb.positives[r] = keys[r].index;
            nb.negative_radius = keys[tau2 - 1].dist;
            nb.negative_tiebreak = keys[tau2 - 1].index;
        }
    });
    return out;
}

bool is_negative(const EmbeddingSet& set, const RankedNeighborhood& nb, std::uint32_t j) {
    return is_negative(set, nb.anchor, nb.negative_radius, nb.negative_tiebreak, j);
}

bool is_negative(const EmbeddingSet& set, std::uint32_t anchor, float negative_radius,
                 std::uint32_t negative_tiebreak, std::uint32_t j) {
    if (j >= set.n) throw std::invalid_argument("sample index out of range");
    if (j == anchor) return false;
    Key key{ranking_distance(set, anchor, j), j};
    Key boundary{negative_radius, negative_tiebreak};
    return boundary < key;
}

std::vector<std::pair<double, double>> neighbor_accuracy_curve(const EmbeddingSet& set,
                                                               std::uint32_t stride,
                                                               unsigned threads) {
    set.validate();
    if (!set.has_labels()) throw std::invalid_argument("missing labels");
    if (stride == 0) stride = 1;

    std::vector<std::uint32_t> ranks;
    for (std::uint32_t r = 0; r < set.n; r += stride) ranks.push_back(r);

    std::vector<float> norms = row_norms(set);
    // Integer hit counts; the merged sums do not depend on the chunking.
    std::vector<std::atomic<std::uint64_t>> hits(ranks.size());
    for (auto& h : hits) h.store(0, std::memory_order_relaxed);

    parallel_chunks(set.n, threads, [&](std::size_t begin, std::size_t end) {
        std::vector<Key> keys;
        std::vector<std::uint64_t> local(ranks.size(), 0);
        for (std::size_t a = begin; a < end; ++a) {
            auto anchor = static_cast<std::uint32_t>(a);
            fill_keys(set, norms, anchor, keys);
            std::sort(keys.begin(), keys.end());
            for (std::size_t ri = 0; ri < ranks.size(); ++ri) {
                if (set.labels[keys[ranks[ri]].index] == set.labels[anchor]) ++local[ri];
            }
        }
        for (std::size_t ri = 0; ri < ranks.size(); ++ri) {
            hits[ri].fetch_add(local[ri], std::memory_order_relaxed);
        }
    });

    std::vector<std::pair<double, double>> curve(ranks.size());
    for (std::size_t ri = 0; ri < ranks.size(); ++ri) {
        curve[ri] = {static_cast<double>(ranks[ri]) / set.n,
                     static_cast<double>(hits[ri].load()) / set.n};
    }
    return curve;
}

double positive_purity(const MinedNeighborhoods& mined, const EmbeddingSet& set) {
    if (!set.has_labels()) throw std::invalid_argument("missing labels");
    double sum = 0.0;
    std::size_t counted = 0;
    for (const auto& nb : mined.items) {
        if (nb.positives.size() <= 1) continue;
        std::size_t same = 0;
        for (std::size_t r = 1; r < nb.positives.size(); ++r) {
            if (set.labels[nb.positives[r]] == set.labels[nb.anchor]) ++same;
        }
        sum += static_cast<double>(same) / static_cast<double>(nb.positives.size() - 1);
        ++counted;
    }
    return counted ? sum / static_cast<double>(counted) : 0.0;
}

}  // namespace unic
