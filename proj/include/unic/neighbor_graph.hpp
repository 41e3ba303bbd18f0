#pragma once
// Training supervision graph: second-order cleaning of mined positives,
// positive/negative sampling with optional GCD label substitution,
// neighbor statistics, and UNICNBR1 persistence.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "unic/embedding.hpp"
#include "unic/knn.hpp"

namespace unic {

// Per-anchor record. The raw mined list is kept even for cleaned anchors
// so samplers can be configured to bypass cleaning; the cleaned view is
// self-only whenever was_cleaned is set.
struct AnchorNeighbors {
    std::vector<std::uint32_t> mined;  // tau1 indices, anchor first
    bool was_cleaned = false;
    std::uint32_t union_size = 0;      // second-order union cardinality
    float negative_radius = 0.0f;
    std::uint32_t negative_tiebreak = 0;
};

struct NeighborIndex {
    std::uint32_t tau1 = 0;
    std::uint32_t tau2 = 0;
    std::uint32_t eta = 0;
    std::vector<AnchorNeighbors> anchors;

    std::uint32_t n() const { return static_cast<std::uint32_t>(anchors.size()); }

    // The post-cleaning positive list: the mined list, or [anchor] when
    // the anchor was cleaned.
    std::vector<std::uint32_t> cleaned_positives(std::uint32_t anchor) const;

    RankedNeighborhood ranked(std::uint32_t anchor) const;

    double removed_fraction() const;
};

std::uint32_t second_order_union_size(const MinedNeighborhoods& mined, std::uint32_t anchor);

// Discards the mined positives of every anchor whose second-order union
// exceeds eta (the anchor keeps only itself); unions are computed over
// the raw mined lists.
NeighborIndex clean(const MinedNeighborhoods& mined, std::uint32_t eta);

void write_index(const NeighborIndex& index, const std::string& path);
// expected_n = 0 skips the pairing check.
NeighborIndex read_index(const std::string& path, std::uint32_t expected_n = 0);

enum class Mode { cluster, gcd };
enum class PositiveSource { labeled, mined, cleaned };
enum class NegativeSource { labeled, mined, random_any };

struct SupervisionConfig {
    Mode mode = Mode::cluster;
    PositiveSource positive_source_labeled = PositiveSource::labeled;
    PositiveSource positive_source_unlabeled = PositiveSource::cleaned;
    NegativeSource negative_source_labeled = NegativeSource::mined;
    NegativeSource negative_source_unlabeled = NegativeSource::mined;
    double labeled_negative_fraction = 0.5;  // alpha

    void validate() const;
};

// Draws positive/negative training partners for anchors. Single-threaded
// per RNG handle; distinct handles may run concurrently.
class NeighborSampler {
public:
    // split may be null in cluster mode; set and index must outlive the
    // sampler.
    NeighborSampler(const EmbeddingSet& set, const NeighborIndex& index,
                    const SplitSpec* split, const SupervisionConfig& cfg);

    std::uint32_t sample_positive(std::uint32_t anchor, std::mt19937_64& rng) const;
    std::uint32_t sample_negative(std::uint32_t anchor, std::mt19937_64& rng) const;

    bool anchor_labeled(std::uint32_t anchor) const;

private:
    const EmbeddingSet& set_;
    const NeighborIndex& index_;
    const SplitSpec* split_;
    SupervisionConfig cfg_;
    std::vector<std::vector<std::uint32_t>> labeled_by_class_;  // dense class slot -> samples
    std::vector<std::int32_t> class_slot_;                      // sample -> dense slot or -1
    std::size_t labeled_total_ = 0;

    std::uint32_t draw_mined_negative(std::uint32_t anchor, std::mt19937_64& rng) const;
    std::uint32_t draw_random_negative(std::uint32_t anchor, std::mt19937_64& rng) const;
};

// Statistics behind the cleaning-threshold diagnostics: per-eta removal
// fraction and mined-positive purity of retained vs removed anchors
// (self excluded from purity).
struct NeighborStatsRow {
    std::uint32_t eta;
    double removed_fraction;
    double retained_purity;  // NaN when no anchor retained
    double removed_purity;   // NaN when no anchor removed
};

struct NeighborStats {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> union_histogram;  // (size, count)
    std::vector<NeighborStatsRow> rows;

    std::string to_csv() const;  // header: eta,removed_fraction,retained_purity,removed_purity
};

// etas: explicit sweep points; empty picks `sweep_points` quantiles of the
// observed union sizes.
NeighborStats neighbor_stats(const NeighborIndex& index, const EmbeddingSet& set,
                             std::vector<std::uint32_t> etas = {},
                             std::size_t sweep_points = 10);

}  // namespace unic
