#pragma once
// Embedding datasets, GCD split specifications, and the synthetic
// Gaussian-mixture generator. The only module that touches persistent
// data; everything downstream works on in-memory matrices.

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace unic {

// N x dim row-major matrix of finite floats with optional integer labels.
// A label >= 0 is a class id, -1 means unknown; an empty labels vector
// means no labels at all. Immutable by convention once built: share
// read-only across threads.
struct EmbeddingSet {
    std::uint32_t n = 0;
    std::uint32_t dim = 0;
    std::vector<float> data;         // n * dim, sample i in row i
    std::vector<std::int32_t> labels;  // empty or length n

    bool has_labels() const { return !labels.empty(); }
    const float* row(std::uint32_t i) const { return data.data() + std::size_t(i) * dim; }
    float* row(std::uint32_t i) { return data.data() + std::size_t(i) * dim; }

    // Throws std::invalid_argument on any invariant violation.
    void validate() const;
};

// GCD supervision structure: which samples are labeled and how the class
// set is partitioned into Old (partially labeled) and New (unlabeled).
struct SplitSpec {
    std::vector<std::uint8_t> labeled_mask;  // length n, 1 = labeled
    std::set<std::int32_t> old_classes;
    std::set<std::int32_t> new_classes;

    std::size_t labeled_count() const;
    void validate(const EmbeddingSet& set) const;
};

struct MixtureParams {
    std::uint32_t k = 10;
    std::uint32_t dim = 32;
    std::uint32_t n = 2000;
    double separation = 6.0;  // min distance between component means, in unit stds
    std::uint64_t seed = 0;
    double labeled_fraction = 0.0;
    double old_class_fraction = 0.0;
};

// UNICEMB1 binary format. Round-trips bit-exactly.
void write_embeddings(const EmbeddingSet& set, const std::string& path);
EmbeddingSet read_embeddings(const std::string& path);

// CSV import: one row per sample, comma-separated floats, optionally a
// final integer label column. Rejected above 10^4 rows.
EmbeddingSet read_embeddings_csv(const std::string& path, bool with_labels);

// Split files are flat JSON ({"labeled_mask":[0,1,...],"old_classes":[...],
// "new_classes":[...]}).
void write_split(const SplitSpec& split, const std::string& path);
SplitSpec read_split(const std::string& path, std::uint32_t expected_n);

// Synthetic benchmark data: k isotropic unit-variance Gaussian components
// whose means are a seeded random configuration rescaled so the minimum
// pairwise distance equals `separation`. Labels are component ids, class
// sizes as equal as floor/remainder allows. Pure function of params.
std::pair<EmbeddingSet, SplitSpec> generate_gaussian_mixture(const MixtureParams& params);

// Marks ceil(old_class_fraction * k) classes Old and labels
// floor(labeled_fraction * class size) samples of each Old class,
// both chosen by seeded RNG.
SplitSpec make_gcd_split(const EmbeddingSet& set, double old_class_fraction,
                         double labeled_fraction, std::uint64_t seed);

}  // namespace unic
