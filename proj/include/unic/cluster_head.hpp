#pragma once
// The clustering head: a two-layer MLP (or a single linear layer) mapping
// embeddings to K-way probabilities, the positive/negative/entropy losses,
// and exact analytic gradients for all parameters. Math runs in double;
// the UNICHEAD file stores f32 parameter blocks.

#include <cstdint>
#include <string>
#include <vector>

#include "unic/embedding.hpp"

namespace unic {

enum class HeadKind : std::uint8_t { mlp = 0, linear = 1 };

struct HeadParams {
    HeadKind kind = HeadKind::mlp;
    std::uint32_t dim = 0;
    std::uint32_t hidden = 0;  // 0 for linear
    std::uint32_t k = 0;
    // mlp: w1 is dim x hidden row-major, w2 is hidden x k row-major.
    // linear: w1 is dim x k, b1 has k entries, w2/b2 stay empty.
    std::vector<double> w1, b1, w2, b2;

    std::size_t parameter_count() const { return w1.size() + b1.size() + w2.size() + b2.size(); }
    void validate() const;
};

struct LossWeights {
    double lambda_pos = 1.0;
    double lambda_neg = 1.0;
    double lambda_ent = 3.0;

    void validate() const;
};

struct BatchGradients {
    std::vector<double> w1, b1, w2, b2;
    double loss_pos = 0.0;
    double loss_neg = 0.0;
    double loss_ent = 0.0;
    double total = 0.0;
};

// Seeded uniform(-sqrt(1/fan_in), +sqrt(1/fan_in)) weights, zero biases.
HeadParams init_head(HeadKind kind, std::uint32_t dim, std::uint32_t hidden, std::uint32_t k,
                     std::uint64_t seed);

// batch is m x dim row-major; returns m x k probabilities (rows sum to 1).
std::vector<double> forward(const HeadParams& params, const double* batch, std::size_t m);

// Row-level losses on probability rows of length k. Dot products are
// clamped to [eps, 1-eps] with eps = 1e-7 so exact one-hots stay finite.
double loss_pos(const double* y_i, const double* y_p, std::size_t k);
double loss_neg(const double* y_i, const double* y_n, std::size_t k);

// log K - H(mean row): zero when the batch marginal is uniform, log K at
// a collapsed point mass.
double loss_ent(const double* anchor_probs, std::size_t m, std::size_t k);

// Combined loss over matched anchor/positive/negative rows (all m x dim)
// and its exact gradient with respect to every parameter; the three
// forward passes share params.
BatchGradients loss_and_grad(const HeadParams& params, const double* anchors,
                             const double* positives, const double* negatives, std::size_t m,
                             const LossWeights& weights);

// Argmax cluster ids for a whole embedding set.
std::vector<std::int32_t> predict(const HeadParams& params, const EmbeddingSet& set);

// UNICHEAD model file.
void save_head(const HeadParams& params, const std::string& path);
HeadParams load_head(const std::string& path);

}  // namespace unic
