#pragma once
// Training orchestration: epoch/batch loop over sampled neighbor triples,
// Adam updates with a cosine-annealed learning rate, clustering and GCD
// modes. Deterministic given the config seed.

#include <cstdint>
#include <string>
#include <vector>

#include "unic/cluster_head.hpp"
#include "unic/embedding.hpp"
#include "unic/neighbor_graph.hpp"

namespace unic {

struct TrainConfig {
    std::uint32_t epochs = 100;
    std::uint32_t batch_size = 128;
    double lr0 = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps_adam = 1e-8;
    LossWeights weights;
    std::uint64_t seed = 0;
    SupervisionConfig supervision;
    std::uint32_t n_pos = 1;
    std::uint32_t n_neg = 1;
    std::uint32_t k = 10;
    HeadKind head_kind = HeadKind::mlp;
    std::uint32_t hidden = 2048;
    bool track_metrics = false;  // per-epoch acc/nmi/ari when labels exist

    void validate() const;
};

struct EpochRecord {
    std::uint32_t epoch = 0;
    double lr = 0.0;
    double loss_pos = 0.0;
    double loss_neg = 0.0;
    double loss_ent = 0.0;
    double total = 0.0;
    bool has_eval = false;
    double acc = 0.0;
    double nmi = 0.0;
    double ari = 0.0;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;

    std::string to_csv() const;  // epoch,lr,loss_pos,loss_neg,loss_ent,total[,acc,nmi,ari]
};

// lr0 * (1 + cos(pi * epoch / total_epochs)) / 2.
double cosine_lr(double lr0, std::uint32_t epoch, std::uint32_t total_epochs);

struct AdamState {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t step = 0;
    std::vector<double> m_w1, v_w1, m_b1, v_b1, m_w2, v_w2, m_b2, v_b2;

    static AdamState like(const HeadParams& params, double beta1, double beta2, double eps);
};

// Standard Adam with bias correction. Throws "diverged" on non-finite
// gradients.
void adam_step(HeadParams& params, const BatchGradients& grads, AdamState& state, double lr);

std::pair<HeadParams, TrainHistory> train(const EmbeddingSet& set, const NeighborIndex& index,
                                          const SplitSpec* split, const TrainConfig& cfg);

// Share of samples assigned to the most common argmax cluster, the
// collapse diagnostic.
double argmax_concentration(const std::vector<std::int32_t>& pred);

}  // namespace unic
