#include "unic/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "unic/metrics.hpp"

namespace unic {

namespace {

void adam_update_block(std::vector<double>& p, const std::vector<double>& g,
                       std::vector<double>& m, std::vector<double>& v, double lr, double b1,
                       double b2, double eps, double bc1, double bc2) {
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!std::isfinite(g[i])) throw std::runtime_error("diverged");
        m[i] = b1 * m[i] + (1.0 - b1) * g[i];
        v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
        double mhat = m[i] / bc1;
        double vhat = v[i] / bc2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

}  // namespace

void TrainConfig::validate() const {
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (batch_size < 2) throw std::invalid_argument("batch_size must be >= 2");
    if (!(lr0 > 0.0)) throw std::invalid_argument("lr0 must be > 0");
    if (n_pos < 1 || n_neg < 1) throw std::invalid_argument("n_pos and n_neg must be >= 1");
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (head_kind == HeadKind::mlp && hidden < 1) {
        throw std::invalid_argument("mlp head requires hidden >= 1");
    }
    weights.validate();
    supervision.validate();
}

double cosine_lr(double lr0, std::uint32_t epoch, std::uint32_t total_epochs) {
    if (epoch >= total_epochs) throw std::invalid_argument("epoch must be < total_epochs");
    return lr0 * 0.5 * (1.0 + std::cos(std::numbers::pi * epoch / total_epochs));
}

AdamState AdamState::like(const HeadParams& params, double beta1, double beta2, double eps) {
    AdamState s;
    s.beta1 = beta1;
    s.beta2 = beta2;
    s.eps = eps;
    s.m_w1.assign(params.w1.size(), 0.0);
    s.v_w1.assign(params.w1.size(), 0.0);
    s.m_b1.assign(params.b1.size(), 0.0);
    s.v_b1.assign(params.b1.size(), 0.0);
    s.m_w2.assign(params.w2.size(), 0.0);
    s.v_w2.assign(params.w2.size(), 0.0);
    s.m_b2.assign(params.b2.size(), 0.0);
    s.v_b2.assign(params.b2.size(), 0.0);
    return s;
}

void adam_step(HeadParams& params, const BatchGradients& grads, AdamState& state, double lr) {
    if (grads.w1.size() != params.w1.size() || grads.b1.size() != params.b1.size() ||
        grads.w2.size() != params.w2.size() || grads.b2.size() != params.b2.size()) {
        throw std::invalid_argument("gradient shapes do not match parameters");
    }
    ++state.step;
    double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    adam_update_block(params.w1, grads.w1, state.m_w1, state.v_w1, lr, state.beta1, state.beta2,
                      state.eps, bc1, bc2);
    adam_update_block(params.b1, grads.b1, state.m_b1, state.v_b1, lr, state.beta1, state.beta2,
                      state.eps, bc1, bc2);
    adam_update_block(params.w2, grads.w2, state.m_w2, state.v_w2, lr, state.beta1, state.beta2,
                      state.eps, bc1, bc2);
    adam_update_block(params.b2, grads.b2, state.m_b2, state.v_b2, lr, state.beta1, state.beta2,
                      state.eps, bc1, bc2);
}

std::pair<HeadParams, TrainHistory> train(const EmbeddingSet& set, const NeighborIndex& index,
                                          const SplitSpec* split, const TrainConfig& cfg) {
    cfg.validate();
    set.validate();
    if (index.n() != set.n) throw std::invalid_argument("index does not match embedding count");
    if (cfg.supervision.mode == Mode::gcd && split == nullptr) {
        throw std::invalid_argument("gcd mode requires a split");
    }

    HeadParams params = init_head(cfg.head_kind, set.dim, cfg.hidden, cfg.k, cfg.seed);
    AdamState state = AdamState::like(params, cfg.beta1, cfg.beta2, cfg.eps_adam);
    NeighborSampler sampler(set, index, cfg.supervision.mode == Mode::gcd ? split : nullptr,
                            cfg.supervision);
    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

    const std::uint32_t n = set.n;
    const std::uint32_t rows_per_anchor = std::max(cfg.n_pos, cfg.n_neg);
    std::vector<std::uint32_t> order(n);
    for (std::uint32_t i = 0; i < n; ++i) order[i] = i;

    bool can_eval = cfg.track_metrics && set.has_labels();
    if (can_eval) {
        for (auto l : set.labels) {
            if (l < 0 || static_cast<std::uint32_t>(l) >= cfg.k) can_eval = false;
        }
    }

    TrainHistory history;
    history.epochs.resize(cfg.epochs);

    std::vector<double> anchors, positives, negatives;
    std::vector<std::uint32_t> pos_draws(cfg.n_pos), neg_draws(cfg.n_neg);

    auto copy_row = [&](std::vector<double>& dst, std::size_t slot, std::uint32_t sample) {
        const float* src = set.row(sample);
        double* out = dst.data() + slot * set.dim;
        for (std::uint32_t d = 0; d < set.dim; ++d) out[d] = src[d];
    };

    for (std::uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        double lr = cosine_lr(cfg.lr0, epoch, cfg.epochs);
        std::shuffle(order.begin(), order.end(), rng);

        double sum_pos = 0.0, sum_neg = 0.0, sum_ent = 0.0, sum_total = 0.0;
        std::size_t sum_rows = 0;

        for (std::uint32_t start = 0; start < n; start += cfg.batch_size) {
            std::uint32_t batch_n = std::min(cfg.batch_size, n - start);
            std::size_t rows = std::size_t(batch_n) * rows_per_anchor;
            anchors.resize(rows * set.dim);
            positives.resize(rows * set.dim);
            negatives.resize(rows * set.dim);

            std::size_t slot = 0;
            for (std::uint32_t b = 0; b < batch_n; ++b) {
                std::uint32_t anchor = order[start + b];
                for (std::uint32_t s = 0; s < cfg.n_pos; ++s) {
                    pos_draws[s] = sampler.sample_positive(anchor, rng);
                }
                for (std::uint32_t s = 0; s < cfg.n_neg; ++s) {
                    neg_draws[s] = sampler.sample_negative(anchor, rng);
                }
                for (std::uint32_t t = 0; t < rows_per_anchor; ++t, ++slot) {
                    copy_row(anchors, slot, anchor);
                    copy_row(positives, slot, pos_draws[t % cfg.n_pos]);
                    copy_row(negatives, slot, neg_draws[t % cfg.n_neg]);
                }
            }

            BatchGradients g = loss_and_grad(params, anchors.data(), positives.data(),
                                             negatives.data(), rows, cfg.weights);
            adam_step(params, g, state, lr);

            sum_pos += g.loss_pos * static_cast<double>(rows);
            sum_neg += g.loss_neg * static_cast<double>(rows);
            sum_ent += g.loss_ent * static_cast<double>(rows);
            sum_total += g.total * static_cast<double>(rows);
            sum_rows += rows;
        }

        EpochRecord& rec = history.epochs[epoch];
        rec.epoch = epoch;
        rec.lr = lr;
        rec.loss_pos = sum_pos / static_cast<double>(sum_rows);
        rec.loss_neg = sum_neg / static_cast<double>(sum_rows);
        rec.loss_ent = sum_ent / static_cast<double>(sum_rows);
        rec.total = sum_total / static_cast<double>(sum_rows);

        if (can_eval) {
            std::vector<std::int32_t> pred = predict(params, set);
            MetricsReport rep = cluster_report(pred, set.labels, cfg.k);
            rec.has_eval = true;
            rec.acc = rep.acc;
            rec.nmi = rep.nmi;
            rec.ari = rep.ari;
        }
    }
    return {std::move(params), std::move(history)};
}

double argmax_concentration(const std::vector<std::int32_t>& pred) {
    if (pred.empty()) return 0.0;
    std::map<std::int32_t, std::size_t> counts;
    for (auto c : pred) ++counts[c];
    std::size_t top = 0;
    for (const auto& [id, c] : counts) top = std::max(top, c);
    return static_cast<double>(top) / static_cast<double>(pred.size());
}

std::string TrainHistory::to_csv() const {
    std::ostringstream os;
    bool with_eval = !epochs.empty() && epochs.front().has_eval;
    os << "epoch,lr,loss_pos,loss_neg,loss_ent,total";
    if (with_eval) os << ",acc,nmi,ari";
    os << "\n";
    char buf[256];
    for (const auto& rec : epochs) {
        std::snprintf(buf, sizeof buf, "%u,%.17g,%.17g,%.17g,%.17g,%.17g", rec.epoch, rec.lr,
                      rec.loss_pos, rec.loss_neg, rec.loss_ent, rec.total);
        os << buf;
        if (with_eval) {
            std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g", rec.acc, rec.nmi, rec.ari);
            os << buf;
        }
        os << "\n";
    }
    return os.str();
}

}  // namespace unic
