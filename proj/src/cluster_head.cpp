#include "unic/cluster_head.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>

#include "unic/kernels.hpp"
#include "io_util.hpp"

namespace unic {

namespace {

constexpr double kClampEps = 1e-7;
constexpr double kLogFloor = 1e-300;  // keeps log(pbar) finite at exact zeros
constexpr char kMagic[8] = {'U', 'N', 'I', 'C', 'H', 'E', 'A', 'D'};

// -log(clamp(x, eps, 1-eps)) and its derivative gate: the derivative is
// -1/x strictly inside the clamp window and 0 on the flats.
inline double neg_log_clamped(double x) {
    return -std::log(std::clamp(x, kClampEps, 1.0 - kClampEps));
}

inline bool inside_clamp(double x) { return x > kClampEps && x < 1.0 - kClampEps; }

void softmax_row(double* z, std::size_t k) {
    double mx = z[0];
    for (std::size_t i = 1; i < k; ++i) mx = std::max(mx, z[i]);
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        z[i] = std::exp(z[i] - mx);
        sum += z[i];
    }
    for (std::size_t i = 0; i < k; ++i) z[i] /= sum;
}

// Forward pass that also keeps the hidden pre-activations, needed for
// backprop. For linear heads `z1` stays empty.
struct Activations {
    std::vector<double> z1;     // m x hidden, pre-ReLU
    std::vector<double> probs;  // m x k
};

Activations forward_cached(const HeadParams& p, const double* batch, std::size_t m) {
    Activations act;
    act.probs.assign(m * p.k, 0.0);
    if (p.kind == HeadKind::linear) {
        for (std::size_t r = 0; r < m; ++r) {
            const double* x = batch + r * p.dim;
            double* out = act.probs.data() + r * p.k;
            std::memcpy(out, p.b1.data(), p.k * sizeof(double));
            for (std::uint32_t d = 0; d < p.dim; ++d) {
                kernels::axpy_f64(x[d], p.w1.data() + std::size_t(d) * p.k, out, p.k);
            }
            softmax_row(out, p.k);
        }
        return act;
    }
    act.z1.assign(m * p.hidden, 0.0);
    std::vector<double> h(p.hidden);
    for (std::size_t r = 0; r < m; ++r) {
        const double* x = batch + r * p.dim;
        double* z1 = act.z1.data() + r * p.hidden;
        std::memcpy(z1, p.b1.data(), p.hidden * sizeof(double));
        for (std::uint32_t d = 0; d < p.dim; ++d) {
            kernels::axpy_f64(x[d], p.w1.data() + std::size_t(d) * p.hidden, z1, p.hidden);
        }
        for (std::uint32_t j = 0; j < p.hidden; ++j) h[j] = z1[j] > 0.0 ? z1[j] : 0.0;
        double* out = act.probs.data() + r * p.k;
        std::memcpy(out, p.b2.data(), p.k * sizeof(double));
        for (std::uint32_t j = 0; j < p.hidden; ++j) {
            if (h[j] != 0.0) {
                kernels::axpy_f64(h[j], p.w2.data() + std::size_t(j) * p.k, out, p.k);
            }
        }
        softmax_row(out, p.k);
    }
    return act;
}

// dL/dz for one softmax row given dL/dprobs: a_i * (g_i - <g, a>).
void softmax_backward(const double* probs, const double* gprobs, double* gz, std::size_t k) {
    double inner = kernels::dot_f64(gprobs, probs, k);
    for (std::size_t i = 0; i < k; ++i) gz[i] = probs[i] * (gprobs[i] - inner);
}

// Backprop one role's batch through the head, accumulating into grads.
void backward_into(const HeadParams& p, const double* batch, const Activations& act,
                   const std::vector<double>& gprobs, BatchGradients& g) {
    std::size_t m = gprobs.size() / p.k;
    std::vector<double> gz(p.k);
    if (p.kind == HeadKind::linear) {
        for (std::size_t r = 0; r < m; ++r) {
            softmax_backward(act.probs.data() + r * p.k, gprobs.data() + r * p.k, gz.data(), p.k);
            const double* x = batch + r * p.dim;
            for (std::uint32_t d = 0; d < p.dim; ++d) {
                kernels::axpy_f64(x[d], gz.data(), g.w1.data() + std::size_t(d) * p.k, p.k);
            }
            kernels::axpy_f64(1.0, gz.data(), g.b1.data(), p.k);
        }
        return;
    }
    std::vector<double> gz1(p.hidden);
    for (std::size_t r = 0; r < m; ++r) {
        softmax_backward(act.probs.data() + r * p.k, gprobs.data() + r * p.k, gz.data(), p.k);
        const double* x = batch + r * p.dim;
        const double* z1 = act.z1.data() + r * p.hidden;
        for (std::uint32_t j = 0; j < p.hidden; ++j) {
            double h = z1[j] > 0.0 ? z1[j] : 0.0;
            if (h != 0.0) {
                kernels::axpy_f64(h, gz.data(), g.w2.data() + std::size_t(j) * p.k, p.k);
            }
            gz1[j] = z1[j] > 0.0
                         ? kernels::dot_f64(p.w2.data() + std::size_t(j) * p.k, gz.data(), p.k)
                         : 0.0;
        }
        kernels::axpy_f64(1.0, gz.data(), g.b2.data(), p.k);
        for (std::uint32_t d = 0; d < p.dim; ++d) {
            kernels::axpy_f64(x[d], gz1.data(), g.w1.data() + std::size_t(d) * p.hidden, p.hidden);
        }
        kernels::axpy_f64(1.0, gz1.data(), g.b1.data(), p.hidden);
    }
}

}  // namespace

void HeadParams::validate() const {
    if (dim < 1 || k < 1) throw std::invalid_argument("head requires dim >= 1 and k >= 1");
    if (kind == HeadKind::mlp) {
        if (hidden < 1) throw std::invalid_argument("mlp head requires hidden >= 1");
        if (w1.size() != std::size_t(dim) * hidden || b1.size() != hidden ||
            w2.size() != std::size_t(hidden) * k || b2.size() != k) {
            throw std::invalid_argument("mlp head has inconsistent shapes");
        }
    } else {
        if (hidden != 0) throw std::invalid_argument("linear head must have hidden == 0");
        if (w1.size() != std::size_t(dim) * k || b1.size() != k || !w2.empty() || !b2.empty()) {
            throw std::invalid_argument("linear head has inconsistent shapes");
        }
    }
    for (const auto* block : {&w1, &b1, &w2, &b2}) {
        for (double v : *block) {
            if (!std::isfinite(v)) throw std::invalid_argument("non-finite head parameter");
        }
    }
}

void LossWeights::validate() const {
    if (lambda_pos < 0 || lambda_neg < 0 || lambda_ent < 0 ||
        !std::isfinite(lambda_pos) || !std::isfinite(lambda_neg) || !std::isfinite(lambda_ent)) {
        throw std::invalid_argument("loss weights must be finite and nonnegative");
    }
}

HeadParams init_head(HeadKind kind, std::uint32_t dim, std::uint32_t hidden, std::uint32_t k,
                     std::uint64_t seed) {
    HeadParams p;
    p.kind = kind;
    p.dim = dim;
    p.hidden = kind == HeadKind::mlp ? hidden : 0;
    p.k = k;
    std::mt19937_64 rng(seed);
    auto fill = [&rng](std::vector<double>& w, std::uint32_t fan_in) {
        double bound = std::sqrt(1.0 / fan_in);
        std::uniform_real_distribution<double> u(-bound, bound);
        for (double& v : w) v = u(rng);
    };
    if (kind == HeadKind::mlp) {
        if (hidden < 1) throw std::invalid_argument("mlp head requires hidden >= 1");
        p.w1.resize(std::size_t(dim) * hidden);
        p.b1.assign(hidden, 0.0);
        p.w2.resize(std::size_t(hidden) * k);
        p.b2.assign(k, 0.0);
        fill(p.w1, dim);
        fill(p.w2, hidden);
    } else {
        p.w1.resize(std::size_t(dim) * k);
        p.b1.assign(k, 0.0);
        fill(p.w1, dim);
    }
    p.validate();
    return p;
}

std::vector<double> forward(const HeadParams& params, const double* batch, std::size_t m) {
    params.validate();
    return forward_cached(params, batch, m).probs;
}

double loss_pos(const double* y_i, const double* y_p, std::size_t k) {
    return neg_log_clamped(kernels::dot_f64(y_i, y_p, k));
}

double loss_neg(const double* y_i, const double* y_n, std::size_t k) {
    return neg_log_clamped(1.0 - kernels::dot_f64(y_i, y_n, k));
}

double loss_ent(const double* anchor_probs, std::size_t m, std::size_t k) {
    if (m < 1) throw std::invalid_argument("entropy loss needs at least one row");
    double ent = std::log(static_cast<double>(k));
    for (std::size_t j = 0; j < k; ++j) {
        double pbar = 0.0;
        for (std::size_t r = 0; r < m; ++r) pbar += anchor_probs[r * k + j];
        pbar /= static_cast<double>(m);
        if (pbar > 0.0) ent += pbar * std::log(pbar);
    }
    return ent;
}

BatchGradients loss_and_grad(const HeadParams& params, const double* anchors,
                             const double* positives, const double* negatives, std::size_t m,
                             const LossWeights& weights) {
    params.validate();
    weights.validate();
    if (m < 1) throw std::invalid_argument("empty batch");
    const std::size_t k = params.k;
    const double inv_m = 1.0 / static_cast<double>(m);

    Activations a = forward_cached(params, anchors, m);
    Activations p = forward_cached(params, positives, m);
    Activations n = forward_cached(params, negatives, m);

    BatchGradients g;
    g.w1.assign(params.w1.size(), 0.0);
    g.b1.assign(params.b1.size(), 0.0);
    g.w2.assign(params.w2.size(), 0.0);
    g.b2.assign(params.b2.size(), 0.0);

    std::vector<double> pbar(k, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
        kernels::axpy_f64(inv_m, a.probs.data() + r * k, pbar.data(), k);
    }
    g.loss_ent = std::log(static_cast<double>(k));
    for (std::size_t j = 0; j < k; ++j) {
        if (pbar[j] > 0.0) g.loss_ent += pbar[j] * std::log(pbar[j]);
    }

    std::vector<double> ga(m * k, 0.0), gp(m * k, 0.0), gn(m * k, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
        const double* ar = a.probs.data() + r * k;
        const double* pr = p.probs.data() + r * k;
        const double* nr = n.probs.data() + r * k;
        double* gar = ga.data() + r * k;
        double* gpr = gp.data() + r * k;
        double* gnr = gn.data() + r * k;

        double dp = kernels::dot_f64(ar, pr, k);
        g.loss_pos += neg_log_clamped(dp) * inv_m;
        if (weights.lambda_pos > 0.0 && inside_clamp(dp)) {
            double c = -weights.lambda_pos * inv_m / dp;
            kernels::axpy_f64(c, pr, gar, k);
            kernels::axpy_f64(c, ar, gpr, k);
        }

        double dn = kernels::dot_f64(ar, nr, k);
        g.loss_neg += neg_log_clamped(1.0 - dn) * inv_m;
        if (weights.lambda_neg > 0.0 && inside_clamp(1.0 - dn)) {
            double c = weights.lambda_neg * inv_m / (1.0 - dn);
            kernels::axpy_f64(c, nr, gar, k);
            kernels::axpy_f64(c, ar, gnr, k);
        }

        if (weights.lambda_ent > 0.0) {
            for (std::size_t j = 0; j < k; ++j) {
                gar[j] += weights.lambda_ent * inv_m *
                          (std::log(std::max(pbar[j], kLogFloor)) + 1.0);
            }
        }
    }

    g.total = weights.lambda_pos * g.loss_pos + weights.lambda_neg * g.loss_neg +
              weights.lambda_ent * g.loss_ent;

    backward_into(params, anchors, a, ga, g);
    backward_into(params, positives, p, gp, g);
    backward_into(params, negatives, n, gn, g);
    return g;
}

std::vector<std::int32_t> predict(const HeadParams& params, const EmbeddingSet& set) {
    if (set.dim != params.dim) throw std::invalid_argument("embedding dim does not match head");
    std::vector<double> row(params.dim);
    std::vector<std::int32_t> out(set.n);
    for (std::uint32_t i = 0; i < set.n; ++i) {
        const float* src = set.row(i);
        for (std::uint32_t d = 0; d < params.dim; ++d) row[d] = src[d];
        std::vector<double> probs = forward(params, row.data(), 1);
        out[i] = static_cast<std::int32_t>(
            std::max_element(probs.begin(), probs.end()) - probs.begin());
    }
    return out;
}

void save_head(const HeadParams& params, const std::string& path) {
    params.validate();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    io::put_bytes(os, kMagic, 8);
    io::write_u8(os, static_cast<std::uint8_t>(params.kind));
    io::write_u32(os, params.dim);
    io::write_u32(os, params.hidden);
    io::write_u32(os, params.k);
    for (const auto* block : {&params.w1, &params.b1, &params.w2, &params.b2}) {
        for (double v : *block) io::write_f32(os, static_cast<float>(v));
    }
    os.flush();
    if (!os) throw std::runtime_error("I/O failure while writing " + path);
}

HeadParams load_head(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open: " + path);
    char magic[8];
    io::get_bytes(is, magic, 8, "magic");
    if (std::memcmp(magic, kMagic, 8) != 0) {
        throw std::runtime_error("bad magic: not a UNICHEAD file");
    }
    HeadParams p;
    std::uint8_t kind = io::read_u8(is, "kind");
    if (kind > 1) throw std::runtime_error("bad head kind");
    p.kind = static_cast<HeadKind>(kind);
    p.dim = io::read_u32(is, "dim");
    p.hidden = io::read_u32(is, "hidden");
    p.k = io::read_u32(is, "k");
    if (p.kind == HeadKind::mlp) {
        p.w1.resize(std::size_t(p.dim) * p.hidden);
        p.b1.resize(p.hidden);
        p.w2.resize(std::size_t(p.hidden) * p.k);
        p.b2.resize(p.k);
    } else {
        p.w1.resize(std::size_t(p.dim) * p.k);
        p.b1.resize(p.k);
    }
    for (auto* block : {&p.w1, &p.b1, &p.w2, &p.b2}) {
        for (double& v : *block) v = io::read_f32(is, "parameter block");
    }
    if (is.peek() != std::char_traits<char>::eof()) {
        throw std::runtime_error("trailing bytes after payload");
    }
    p.validate();
    return p;
}

}  // namespace unic
