#include "unic/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include <json.hpp>

namespace unic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Augmenting-path Kuhn-Munkres with row/column potentials. Deterministic:
// scans columns in ascending order and improves only on strict <.
std::vector<std::int32_t> assign_min_cost(const std::vector<double>& cost, std::size_t k) {
    std::vector<double> u(k + 1, 0.0), v(k + 1, 0.0), minv(k + 1);
    std::vector<std::size_t> match(k + 1, k), way(k + 1, 0);  // match[j] = row on column j
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j0 = k;  // virtual start column
        match[k] = i;
        std::fill(minv.begin(), minv.end(), kInf);
        std::vector<char> used(k + 1, 0);
        do {
            used[j0] = 1;
            std::size_t i0 = match[j0], j1 = 0;
            double delta = kInf;
            for (std::size_t j = 0; j < k; ++j) {
                if (used[j]) continue;
                double cur = cost[i0 * k + j] - u[i0 + 1] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= k; ++j) {
                if (used[j]) {
                    u[match[j] + 1] += delta;
                    if (j < k) v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != k);
        do {
            std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != k);
    }
    std::vector<std::int32_t> row_to_col(k, -1);
    for (std::size_t j = 0; j < k; ++j) {
        if (match[j] != k) row_to_col[match[j]] = static_cast<std::int32_t>(j);
    }
    return row_to_col;
}

double assignment_total(const std::vector<double>& cost, std::size_t k,
                        const std::vector<std::int32_t>& sigma) {
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) total += cost[i * k + sigma[i]];
    return total;
}

// Lexicographic refinement: fix rows top-down to the smallest column that
// still admits an optimal completion. Exact when the costs are integer
// valued (confusion counts); skipped for large K.
std::vector<std::int32_t> lexicographic_min_assignment(const std::vector<double>& cost,
                                                       std::size_t k,
                                                       const std::vector<std::int32_t>& raw) {
    double best_total = assignment_total(cost, k, raw);
    std::vector<std::int32_t> fixed(k, -1);
    std::vector<char> col_used(k, 0);
    std::vector<std::int32_t> fallback = raw;

    for (std::size_t i = 0; i < k; ++i) {
        std::size_t free_n = k - i - 1;
        std::vector<std::size_t> free_rows, free_cols;
        for (std::size_t r = i + 1; r < k; ++r) free_rows.push_back(r);

        double fixed_sum = 0.0;
        for (std::size_t r = 0; r < i; ++r) fixed_sum += cost[r * k + fixed[r]];

        double best_cand = kInf;
        std::int32_t best_col = -1;
        std::vector<std::int32_t> best_sub;
        for (std::size_t j = 0; j < k; ++j) {
            if (col_used[j]) continue;
            free_cols.clear();
            for (std::size_t c = 0; c < k; ++c) {
                if (!col_used[c] && c != j) free_cols.push_back(c);
            }
            std::vector<std::int32_t> sub;
            double sub_total = 0.0;
            if (free_n > 0) {
                std::vector<double> subcost(free_n * free_n);
                for (std::size_t r = 0; r < free_n; ++r) {
                    for (std::size_t c = 0; c < free_n; ++c) {
                        subcost[r * free_n + c] = cost[free_rows[r] * k + free_cols[c]];
                    }
                }
                sub = assign_min_cost(subcost, free_n);
                for (std::size_t r = 0; r < free_n; ++r) {
                    sub_total += subcost[r * free_n + sub[r]];
                }
            }
            double cand = fixed_sum + cost[i * k + j] + sub_total;
            if (cand < best_cand) {
                best_cand = cand;
                best_col = static_cast<std::int32_t>(j);
                best_sub.assign(free_n, 0);
                for (std::size_t r = 0; r < free_n; ++r) {
                    best_sub[r] = static_cast<std::int32_t>(free_cols[sub[r]]);
                }
            }
        }
        fixed[i] = best_col;
        col_used[best_col] = 1;
        for (std::size_t r = 0; r < free_n; ++r) fallback[free_rows[r]] = best_sub[r];
        fallback[i] = best_col;
    }
    // Floating-point ordering can in principle drift; never return a
    // worse assignment than the raw optimum.
    if (assignment_total(cost, k, fixed) > best_total) return raw;
    return fixed;
}

void check_ids(const std::vector<std::int32_t>& v, std::size_t k, const char* what) {
    for (std::int32_t id : v) {
        if (id < 0 || static_cast<std::size_t>(id) >= k) {
            throw std::invalid_argument(std::string(what) + " id out of range [0,K)");
        }
    }
}

double entropy_nats(const std::map<std::int32_t, std::size_t>& counts, std::size_t n) {
    double h = 0.0;
    for (const auto& [id, c] : counts) {
        double p = static_cast<double>(c) / static_cast<double>(n);
        if (p > 0.0) h -= p * std::log(p);
    }
    return h;
}

double choose2(double x) { return x * (x - 1.0) / 2.0; }

}  // namespace

std::vector<std::int32_t> hungarian(const std::vector<double>& cost, std::size_t k) {
    if (k < 1) throw std::invalid_argument("empty cost matrix");
    if (cost.size() != k * k) throw std::invalid_argument("cost matrix is not square");
    for (double c : cost) {
        if (!std::isfinite(c)) throw std::invalid_argument("non-finite cost");
    }
    std::vector<std::int32_t> raw = assign_min_cost(cost, k);
    if (k <= 32) return lexicographic_min_assignment(cost, k, raw);
    return raw;
}

std::pair<double, std::vector<std::int32_t>> clustering_accuracy(
    const std::vector<std::int32_t>& pred, const std::vector<std::int32_t>& truth,
    std::size_t k) {
    if (pred.size() != truth.size()) throw std::invalid_argument("length mismatch");
    if (pred.empty()) throw std::invalid_argument("empty input");
    check_ids(pred, k, "cluster");
    check_ids(truth, k, "class");
    std::vector<double> confusion(k * k, 0.0);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        confusion[static_cast<std::size_t>(pred[i]) * k + truth[i]] += 1.0;
    }
    std::vector<double> cost(k * k);
    for (std::size_t i = 0; i < k * k; ++i) cost[i] = -confusion[i];
    std::vector<std::int32_t> matching = hungarian(cost, k);
    double matched = 0.0;
    for (std::size_t c = 0; c < k; ++c) matched += confusion[c * k + matching[c]];
    return {matched / static_cast<double>(pred.size()), std::move(matching)};
}

double nmi(const std::vector<std::int32_t>& pred, const std::vector<std::int32_t>& truth) {
    if (pred.size() != truth.size()) throw std::invalid_argument("length mismatch");
    if (pred.empty()) throw std::invalid_argument("empty input");
    std::size_t n = pred.size();
    std::map<std::int32_t, std::size_t> pc, tc;
    std::map<std::pair<std::int32_t, std::int32_t>, std::size_t> joint;
    for (std::size_t i = 0; i < n; ++i) {
        ++pc[pred[i]];
        ++tc[truth[i]];
        ++joint[{pred[i], truth[i]}];
    }
    double hp = entropy_nats(pc, n), ht = entropy_nats(tc, n);
    if (hp == 0.0 && ht == 0.0) return 1.0;  // both partitions trivial
    double mi = 0.0;
    for (const auto& [cell, c] : joint) {
        double pij = static_cast<double>(c) / static_cast<double>(n);
        double pi = static_cast<double>(pc[cell.first]) / static_cast<double>(n);
        double qj = static_cast<double>(tc[cell.second]) / static_cast<double>(n);
        mi += pij * std::log(pij / (pi * qj));
    }
    double value = mi / ((hp + ht) / 2.0);
    return std::clamp(value, 0.0, 1.0);
}

double ari(const std::vector<std::int32_t>& pred, const std::vector<std::int32_t>& truth) {
    if (pred.size() != truth.size()) throw std::invalid_argument("length mismatch");
    if (pred.size() < 2) throw std::invalid_argument("ari needs n >= 2");
    std::size_t n = pred.size();
    std::map<std::int32_t, std::size_t> pc, tc;
    std::map<std::pair<std::int32_t, std::int32_t>, std::size_t> joint;
    for (std::size_t i = 0; i < n; ++i) {
        ++pc[pred[i]];
        ++tc[truth[i]];
        ++joint[{pred[i], truth[i]}];
    }
    double index = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (const auto& [cell, c] : joint) index += choose2(static_cast<double>(c));
    for (const auto& [id, c] : pc) sum_a += choose2(static_cast<double>(c));
    for (const auto& [id, c] : tc) sum_b += choose2(static_cast<double>(c));
    double pairs = choose2(static_cast<double>(n));
    double expected = sum_a * sum_b / pairs;
    double max_index = (sum_a + sum_b) / 2.0;
    if (max_index == expected) return 1.0;  // both partitions trivial, identical structure
    return (index - expected) / (max_index - expected);
}

MetricsReport cluster_report(const std::vector<std::int32_t>& pred,
                             const std::vector<std::int32_t>& truth, std::size_t k) {
    MetricsReport rep;
    auto [acc, matching] = clustering_accuracy(pred, truth, k);
    rep.acc = acc;
    rep.matching = std::move(matching);
    rep.nmi = nmi(pred, truth);
    rep.ari = ari(pred, truth);
    return rep;
}

MetricsReport gcd_report(const std::vector<std::int32_t>& pred,
                         const std::vector<std::int32_t>& truth, const SplitSpec& split,
                         std::size_t k) {
    if (pred.size() != truth.size()) throw std::invalid_argument("length mismatch");
    if (split.labeled_mask.size() != pred.size()) {
        throw std::invalid_argument("split mask length mismatch");
    }
    std::vector<std::int32_t> up, ut;
    std::vector<char> is_old;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (split.labeled_mask[i]) continue;
        up.push_back(pred[i]);
        ut.push_back(truth[i]);
        is_old.push_back(split.old_classes.count(truth[i]) ? 1 : 0);
    }
    if (up.empty()) throw std::invalid_argument("no unlabeled samples to evaluate");

    MetricsReport rep;
    rep.gcd = true;
    auto [acc, matching] = clustering_accuracy(up, ut, k);
    rep.matching = std::move(matching);
    rep.nmi = nmi(up, ut);
    rep.ari = ari(up, ut);

    std::size_t hit_old = 0, hit_new = 0, n_old = 0, n_new = 0;
    for (std::size_t i = 0; i < up.size(); ++i) {
        bool hit = rep.matching[up[i]] == ut[i];
        if (is_old[i]) {
            ++n_old;
            hit_old += hit;
        } else {
            ++n_new;
            hit_new += hit;
        }
    }
    rep.acc_all = static_cast<double>(hit_old + hit_new) / static_cast<double>(up.size());
    rep.acc_old = n_old ? static_cast<double>(hit_old) / static_cast<double>(n_old) : 0.0;
    rep.acc_new = n_new ? static_cast<double>(hit_new) / static_cast<double>(n_new) : 0.0;
    rep.acc = acc;  // equals acc_all: both count truth == matching[pred]
    return rep;
}

std::string MetricsReport::to_json() const {
    nlohmann::ordered_json j;
    j["acc"] = acc;
    j["nmi"] = nmi;
    j["ari"] = ari;
    if (gcd) {
        j["acc_all"] = acc_all;
        j["acc_old"] = acc_old;
        j["acc_new"] = acc_new;
    }
    j["matching"] = matching;
    return j.dump();
}

}  // namespace unic
