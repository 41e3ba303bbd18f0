#include "unic/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "unic/kernels.hpp"
#include "unic/parallel.hpp"

namespace unic {

namespace {

struct RestartOutcome {
    std::vector<double> centroids;
    std::vector<std::int32_t> assignments;
    double inertia = 0.0;
    std::uint32_t iterations = 0;
    std::vector<double> inertia_history;
};

// Assignment step: per point, argmin squared distance with ties to the
// smaller centroid index. Returns the summed squared distances.
double assign_points(const std::vector<double>& data, std::size_t n, std::size_t dim,
                     const std::vector<double>& centroids, std::size_t k,
                     std::vector<std::int32_t>& assignments, std::vector<double>& dists) {
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* x = data.data() + i * dim;
        double best = kernels::sqdist_f64(x, centroids.data(), dim);
        std::size_t best_c = 0;
        for (std::size_t c = 1; c < k; ++c) {
            double d = kernels::sqdist_f64(x, centroids.data() + c * dim, dim);
            if (d < best) {
                best = d;
                best_c = c;
            }
        }
        assignments[i] = static_cast<std::int32_t>(best_c);
        dists[i] = best;
        inertia += best;
    }
    return inertia;
}

// Empty clusters grab the point farthest from its assigned centroid.
bool repair_empty(std::size_t n, std::size_t k, std::vector<std::int32_t>& assignments,
                  std::vector<double>& dists) {
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) ++counts[assignments[i]];
    bool repaired = false;
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] != 0) continue;
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (counts[assignments[i]] > 1 && dists[i] > far_d) {
                far_d = dists[i];
                far = i;
            }
        }
        --counts[assignments[far]];
        assignments[far] = static_cast<std::int32_t>(c);
        counts[c] = 1;
        dists[far] = 0.0;
        repaired = true;
    }
    return repaired;
}

void update_centroids(const std::vector<double>& data, std::size_t n, std::size_t dim,
                      const std::vector<std::int32_t>& assignments, std::size_t k,
                      std::vector<double>& centroids) {
    std::vector<std::size_t> counts(k, 0);
    std::fill(centroids.begin(), centroids.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto c = static_cast<std::size_t>(assignments[i]);
        ++counts[c];
        kernels::axpy_f64(1.0, data.data() + i * dim, centroids.data() + c * dim, dim);
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) continue;
        double inv = 1.0 / static_cast<double>(counts[c]);
        for (std::size_t d = 0; d < dim; ++d) centroids[c * dim + d] *= inv;
    }
}

std::vector<double> seed_plus_plus(const std::vector<double>& data, std::size_t n,
                                   std::size_t dim, std::size_t k, std::mt19937_64& rng) {
    std::vector<double> centroids(k * dim);
    std::uniform_int_distribution<std::size_t> first(0, n - 1);
    std::size_t c0 = first(rng);
    std::copy_n(data.data() + c0 * dim, dim, centroids.data());

    std::vector<double> weight(n);
    for (std::size_t i = 0; i < n; ++i) {
        weight[i] = kernels::sqdist_f64(data.data() + i * dim, centroids.data(), dim);
    }
    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (double w : weight) total += w;
        std::size_t pick = 0;
        if (total > 0.0) {
            std::uniform_real_distribution<double> u(0.0, total);
            double target = u(rng);
            double acc = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += weight[i];
                if (acc > target) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = first(rng);  // all mass on existing centroids
        }
        std::copy_n(data.data() + pick * dim, dim, centroids.data() + c * dim);
        for (std::size_t i = 0; i < n; ++i) {
            double d = kernels::sqdist_f64(data.data() + i * dim, centroids.data() + c * dim, dim);
            weight[i] = std::min(weight[i], d);
        }
    }
    return centroids;
}

RestartOutcome run_restart(const std::vector<double>& data, std::size_t n, std::size_t dim,
                           std::size_t k, std::uint64_t seed, std::uint32_t max_iter,
                           double tol) {
    std::mt19937_64 rng(seed);
    RestartOutcome out;
    out.centroids = seed_plus_plus(data, n, dim, k, rng);
    out.assignments.assign(n, 0);
    std::vector<double> dists(n);
    std::vector<double> next(k * dim);

    for (std::uint32_t iter = 0; iter < max_iter; ++iter) {
        double inertia = assign_points(data, n, dim, out.centroids, k, out.assignments, dists);
        if (repair_empty(n, k, out.assignments, dists)) {
            inertia = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                inertia += kernels::sqdist_f64(
                    data.data() + i * dim,
                    out.centroids.data() + std::size_t(out.assignments[i]) * dim, dim);
            }
        }
        out.inertia_history.push_back(inertia);
        out.iterations = iter + 1;

        next = out.centroids;
        update_centroids(data, n, dim, out.assignments, k, next);
        double shift = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            shift = std::max(shift,
                             std::sqrt(kernels::sqdist_f64(next.data() + c * dim,
                                                           out.centroids.data() + c * dim, dim)));
        }
        out.centroids = next;
        if (shift < tol) break;
    }
    out.inertia = assign_points(data, n, dim, out.centroids, k, out.assignments, dists);
    out.inertia_history.push_back(out.inertia);
    return out;
}

}  // namespace

KMeansResult kmeans(const EmbeddingSet& set, std::uint32_t k, std::uint64_t seed,
                    std::uint32_t restarts, std::uint32_t max_iter, double tol,
                    unsigned threads) {
    set.validate();
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (set.n < k) throw std::invalid_argument("n must be >= k");
    if (restarts < 1 || max_iter < 1) {
        throw std::invalid_argument("restarts and max_iter must be >= 1");
    }

    const std::size_t n = set.n, dim = set.dim;
    std::vector<double> data(n * dim);
    for (std::size_t i = 0; i < n * dim; ++i) data[i] = set.data[i];

    std::vector<RestartOutcome> outcomes(restarts);
    parallel_chunks(restarts, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            std::uint64_t stream = seed + 0x9e3779b97f4a7c15ULL * (r + 1);
            outcomes[r] = run_restart(data, n, dim, k, stream, max_iter, tol);
        }
    });

    std::size_t best = 0;
    for (std::size_t r = 1; r < restarts; ++r) {
        if (outcomes[r].inertia < outcomes[best].inertia) best = r;
    }
    KMeansResult result;
    result.centroids = std::move(outcomes[best].centroids);
    result.assignments = std::move(outcomes[best].assignments);
    result.inertia = outcomes[best].inertia;
    result.iterations = outcomes[best].iterations;
    result.best_restart = static_cast<std::uint32_t>(best);
    result.inertia_history = std::move(outcomes[best].inertia_history);
    return result;
}

}  // namespace unic
