#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "mlgc/core_model.hpp"
#include "mlgc/matrix.hpp"
#include "mlgc/random.hpp"

namespace mlgc {

/// Eigenpairs of a symmetric matrix; column j of `vectors` pairs with values[j].
struct Eigendecomposition {
    std::vector<double> values;
    SquareMatrix vectors;
};

struct JacobiOptions {
    double relative_tolerance = 1e-12;
    int max_sweeps = 100;
};

/// Full symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Sweeps until the off-diagonal Frobenius norm drops to
/// relative_tolerance * ||A||_F. Eigenvalues come back ascending (stable for
/// ties) and each eigenvector's first non-negligible component is positive.
inline Eigendecomposition eigh(const SquareMatrix& input, JacobiOptions opts = {}) {
    if (!input.all_finite()) throw Error(ErrorKind::Numeric, "eigh: non-finite matrix entry");
    if (!input.is_symmetric()) throw Error(ErrorKind::Numeric, "eigh: matrix is not symmetric");

    const std::size_t n = input.size();
    SquareMatrix a = input;
    SquareMatrix v = SquareMatrix::identity(n);
    const double threshold = opts.relative_tolerance * input.frobenius_norm();

    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
        return std::sqrt(s);
    };

    bool converged = off_norm() <= threshold;
    for (int sweep = 0; sweep < opts.max_sweeps && !converged; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                double t;
                if (std::abs(theta) > 1e150)
                    t = 0.5 / theta;
                else
                    t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (std::size_t k = 0; k < n; ++k) {
                    if (k == p || k == q) continue;
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = a(p, k) = c * akp - s * akq;
                    a(k, q) = a(q, k) = s * akp + c * akq;
                }
                a(p, p) -= t * apq;
                a(q, q) += t * apq;
                a(p, q) = a(q, p) = 0.0;

                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        converged = off_norm() <= threshold;
    }
    if (!converged) throw Error(ErrorKind::Numeric, "eigh: Jacobi iteration did not converge");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });

    Eigendecomposition out{std::vector<double>(n), SquareMatrix(n)};
    for (std::size_t col = 0; col < n; ++col) {
        const std::size_t src = order[col];
        out.values[col] = a(src, src);
        double sign = 1.0;
        for (std::size_t k = 0; k < n; ++k)
            if (std::abs(v(k, src)) > 1e-12) {
                sign = v(k, src) < 0.0 ? -1.0 : 1.0;
                break;
            }
        for (std::size_t k = 0; k < n; ++k) out.vectors(k, col) = sign * v(k, src);
    }
    return out;
}

inline Eigendecomposition eigh(const Laplacian& l, JacobiOptions opts = {}) { return eigh(l.matrix(), opts); }

/// Rows of the first k eigenvectors (ascending eigenvalue).
struct Embedding {
    std::size_t n = 0;
    std::size_t k = 0;
    std::vector<std::vector<double>> rows;
    std::vector<double> eigenvalues;
};

inline Embedding embed(const Eigendecomposition& eig, std::size_t k) {
    const std::size_t n = eig.values.size();
    if (k < 1 || k > n)
        throw Error(ErrorKind::Parameter,
                    "embed: k=" + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
    Embedding e{n, k, std::vector<std::vector<double>>(n, std::vector<double>(k)),
                std::vector<double>(eig.values.begin(), eig.values.begin() + static_cast<std::ptrdiff_t>(k))};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j) e.rows[i][j] = eig.vectors(i, j);
    return e;
}

inline Embedding embed(const Laplacian& l, std::size_t k) {
    if (k < 1 || k > l.size())
        throw Error(ErrorKind::Parameter,
                    "embed: k=" + std::to_string(k) + " outside [1, " + std::to_string(l.size()) + "]");
    return embed(eigh(l), k);
}

namespace detail {

inline double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

}  // namespace detail

inline constexpr int kKmeansMaxIterations = 100;

/// k-means++ seeding followed by Lloyd iterations.
///
/// Stops when assignments no longer change or after 100 iterations. A cluster
/// that empties is reseeded with the point farthest from its own centroid.
/// Group ids are relabelled by first appearance.
inline Partition kmeans(const std::vector<std::vector<double>>& rows, std::size_t k, std::uint64_t seed) {
    const std::size_t n = rows.size();
    if (k < 1 || n < k)
        throw Error(ErrorKind::Parameter,
                    "kmeans: need n >= k >= 1 (n=" + std::to_string(n) + ", k=" + std::to_string(k) + ")");
    const std::size_t dim = rows.front().size();
    for (const auto& r : rows)
        if (r.size() != dim) throw Error(ErrorKind::Dimension, "kmeans: ragged input rows");

    Rng rng(seed);
    std::vector<std::vector<double>> centers;
    centers.reserve(k);
    std::vector<bool> chosen(n, false);
    {
        const std::size_t first = rng.index(n);
        centers.push_back(rows[first]);
        chosen[first] = true;
        std::vector<double> d2(n);
        for (std::size_t i = 0; i < n; ++i) d2[i] = detail::squared_distance(rows[i], centers[0]);
        while (centers.size() < k) {
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) total += d2[i];
            std::size_t pick = n;
            if (total > 0.0) {
                const double r = rng.uniform() * total;
                double acc = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (d2[i] <= 0.0) continue;
                    acc += d2[i];
                    pick = i;
                    if (acc > r) break;
                }
            } else {
                for (std::size_t i = 0; i < n && pick == n; ++i)
                    if (!chosen[i]) pick = i;
            }
            chosen[pick] = true;
            centers.push_back(rows[pick]);
            for (std::size_t i = 0; i < n; ++i)
                d2[i] = std::min(d2[i], detail::squared_distance(rows[i], centers.back()));
        }
    }

    std::vector<int> assign(n, -1);
    auto assign_points = [&] {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_d = detail::squared_distance(rows[i], centers[0]);
            for (std::size_t c = 1; c < k; ++c) {
                const double d = detail::squared_distance(rows[i], centers[c]);
                if (d < best_d) {
                    best_d = d;
                    best = static_cast<int>(c);
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
        }
        return changed;
    };
    auto reseed_empty = [&] {
        std::vector<std::size_t> sizes(k, 0);
        for (int g : assign) ++sizes[static_cast<std::size_t>(g)];
        for (std::size_t c = 0; c < k; ++c) {
            if (sizes[c] != 0) continue;
            std::size_t far = n;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                const auto g = static_cast<std::size_t>(assign[i]);
                if (sizes[g] < 2) continue;
                const double d = detail::squared_distance(rows[i], centers[g]);
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            --sizes[static_cast<std::size_t>(assign[far])];
            assign[far] = static_cast<int>(c);
            ++sizes[c];
            centers[c] = rows[far];
        }
    };
    auto update_centers = [&] {
        std::vector<std::size_t> sizes(k, 0);
        for (auto& c : centers) std::fill(c.begin(), c.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto g = static_cast<std::size_t>(assign[i]);
            ++sizes[g];
            for (std::size_t d = 0; d < dim; ++d) centers[g][d] += rows[i][d];
        }
        for (std::size_t c = 0; c < k; ++c)
            for (double& v : centers[c]) v /= static_cast<double>(sizes[c]);
    };

    assign_points();
    reseed_empty();
    for (int iter = 0; iter < kKmeansMaxIterations; ++iter) {
        update_centers();
        const std::vector<int> before = assign;
        assign_points();
        reseed_empty();
        if (assign == before) break;
    }
    return Partition{static_cast<int>(k), assign}.canonical();
}

/// Eigengap heuristic: the k in [1, min(k_max, n-1)] maximizing lambda_{k+1} - lambda_k
/// (1-based), ties to the smaller k.
inline std::size_t choose_k(std::span<const double> eigenvalues, std::size_t k_max) {
    if (eigenvalues.size() < 2) throw Error(ErrorKind::Parameter, "choose_k: need at least 2 eigenvalues");
    const std::size_t upper = std::min(k_max, eigenvalues.size() - 1);
    std::size_t best = 1;
    double best_gap = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i <= upper; ++i) {
        const double gap = eigenvalues[i] - eigenvalues[i - 1];
        if (gap > best_gap) {
            best_gap = gap;
            best = i;
        }
    }
    return best;
}

struct SpectralResult {
    Partition partition;
    std::vector<double> eigenvalues;  // full ascending spectrum of L
    std::size_t k = 1;
};

inline SpectralResult spectral_cluster_detailed(const Laplacian& l, const Config& cfg) {
    const std::size_t n = l.size();
    if (n == 0) throw Error(ErrorKind::Parameter, "spectral_cluster: empty graph");
    if (n == 1) return {Partition{1, {0}}, {l(0, 0)}, 1};
    Eigendecomposition eig = eigh(l);
    const std::size_t k = choose_k(eig.values, static_cast<std::size_t>(cfg.k_max));
    const Embedding u = embed(eig, k);
    return {kmeans(u.rows, k, cfg.rng_seed), std::move(eig.values), k};
}

/// Ratio-cut relaxation: eigengap k, first-k eigenvector embedding, k-means.
inline Partition spectral_cluster(const Laplacian& l, const Config& cfg) {
    return spectral_cluster_detailed(l, cfg).partition;
}

}  // namespace mlgc
