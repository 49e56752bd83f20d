#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "mlgc/core_model.hpp"
#include "mlgc/matrix.hpp"

namespace mlgc {

/// Gaussian-style kernel on the similarity matrix; zero diagonal.
inline WeightMatrix edge_weights(const SimilarityMatrix& s, const Config& cfg) {
    const std::size_t n = s.size();
    const double denom = 2.0 * cfg.delta * cfg.delta;
    SquareMatrix w(n);
    for (std::size_t m = 0; m < n; ++m)
        for (std::size_t k = m + 1; k < n; ++k) {
            const double smk = s(m, k);
            const double exponent = cfg.weight_mode == WeightMode::Dissimilarity ? -(1.0 - smk) / denom : -smk / denom;
            const double v = std::exp(exponent);
            w(m, k) = v;
            w(k, m) = v;
        }
    return WeightMatrix(std::move(w));
}

namespace detail {

inline void check_sizes(const WeightMatrix& w, const Partition& p, const char* op) {
    if (p.size() != w.size())
        throw Error(ErrorKind::Dimension, std::string(op) + ": partition has " + std::to_string(p.size()) +
                                              " vertices, weight matrix has " + std::to_string(w.size()));
    for (int g : p.assign)
        if (g < 0 || g >= p.k) throw Error(ErrorKind::Invariant, std::string(op) + ": group id out of range");
}

/// W(A_g, complement of A_g) for every group g.
inline std::vector<double> boundary_weights(const WeightMatrix& w, const Partition& p) {
    std::vector<double> out(static_cast<std::size_t>(p.k), 0.0);
    for (std::size_t m = 0; m < w.size(); ++m)
        for (std::size_t n = 0; n < w.size(); ++n)
            if (p.assign[m] != p.assign[n]) out[static_cast<std::size_t>(p.assign[m])] += w(m, n);
    return out;
}

}  // namespace detail

/// 1/2 * sum_g W(A_g, ~A_g).
inline double cut_value(const WeightMatrix& w, const Partition& p) {
    detail::check_sizes(w, p, "cut_value");
    double total = 0.0;
    for (double b : detail::boundary_weights(w, p)) total += b;
    return 0.5 * total;
}

/// 1/2 * sum_g W(A_g, ~A_g) / |A_g|. Every group must be non-empty.
inline double ratio_cut_value(const WeightMatrix& w, const Partition& p) {
    detail::check_sizes(w, p, "ratio_cut_value");
    const std::vector<std::size_t> sizes = p.group_sizes();
    for (std::size_t g = 0; g < sizes.size(); ++g)
        if (sizes[g] == 0)
            throw Error(ErrorKind::Invariant, "ratio_cut_value: group " + std::to_string(g) + " is empty");
    const std::vector<double> boundary = detail::boundary_weights(w, p);
    double total = 0.0;
    for (std::size_t g = 0; g < sizes.size(); ++g) total += boundary[g] / static_cast<double>(sizes[g]);
    return 0.5 * total;
}

/// Unnormalized Laplacian L = D - W.
inline Laplacian laplacian(const WeightMatrix& w) {
    const std::size_t n = w.size();
    SquareMatrix l(n);
    for (std::size_t i = 0; i < n; ++i) {
        double degree = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            degree += w(i, j);
            l(i, j) = -w(i, j);
        }
        l(i, i) = degree;
    }
    return Laplacian(std::move(l));
}

}  // namespace mlgc
