#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <numeric>
#include <ranges>
#include <span>
#include <string>
#include <vector>

#include "mlgc/core_model.hpp"
#include "mlgc/matrix.hpp"
#include "mlgc/random.hpp"

namespace mlgc {

/// Number of geometric/score entries ahead of the deep features in a PhiVector.
inline constexpr std::size_t kPhiGeometryDim = 5;

/// Per-candidate semantic feature:
/// [cx/image_w, cy/image_h, log(w*h), log(w/h), score, deep...].
struct PhiVector {
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
    friend bool operator==(const PhiVector&, const PhiVector&) = default;
};

inline PhiVector phi(const Candidate& c, double image_w, double image_h) {
    PhiVector out;
    out.values.reserve(kPhiGeometryDim + c.features.size());
    out.values.push_back(c.box.center_x() / image_w);
    out.values.push_back(c.box.center_y() / image_h);
    out.values.push_back(std::log(c.box.w * c.box.h));
    out.values.push_back(std::log(c.box.w / c.box.h));
    out.values.push_back(c.score);
    out.values.insert(out.values.end(), c.features.begin(), c.features.end());
    return out;
}

inline std::vector<PhiVector> phis(const CandidateSet& set) {
    std::vector<PhiVector> out;
    out.reserve(set.size());
    for (const Candidate& c : set.candidates) out.push_back(phi(c, set.image_w, set.image_h));
    return out;
}

/// Element-wise a - b.
inline std::vector<double> pair_feature(const PhiVector& a, const PhiVector& b) {
    if (a.size() != b.size())
        throw Error(ErrorKind::Dimension, "pair_feature: length " + std::to_string(a.size()) +
                                              " vs " + std::to_string(b.size()));
    std::vector<double> out(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) out[k] = a.values[k] - b.values[k];
    return out;
}

/// Per-dimension affine standardization (v - mean) / std fitted on a pool of PhiVectors.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> stddev;

    static Standardizer identity(std::size_t dim) {
        return {std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)};
    }

    std::size_t size() const noexcept { return mean.size(); }
};

/// Dimensions with (near) zero spread get unit scale.
inline Standardizer fit_standardizer(std::span<const PhiVector> pool) {
    if (pool.empty()) throw Error(ErrorKind::Training, "fit_standardizer: empty pool");
    const std::size_t dim = pool.front().size();
    Standardizer s{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
    for (const PhiVector& p : pool) {
        if (p.size() != dim) throw Error(ErrorKind::Dimension, "fit_standardizer: inconsistent dimension");
        for (std::size_t k = 0; k < dim; ++k) s.mean[k] += p.values[k];
    }
    const double n = static_cast<double>(pool.size());
    for (double& m : s.mean) m /= n;
    for (const PhiVector& p : pool)
        for (std::size_t k = 0; k < dim; ++k) {
            const double d = p.values[k] - s.mean[k];
            s.stddev[k] += d * d;
        }
    for (double& v : s.stddev) {
        v = std::sqrt(v / n);
        if (!(v > 1e-12)) v = 1.0;
    }
    return s;
}

/// Linear SVM over standardized pair features.
///
/// Decision value of a raw pair feature v is
///   g(v) = platt_scale * (sum_k weights[k] * v[k] / standardize_std[k] + bias).
/// The mean cancels in a difference of two standardized vectors, so it only
/// travels with the model for inspection.
struct MetricModel {
    std::vector<double> weights;
    double bias = 0.0;
    double platt_scale = 1.0;
    std::size_t feature_dim = 0;
    std::vector<double> standardize_mean;
    std::vector<double> standardize_std;

    void validate() const {
        auto fail = [](const std::string& m) { throw Error(ErrorKind::Schema, "model: " + m); };
        if (weights.size() != feature_dim) fail("weights length != feature_dim");
        if (standardize_mean.size() != feature_dim || standardize_std.size() != feature_dim)
            fail("standardization vectors must have length feature_dim");
        if (!(platt_scale > 0.0) || !std::isfinite(platt_scale)) fail("platt_scale must be > 0");
        if (!std::isfinite(bias)) fail("bias must be finite");
        for (std::size_t k = 0; k < feature_dim; ++k)
            if (!std::isfinite(weights[k]) || !std::isfinite(standardize_mean[k]) ||
                !(standardize_std[k] > 0.0) || !std::isfinite(standardize_std[k]))
                fail("non-finite or non-positive entry at " + std::to_string(k));
    }

    friend bool operator==(const MetricModel&, const MetricModel&) = default;
};

inline double logistic(double z) noexcept {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

inline double decision_value(const MetricModel& model, std::span<const double> pair) {
    if (pair.size() != model.feature_dim)
        throw Error(ErrorKind::Dimension, "decision_value: pair length " + std::to_string(pair.size()) +
                                              " != model feature_dim " +
                                              std::to_string(model.feature_dim));
    double acc = model.bias;
    for (std::size_t k = 0; k < pair.size(); ++k)
        acc += model.weights[k] * (pair[k] / model.standardize_std[k]);
    return model.platt_scale * acc;
}

/// Predicted pair label at the 0.5 probability threshold.
inline int predict_label(const MetricModel& model, std::span<const double> pair) {
    return decision_value(model, pair) >= 0.0 ? 1 : 0;
}

/// Symmetrized similarity 0.5 * [sigma(g(a-b)) + sigma(g(b-a))]; exactly symmetric in (a,b).
inline double similarity(const MetricModel& model, const PhiVector& a, const PhiVector& b) {
    if (a.size() != model.feature_dim || b.size() != model.feature_dim)
        throw Error(ErrorKind::Dimension, "similarity: phi length does not match model feature_dim " +
                                              std::to_string(model.feature_dim));
    const std::vector<double> ab = pair_feature(a, b);
    const std::vector<double> ba = pair_feature(b, a);
    return 0.5 * (logistic(decision_value(model, ab)) + logistic(decision_value(model, ba)));
}

/// S[i][j] = similarity(phi_i, phi_j) off the diagonal, 1 on it.
inline SimilarityMatrix similarity_matrix(const MetricModel& model, std::span<const PhiVector> phis) {
    const std::size_t n = phis.size();
    SquareMatrix s(n);
    for (std::size_t i = 0; i < n; ++i) {
        s(i, i) = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = similarity(model, phis[i], phis[j]);
            s(i, j) = v;
            s(j, i) = v;
        }
    }
    return SimilarityMatrix(std::move(s));
}

template <class T>
concept LabeledSample = requires(const T& t) {
    { t.feature } -> std::convertible_to<const std::vector<double>&>;
    { t.label } -> std::convertible_to<int>;
};

struct LabeledPair {
    std::vector<double> feature;
    int label = 0;
};

/// Primal objective lambda/2 ||w||^2 + mean hinge, lambda = 1/(C n), bias regularized.
struct SvmProgress {
    int epochs = 0;
    double objective = 0.0;
    bool converged = false;
};

/// Fits the pair classifier by hinge-loss minimization with L2 regularization.
///
/// Solver: dual coordinate descent over samples in a seeded shuffled order each
/// epoch. The bias is folded in as a constant unit feature and regularized with
/// the weights. Training stops once the primal objective changes by less than
/// cfg.svm_tol over an epoch, or after cfg.svm_max_epochs epochs.
template <std::ranges::random_access_range R>
    requires LabeledSample<std::ranges::range_value_t<R>>
MetricModel train_metric(const R& samples, const Config& cfg, const Standardizer& standardizer,
                         SvmProgress* progress = nullptr) {
    const std::size_t n = std::ranges::size(samples);
    if (n == 0) throw Error(ErrorKind::Training, "train_metric: no training pairs");
    const std::size_t dim = std::ranges::begin(samples)->feature.size();
    if (standardizer.size() != dim)
        throw Error(ErrorKind::Dimension, "train_metric: standardizer dimension " +
                                              std::to_string(standardizer.size()) + " != pair dimension " +
                                              std::to_string(dim));

    std::size_t positives = 0;
    const std::size_t aug = dim + 1;
    std::vector<double> x(n * aug);
    std::vector<double> y(n);
    std::vector<double> qdiag(n);
    std::size_t row = 0;
    for (const auto& s : samples) {
        if (s.feature.size() != dim)
            throw Error(ErrorKind::Dimension, "train_metric: pair " + std::to_string(row) + " has length " +
                                                  std::to_string(s.feature.size()) + ", expected " +
                                                  std::to_string(dim));
        if (s.label != 0 && s.label != 1)
            throw Error(ErrorKind::Training, "train_metric: label must be 0 or 1");
        positives += s.label == 1;
        y[row] = s.label == 1 ? 1.0 : -1.0;
        double q = 0.0;
        for (std::size_t k = 0; k < dim; ++k) {
            const double v = s.feature[k] / standardizer.stddev[k];
            if (!std::isfinite(v)) throw Error(ErrorKind::Training, "train_metric: non-finite feature");
            x[row * aug + k] = v;
            q += v * v;
        }
        x[row * aug + dim] = 1.0;
        qdiag[row] = q + 1.0;
        ++row;
    }
    if (positives == 0 || positives == n)
        throw Error(ErrorKind::Training, "train_metric: training pairs contain a single class");

    const double c = cfg.svm_c;
    std::vector<double> w(aug, 0.0);
    std::vector<double> alpha(n, 0.0);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(cfg.rng_seed);

    auto margin = [&](std::size_t i) {
        double acc = 0.0;
        const double* xi = &x[i * aug];
        for (std::size_t k = 0; k < aug; ++k) acc += w[k] * xi[k];
        return y[i] * acc;
    };
    auto objective = [&] {
        double reg = 0.0;
        for (double v : w) reg += v * v;
        double hinge = 0.0;
        for (std::size_t i = 0; i < n; ++i) hinge += std::max(0.0, 1.0 - margin(i));
        return (0.5 * reg + c * hinge) / (c * static_cast<double>(n));
    };

    SvmProgress prog;
    double previous = objective();
    for (int epoch = 1; epoch <= cfg.svm_max_epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t i : order) {
            const double g = margin(i) - 1.0;
            double pg = g;
            if (alpha[i] <= 0.0)
                pg = std::min(g, 0.0);
            else if (alpha[i] >= c)
                pg = std::max(g, 0.0);
            if (pg == 0.0) continue;
            const double old = alpha[i];
            alpha[i] = std::clamp(old - g / qdiag[i], 0.0, c);
            const double step = (alpha[i] - old) * y[i];
            if (step == 0.0) continue;
            const double* xi = &x[i * aug];
            for (std::size_t k = 0; k < aug; ++k) w[k] += step * xi[k];
        }
        const double current = objective();
        prog.epochs = epoch;
        prog.objective = current;
        if (std::abs(previous - current) < cfg.svm_tol) {
            prog.converged = true;
            break;
        }
        previous = current;
    }
    if (progress) *progress = prog;

    MetricModel model;
    model.weights.assign(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(dim));
    model.bias = w[dim];
    model.platt_scale = 1.0;
    model.feature_dim = dim;
    model.standardize_mean = standardizer.mean;
    model.standardize_std = standardizer.stddev;
    return model;
}

/// Trains without feature scaling.
template <std::ranges::random_access_range R>
    requires LabeledSample<std::ranges::range_value_t<R>>
MetricModel train_metric(const R& samples, const Config& cfg) {
    if (std::ranges::empty(samples)) throw Error(ErrorKind::Training, "train_metric: no training pairs");
    return train_metric(samples, cfg, Standardizer::identity(std::ranges::begin(samples)->feature.size()));
}

}  // namespace mlgc
