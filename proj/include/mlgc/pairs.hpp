#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "mlgc/core_model.hpp"
#include "mlgc/metric.hpp"

namespace mlgc {

/// One labelled training pair x'_ij = phi_i - phi_j from a single image.
struct PairSample {
    std::vector<double> feature;
    int label = 0;
    std::string image_id;
    std::size_t i = 0;
    std::size_t j = 0;
};

struct TopBottomSplit {
    std::vector<std::size_t> top;
    std::vector<std::size_t> bottom;
};

/// Number of items covered by a fraction of n, rounded up. The small epsilon
/// keeps e.g. 0.1 * 20 from rounding up to 3.
inline std::size_t fraction_count(double frac, std::size_t n) {
    const double raw = frac * static_cast<double>(n);
    const double c = std::ceil(raw - 1e-9 * std::max(1.0, raw));
    return static_cast<std::size_t>(std::max(0.0, c));
}

/// Score-descending order (ties by index); top = first ceil(top_frac N), bottom =
/// last ceil(bottom_frac N), capped so the two never overlap.
inline TopBottomSplit split_top_bottom(const CandidateSet& set, const Config& cfg) {
    const std::size_t n = set.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return set.candidates[a].score > set.candidates[b].score;
    });
    const std::size_t n_top = std::min(fraction_count(cfg.top_frac, n), n);
    const std::size_t n_bottom = std::min(fraction_count(cfg.bottom_frac, n), n - n_top);
    TopBottomSplit out;
    out.top.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_top));
    out.bottom.assign(order.end() - static_cast<std::ptrdiff_t>(n_bottom), order.end());
    return out;
}

/// Label-1 pairs for every unordered top pair (i<j by candidate index), label-0
/// pairs directed top -> bottom. Pairs never cross images. Output order is
/// (set order, i, j) ascending.
inline std::vector<PairSample> build_training_pairs(std::span<const CandidateSet> sets, const Config& cfg) {
    std::vector<PairSample> out;
    for (const CandidateSet& set : sets) {
        if (set.size() < 2) continue;
        const std::vector<PhiVector> ph = phis(set);
        TopBottomSplit split = split_top_bottom(set, cfg);
        std::sort(split.top.begin(), split.top.end());
        std::sort(split.bottom.begin(), split.bottom.end());

        std::vector<PairSample> local;
        for (std::size_t a = 0; a < split.top.size(); ++a)
            for (std::size_t b = a + 1; b < split.top.size(); ++b) {
                const std::size_t i = split.top[a], j = split.top[b];
                local.push_back({pair_feature(ph[i], ph[j]), 1, set.image_id, i, j});
            }
        for (std::size_t i : split.top)
            for (std::size_t j : split.bottom) local.push_back({pair_feature(ph[i], ph[j]), 0, set.image_id, i, j});
        std::stable_sort(local.begin(), local.end(), [](const PairSample& x, const PairSample& y) {
            return x.i != y.i ? x.i < y.i : x.j < y.j;
        });
        std::move(local.begin(), local.end(), std::back_inserter(out));
    }
    if (out.empty()) throw Error(ErrorKind::Training, "build_training_pairs: no training pairs in any image");
    return out;
}

/// Every PhiVector of every set, used to fit the standardizer.
inline std::vector<PhiVector> phi_pool(std::span<const CandidateSet> sets) {
    std::vector<PhiVector> pool;
    for (const CandidateSet& set : sets) {
        auto ph = phis(set);
        std::move(ph.begin(), ph.end(), std::back_inserter(pool));
    }
    return pool;
}

/// Builds pairs, fits standardization on all candidates and trains the SVM.
inline MetricModel train_from_candidates(std::span<const CandidateSet> sets, const Config& cfg,
                                         std::vector<PairSample>* pairs_out = nullptr) {
    std::vector<PairSample> pairs = build_training_pairs(sets, cfg);
    const std::vector<PhiVector> pool = phi_pool(sets);
    MetricModel model = train_metric(pairs, cfg, fit_standardizer(pool));
    if (pairs_out) *pairs_out = std::move(pairs);
    return model;
}

}  // namespace mlgc
