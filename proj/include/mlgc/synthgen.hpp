#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "mlgc/core_model.hpp"
#include "mlgc/random.hpp"

namespace mlgc {

/// Parameters of a synthetic corpus with planted face crowds.
struct GenSpec {
    int n_images = 20;
    int faces_per_image = 15;
    int bg_per_image = 25;
    double cluster_spread = 0.05;
    double feature_noise = 0.1;
    double score_overlap = 0.3;
    int d_deep = 16;
    std::uint64_t seed = 1;

    void validate() const {
        auto fail = [](const std::string& m) { throw Error(ErrorKind::Parameter, "gen spec: " + m); };
        if (n_images < 0 || faces_per_image < 0 || bg_per_image < 0 || d_deep < 0) fail("counts must be >= 0");
        if (!(cluster_spread >= 0.0) || !(feature_noise >= 0.0)) fail("spread and noise must be >= 0");
        if (!(score_overlap >= 0.0 && score_overlap <= 1.0)) fail("score_overlap must be in [0,1]");
    }
};

struct GeneratedCorpus {
    std::vector<CandidateSet> sets;
    std::vector<std::vector<int>> labels;  // 1 = face, per candidate
    std::vector<GroundTruth> gts;
};

namespace synth {

inline constexpr double kImageW = 1024.0;
inline constexpr double kImageH = 768.0;
/// Score split point used to place overlapping faces and backgrounds.
inline constexpr double kScoreThreshold = 0.5;
inline constexpr std::uint64_t kFaceAxisSeed = 0x6d6c6763;
inline constexpr double kPrototypeJitter = 0.5;
inline constexpr double kBackgroundTextureScale = 1.0;

inline double truncated_normal(Rng& rng, double limit) {
    double z;
    do {
        z = rng.normal();
    } while (std::abs(z) > limit);
    return z;
}

inline std::vector<double> gaussian_vector(Rng& rng, std::size_t d, double stddev) {
    std::vector<double> v(d);
    for (double& x : v) x = stddev * rng.normal();
    return v;
}

inline void normalize(std::vector<double>& v) {
    double n = 0.0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    if (n > 0.0)
        for (double& x : v) x /= n;
}

inline std::string image_name(int i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "synth_%04d", i);
    return buf;
}

}  // namespace synth

/// Deterministic corpus generator.
///
/// Each image has one crowd latent (center, base face size, texture prototype).
/// Faces scatter around the crowd center with relative spread `cluster_spread`
/// and carry prototype + `feature_noise` textures; backgrounds are uniform in
/// location and scale with independent textures. Prototypes lean towards a
/// fixed face direction so that face texture is a shared cue across corpora. Ground
/// truth boxes are the noiseless face boxes; candidates jitter around them.
inline GeneratedCorpus generate(const GenSpec& spec) {
    spec.validate();
    using namespace synth;
    Rng master(spec.seed);
    const auto d = static_cast<std::size_t>(spec.d_deep);
    const double unit_sd = d > 0 ? 1.0 / std::sqrt(static_cast<double>(d)) : 0.0;

    // The face direction belongs to the simulated detector, not to a corpus, so
    // corpora generated with different seeds share it.
    Rng axis_rng(kFaceAxisSeed + d);
    std::vector<double> face_axis = gaussian_vector(axis_rng, d, 1.0);
    normalize(face_axis);

    GeneratedCorpus out;
    for (int img = 0; img < spec.n_images; ++img) {
        Rng rng(master.next_u64());

        const double crowd_x = rng.uniform(0.25, 0.75) * kImageW;
        const double crowd_y = rng.uniform(0.25, 0.75) * kImageH;
        const double base_h = std::exp(rng.uniform(std::log(12.0), std::log(40.0)));
        const double base_aspect = 0.8;
        std::vector<double> prototype = face_axis;
        for (std::size_t k = 0; k < d; ++k) prototype[k] += kPrototypeJitter * unit_sd * rng.normal();
        normalize(prototype);

        const int n_faces = spec.faces_per_image;
        const int n_bg = spec.bg_per_image;
        const long low_faces = std::lround(spec.score_overlap * n_faces);
        const long high_bg = std::lround(spec.score_overlap * n_bg);

        struct Item {
            Candidate cand;
            int label;
        };
        std::vector<Item> items;
        GroundTruth gt{image_name(img), {}};

        std::vector<int> face_rank(static_cast<std::size_t>(n_faces));
        for (int i = 0; i < n_faces; ++i) face_rank[static_cast<std::size_t>(i)] = i;
        rng.shuffle(face_rank);
        for (int f = 0; f < n_faces; ++f) {
            const double spread = spec.cluster_spread;
            const double cx = crowd_x + spread * kImageW * rng.normal();
            const double cy = crowd_y + spread * kImageH * rng.normal();
            const double h = base_h * std::exp(spread * rng.normal());
            const double w = base_aspect * h * std::exp(spread * rng.normal());
            const Box truth{cx - 0.5 * w, cy - 0.5 * h, w, h};
            gt.boxes.push_back(truth);

            const double jitter = 0.5 * spread;
            const double jx = cx + jitter * w * truncated_normal(rng, 2.0);
            const double jy = cy + jitter * h * truncated_normal(rng, 2.0);
            const double jw = w * std::exp(jitter * truncated_normal(rng, 2.0));
            const double jh = h * std::exp(jitter * truncated_normal(rng, 2.0));

            Candidate c;
            c.box = {jx - 0.5 * jw, jy - 0.5 * jh, jw, jh};
            const bool low = face_rank[static_cast<std::size_t>(f)] < low_faces;
            c.score = low ? rng.uniform(0.35, kScoreThreshold) : rng.uniform(0.55, 0.95);
            c.features = prototype;
            for (std::size_t k = 0; k < d; ++k) c.features[k] += spec.feature_noise * unit_sd * rng.normal();
            items.push_back({std::move(c), 1});
        }

        std::vector<int> bg_rank(static_cast<std::size_t>(n_bg));
        for (int i = 0; i < n_bg; ++i) bg_rank[static_cast<std::size_t>(i)] = i;
        rng.shuffle(bg_rank);
        for (int b = 0; b < n_bg; ++b) {
            const double h = std::exp(rng.uniform(std::log(8.0), std::log(120.0)));
            const double w = h * std::exp(rng.uniform(std::log(0.5), std::log(2.0)));
            const double cx = rng.uniform(0.0, kImageW);
            const double cy = rng.uniform(0.0, kImageH);
            Candidate c;
            c.box = {cx - 0.5 * w, cy - 0.5 * h, w, h};
            const bool high = bg_rank[static_cast<std::size_t>(b)] < high_bg;
            c.score = high ? rng.uniform(kScoreThreshold, 0.65) : rng.uniform(0.0, 0.45);
            c.features = gaussian_vector(rng, d, kBackgroundTextureScale * unit_sd);
            items.push_back({std::move(c), 0});
        }

        rng.shuffle(items);
        CandidateSet set{image_name(img), kImageW, kImageH, {}};
        std::vector<int> labels;
        for (Item& it : items) {
            set.candidates.push_back(std::move(it.cand));
            labels.push_back(it.label);
        }
        out.sets.push_back(std::move(set));
        out.labels.push_back(std::move(labels));
        out.gts.push_back(std::move(gt));
    }
    return out;
}

}  // namespace mlgc
