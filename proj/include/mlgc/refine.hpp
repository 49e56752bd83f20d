#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mlgc/core_model.hpp"
#include "mlgc/graph.hpp"
#include "mlgc/matrix.hpp"
#include "mlgc/metric.hpp"
#include "mlgc/parallel.hpp"
#include "mlgc/spectral.hpp"

namespace mlgc {

enum class Verdict { Face, NonFace };

inline const char* to_string(Verdict v) noexcept { return v == Verdict::Face ? "face" : "nonface"; }

struct GroupVerdict {
    int group = 0;
    Verdict verdict = Verdict::NonFace;
    int votes_for = 0;
    int votes_against = 0;

    int size() const noexcept { return votes_for + votes_against; }
};

struct KeptDetection {
    std::size_t index = 0;
    Box box;
    double score = 0.0;  // original base score, never modified
};

struct RefinedDetections {
    std::string image_id;
    std::vector<KeptDetection> kept;
    std::vector<GroupVerdict> group_verdicts;
};

/// Each member votes face iff its score >= vote_threshold. Strict majority decides;
/// an exact tie goes to face iff the mean member score >= vote_threshold.
inline GroupVerdict vote_group(std::span<const std::size_t> members, std::span<const double> scores,
                               const Config& cfg, int group_id = 0) {
    if (members.empty()) throw Error(ErrorKind::Invariant, "vote_group: empty group");
    GroupVerdict v;
    v.group = group_id;
    double sum = 0.0;
    for (std::size_t m : members) {
        if (m >= scores.size()) throw Error(ErrorKind::Invariant, "vote_group: member index out of range");
        const double s = scores[m];
        sum += s;
        if (s >= cfg.vote_threshold)
            ++v.votes_for;
        else
            ++v.votes_against;
    }
    if (v.votes_for != v.votes_against)
        v.verdict = v.votes_for > v.votes_against ? Verdict::Face : Verdict::NonFace;
    else
        v.verdict = sum / static_cast<double>(members.size()) >= cfg.vote_threshold ? Verdict::Face : Verdict::NonFace;
    return v;
}

/// Intermediate matrices of one refinement, for debug dumps.
struct RefineTrace {
    SimilarityMatrix similarity;
    WeightMatrix weights;
    Laplacian laplacian;
    std::vector<double> eigenvalues;
    Partition partition;
};

/// similarity -> edge weights -> Laplacian -> spectral partition -> group votes.
/// Members of face groups are kept with their original scores.
inline RefinedDetections refine_image(const CandidateSet& set, const MetricModel& model, const Config& cfg,
                                      RefineTrace* trace = nullptr) {
    RefinedDetections out;
    out.image_id = set.image_id;
    const std::size_t n = set.size();
    if (n == 0) return out;

    const std::size_t dim = kPhiGeometryDim + set.deep_dim();
    if (dim != model.feature_dim)
        throw Error(ErrorKind::Dimension, "image '" + set.image_id + "': phi dimension " + std::to_string(dim) +
                                              " does not match model feature_dim " +
                                              std::to_string(model.feature_dim));

    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; ++i) scores[i] = set.candidates[i].score;

    Partition partition{1, std::vector<int>(n, 0)};
    if (n > 1) {
        const std::vector<PhiVector> ph = phis(set);
        SimilarityMatrix s = similarity_matrix(model, ph);
        WeightMatrix w = edge_weights(s, cfg);
        Laplacian l = laplacian(w);
        SpectralResult spectral = spectral_cluster_detailed(l, cfg);
        partition = spectral.partition;
        if (trace) *trace = {std::move(s), std::move(w), std::move(l), std::move(spectral.eigenvalues), partition};
    }

    const auto groups = partition.groups();
    std::vector<bool> keep(n, false);
    for (std::size_t g = 0; g < groups.size(); ++g) {
        GroupVerdict v = vote_group(groups[g], scores, cfg, static_cast<int>(g));
        if (v.verdict == Verdict::Face)
            for (std::size_t m : groups[g]) keep[m] = true;
        out.group_verdicts.push_back(v);
    }
    for (std::size_t i = 0; i < n; ++i)
        if (keep[i]) out.kept.push_back({i, set.candidates[i].box, scores[i]});
    return out;
}

struct ImageFailure {
    std::size_t position = 0;
    std::string image_id;
    std::string message;
    bool input_error = true;
};

struct CorpusRefinement {
    std::vector<RefinedDetections> results;  // successful images, input order
    std::vector<ImageFailure> failures;
};

/// Refines every image independently; a failing image is reported and skipped.
inline CorpusRefinement refine_corpus(std::span<const CandidateSet> sets, const MetricModel& model,
                                      const Config& cfg, std::size_t jobs = 1,
                                      std::vector<RefineTrace>* traces = nullptr) {
    std::vector<std::optional<RefinedDetections>> slots(sets.size());
    std::vector<std::optional<ImageFailure>> errors(sets.size());
    if (traces) traces->assign(sets.size(), RefineTrace{});
    parallel_for(sets.size(), jobs, [&](std::size_t i) {
        try {
            slots[i] = refine_image(sets[i], model, cfg, traces ? &(*traces)[i] : nullptr);
        } catch (const Error& e) {
            errors[i] = ImageFailure{i, sets[i].image_id, e.what(), e.is_input_error()};
        } catch (const std::exception& e) {
            errors[i] = ImageFailure{i, sets[i].image_id, e.what(), false};
        }
    });
    CorpusRefinement out;
    for (std::size_t i = 0; i < sets.size(); ++i) {
        if (slots[i]) out.results.push_back(std::move(*slots[i]));
        if (errors[i]) out.failures.push_back(std::move(*errors[i]));
    }
    return out;
}

}  // namespace mlgc
