#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "mlgc/core_model.hpp"
#include "mlgc/parallel.hpp"

namespace mlgc {

inline double iou(const Box& a, const Box& b) noexcept {
    const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
    const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
    const double inter = ix * iy;
    if (inter <= 0.0) return 0.0;
    const double uni = a.area() + b.area() - inter;
    return std::clamp(inter / uni, 0.0, 1.0);
}

struct ScoredBox {
    Box box;
    double score = 0.0;
};

struct MatchResult {
    std::vector<bool> true_positive;  // per detection, input order
    std::vector<bool> gt_matched;     // per ground-truth box
};

/// Greedy matching in score-descending order (ties by input order). Each detection
/// claims the unmatched ground truth of highest IoU >= iou_threshold.
inline MatchResult match_detections(std::span<const ScoredBox> dets, std::span<const Box> gts,
                                    double iou_threshold) {
    MatchResult out{std::vector<bool>(dets.size(), false), std::vector<bool>(gts.size(), false)};
    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });
    for (std::size_t d : order) {
        std::size_t best = gts.size();
        double best_iou = -1.0;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (out.gt_matched[g]) continue;
            const double v = iou(dets[d].box, gts[g]);
            if (v >= iou_threshold && v > best_iou) {
                best_iou = v;
                best = g;
            }
        }
        if (best < gts.size()) {
            out.true_positive[d] = true;
            out.gt_matched[best] = true;
        }
    }
    return out;
}

struct FlaggedDetection {
    double score = 0.0;
    bool true_positive = false;
};

struct PRPoint {
    double threshold = 0.0;
    double recall = 0.0;
    double precision = 0.0;
};

struct PRCurve {
    std::vector<PRPoint> points;  // score-descending
    double ap = 0.0;
};

/// All-points interpolated AP: the area under the running-max precision envelope.
inline PRCurve average_precision(std::span<const FlaggedDetection> dets, std::size_t total_gt) {
    if (total_gt == 0) throw Error(ErrorKind::Input, "average_precision: no ground truth, metric undefined");
    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });

    PRCurve curve;
    curve.points.reserve(dets.size());
    std::size_t tp = 0;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        const FlaggedDetection& d = dets[order[rank]];
        tp += d.true_positive;
        curve.points.push_back({d.score, static_cast<double>(tp) / static_cast<double>(total_gt),
                                static_cast<double>(tp) / static_cast<double>(rank + 1)});
    }

    std::vector<double> envelope(curve.points.size());
    double running = 0.0;
    for (std::size_t i = curve.points.size(); i-- > 0;) {
        running = std::max(running, curve.points[i].precision);
        envelope[i] = running;
    }
    double ap = 0.0;
    double prev_recall = 0.0;
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
        ap += (curve.points[i].recall - prev_recall) * envelope[i];
        prev_recall = curve.points[i].recall;
    }
    curve.ap = std::clamp(ap, 0.0, 1.0);
    return curve;
}

/// AP of a ranking of labelled items (label true = positive).
inline double ranking_average_precision(std::span<const double> scores, const std::vector<bool>& labels) {
    std::vector<FlaggedDetection> flagged(scores.size());
    std::size_t positives = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        flagged[i] = {scores[i], labels[i]};
        positives += labels[i];
    }
    return average_precision(flagged, positives).ap;
}

/// Scored boxes of one image, as read from a detections file.
struct ImageDetections {
    std::string image_id;
    std::vector<ScoredBox> detections;
};

struct EvalReport {
    double ap_baseline = 0.0;
    double ap_refined = 0.0;
    double delta = 0.0;
    std::size_t n_images = 0;
    std::size_t n_gt = 0;
    PRCurve baseline_curve;
    PRCurve refined_curve;
};

/// Matches every image against its ground truth and pools the flags in image order.
inline std::vector<FlaggedDetection> flag_corpus(std::span<const ImageDetections> images,
                                                 const std::map<std::string, const GroundTruth*>& gt_by_id,
                                                 double iou_threshold, std::size_t jobs = 1) {
    std::vector<std::vector<FlaggedDetection>> per_image(images.size());
    parallel_for(images.size(), jobs, [&](std::size_t i) {
        const ImageDetections& img = images[i];
        const auto it = gt_by_id.find(img.image_id);
        const std::span<const Box> gts =
            it == gt_by_id.end() ? std::span<const Box>{} : std::span<const Box>(it->second->boxes);
        const MatchResult m = match_detections(img.detections, gts, iou_threshold);
        per_image[i].reserve(img.detections.size());
        for (std::size_t d = 0; d < img.detections.size(); ++d)
            per_image[i].push_back({img.detections[d].score, m.true_positive[d]});
    });
    std::vector<FlaggedDetection> pooled;
    for (auto& v : per_image) pooled.insert(pooled.end(), v.begin(), v.end());
    return pooled;
}

/// Baseline-vs-refined AP on identical ground truth; delta = refined - baseline.
inline EvalReport compare(std::span<const ImageDetections> baseline, std::span<const ImageDetections> refined,
                          std::span<const GroundTruth> gts, const Config& cfg, std::size_t jobs = 1) {
    std::set<std::string> base_ids, ref_ids;
    for (const auto& b : baseline) base_ids.insert(b.image_id);
    for (const auto& r : refined) ref_ids.insert(r.image_id);
    if (base_ids != ref_ids)
        throw Error(ErrorKind::Input, "compare: baseline and refined detections cover different image ids");

    std::map<std::string, const GroundTruth*> gt_by_id;
    std::size_t n_gt = 0;
    for (const GroundTruth& g : gts) {
        if (!gt_by_id.emplace(g.image_id, &g).second)
            throw Error(ErrorKind::Input, "compare: duplicate ground truth for image '" + g.image_id + "'");
        n_gt += g.boxes.size();
    }

    EvalReport r;
    r.baseline_curve = average_precision(flag_corpus(baseline, gt_by_id, cfg.iou_threshold, jobs), n_gt);
    r.refined_curve = average_precision(flag_corpus(refined, gt_by_id, cfg.iou_threshold, jobs), n_gt);
    r.ap_baseline = r.baseline_curve.ap;
    r.ap_refined = r.refined_curve.ap;
    r.delta = r.ap_refined - r.ap_baseline;
    r.n_images = base_ids.size();
    r.n_gt = n_gt;
    return r;
}

/// Detections scoring at least the vote threshold: the plain threshold baseline.
inline std::vector<ImageDetections> threshold_baseline(std::span<const CandidateSet> sets, double threshold) {
    std::vector<ImageDetections> out;
    out.reserve(sets.size());
    for (const CandidateSet& s : sets) {
        ImageDetections img{s.image_id, {}};
        for (const Candidate& c : s.candidates)
            if (c.score >= threshold) img.detections.push_back({c.box, c.score});
        out.push_back(std::move(img));
    }
    return out;
}

}  // namespace mlgc
