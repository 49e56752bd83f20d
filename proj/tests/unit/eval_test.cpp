#include <gtest/gtest.h>

#include <cmath>

#include "../oracles.hpp"
#include "mlgc/eval.hpp"
#include "mlgc/random.hpp"

namespace {

using namespace mlgc;

TEST(Iou, Examples) {
    EXPECT_DOUBLE_EQ(iou({0, 0, 2, 2}, {0, 0, 2, 2}), 1.0);
    EXPECT_EQ(iou({0, 0, 1, 1}, {5, 5, 1, 1}), 0.0);
    EXPECT_EQ(iou({0, 0, 1, 1}, {1, 0, 1, 1}), 0.0);
    EXPECT_NEAR(iou({0, 0, 2, 2}, {1, 0, 2, 2}), 1.0 / 3.0, 1e-15);
}

TEST(Iou, SymmetricAndBounded) {
    Rng rng(51);
    for (int t = 0; t < 200; ++t) {
        const Box a{rng.uniform(0, 10), rng.uniform(0, 10), rng.uniform(0.1, 5), rng.uniform(0.1, 5)};
        const Box b{rng.uniform(0, 10), rng.uniform(0, 10), rng.uniform(0.1, 5), rng.uniform(0.1, 5)};
        const double v = iou(a, b);
        EXPECT_EQ(v, iou(b, a));
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
}

TEST(Match, ExactHitIsTruePositive) {
    const std::vector<ScoredBox> dets{{{0, 0, 10, 10}, 0.9}};
    const std::vector<Box> gts{{0, 0, 10, 10}};
    const MatchResult m = match_detections(dets, gts, 0.5);
    EXPECT_TRUE(m.true_positive[0]);
    EXPECT_TRUE(m.gt_matched[0]);
}

TEST(Match, DuplicateDetectionsOnlyHigherScoreMatches) {
    const std::vector<ScoredBox> dets{{{0, 0, 10, 10}, 0.4}, {{0, 0, 10, 10}, 0.8}};
    const std::vector<Box> gts{{0, 0, 10, 10}};
    const MatchResult m = match_detections(dets, gts, 0.5);
    EXPECT_FALSE(m.true_positive[0]);
    EXPECT_TRUE(m.true_positive[1]);
}

TEST(Match, BelowThresholdIsFalsePositive) {
    // IoU = 4/16
    const std::vector<ScoredBox> dets{{{0, 0, 2, 5}, 0.9}};
    const std::vector<Box> gts{{0, 0, 5, 2}};
    EXPECT_NEAR(iou(dets[0].box, gts[0]), 4.0 / 16.0, 1e-15);
    EXPECT_FALSE(match_detections(dets, gts, 0.5).true_positive[0]);
    const std::vector<ScoredBox> d2{{{0, 0, 10, 4}, 0.9}};
    const std::vector<Box> g2{{0, 0, 10, 10}};
    EXPECT_NEAR(iou(d2[0].box, g2[0]), 0.4, 1e-15);
    EXPECT_FALSE(match_detections(d2, g2, 0.5).true_positive[0]);
}

TEST(Match, TruePositivesBoundedByDetectionsAndGroundTruth) {
    Rng rng(52);
    for (int t = 0; t < 100; ++t) {
        std::vector<ScoredBox> dets(rng.index(10));
        std::vector<Box> gts(rng.index(10));
        for (auto& g : gts) g = {rng.uniform(0, 20), rng.uniform(0, 20), rng.uniform(2, 8), rng.uniform(2, 8)};
        for (auto& d : dets) d = {{rng.uniform(0, 20), rng.uniform(0, 20), rng.uniform(2, 8), rng.uniform(2, 8)}, rng.uniform()};
        const MatchResult m = match_detections(dets, gts, 0.3);
        const auto tp = std::count(m.true_positive.begin(), m.true_positive.end(), true);
        const auto matched = std::count(m.gt_matched.begin(), m.gt_matched.end(), true);
        EXPECT_EQ(tp, matched);
        EXPECT_LE(static_cast<std::size_t>(tp), std::min(dets.size(), gts.size()));
    }
}

TEST(AveragePrecision, Extremes) {
    const std::vector<FlaggedDetection> perfect{{0.9, true}, {0.8, true}, {0.7, true}};
    EXPECT_DOUBLE_EQ(average_precision(perfect, 3).ap, 1.0);
    const std::vector<FlaggedDetection> none{{0.9, false}, {0.8, false}};
    EXPECT_EQ(average_precision(none, 2).ap, 0.0);
    const std::vector<FlaggedDetection> tp_then_fp{{0.9, true}, {0.1, false}};
    EXPECT_DOUBLE_EQ(average_precision(tp_then_fp, 1).ap, 1.0);
    EXPECT_EQ(average_precision(std::vector<FlaggedDetection>{}, 1).ap, 0.0);
}

TEST(AveragePrecision, NoGroundTruthIsError) {
    EXPECT_THROW(average_precision(std::vector<FlaggedDetection>{{0.5, false}}, 0), Error);
}

TEST(AveragePrecision, EnvelopeExample) {
    // ranks: TP FP TP FP ; G = 3 -> (1 + 2/3) / 3
    const std::vector<FlaggedDetection> d{{0.9, true}, {0.8, false}, {0.7, true}, {0.6, false}};
    EXPECT_NEAR(average_precision(d, 3).ap, (1.0 + 2.0 / 3.0) / 3.0, 1e-15);
}

TEST(AveragePrecision, MatchesRankOracleAndCurveIsMonotone) {
    Rng rng(53);
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = rng.index(30);
        std::vector<FlaggedDetection> d(n);
        std::size_t tp = 0;
        for (auto& x : d) {
            x = {rng.uniform(), rng.uniform() < 0.4};
            tp += x.true_positive;
        }
        const std::size_t g = tp + rng.index(5) + (tp == 0);
        const PRCurve c = average_precision(d, g);
        std::vector<FlaggedDetection> sorted = d;
        std::stable_sort(sorted.begin(), sorted.end(), [](auto& a, auto& b) { return a.score > b.score; });
        std::vector<bool> ranks;
        for (const auto& x : sorted) ranks.push_back(x.true_positive);
        EXPECT_NEAR(c.ap, oracle::ap_by_ranks(ranks, g), 1e-12);
        for (std::size_t i = 1; i < c.points.size(); ++i) EXPECT_GE(c.points[i].recall, c.points[i - 1].recall);
        EXPECT_GE(c.ap, 0.0);
        EXPECT_LE(c.ap, 1.0);
    }
}

TEST(AveragePrecision, InvariantUnderMonotoneScoreTransform) {
    Rng rng(54);
    for (int t = 0; t < 50; ++t) {
        std::vector<FlaggedDetection> d(1 + rng.index(20));
        for (auto& x : d) x = {rng.uniform(), rng.uniform() < 0.5};
        std::vector<FlaggedDetection> e = d;
        for (auto& x : e) x.score = std::exp(3.0 * x.score) - 7.0;
        EXPECT_DOUBLE_EQ(average_precision(d, d.size()).ap, average_precision(e, d.size()).ap);
    }
}

TEST(Compare, FiveDetectionFixture) {
    const std::vector<GroundTruth> gts{{"a", {{0, 0, 10, 10}, {50, 50, 10, 10}}}, {"b", {{20, 20, 10, 10}}}};
    const std::vector<ImageDetections> base{
        {"a", {{{0, 0, 10, 10}, 0.9}, {{100, 100, 10, 10}, 0.8}, {{50, 50, 10, 10}, 0.4}}},
        {"b", {{{20, 20, 10, 10}, 0.6}, {{300, 0, 5, 5}, 0.7}}}};
    const std::vector<ImageDetections> refined{{"a", {{{0, 0, 10, 10}, 0.9}, {{50, 50, 10, 10}, 0.4}}},
                                               {"b", {{{20, 20, 10, 10}, 0.6}}}};
    const EvalReport r = compare(base, refined, gts, Config{});
    // baseline ranks by score: 0.9 TP, 0.8 FP, 0.7 FP, 0.6 TP, 0.4 TP
    EXPECT_NEAR(r.ap_baseline, oracle::ap_by_ranks({true, false, false, true, true}, 3), 1e-12);
    EXPECT_NEAR(r.ap_baseline, (1.0 + 0.6 + 0.6) / 3.0, 1e-12);
    EXPECT_DOUBLE_EQ(r.ap_refined, 1.0);
    EXPECT_NEAR(r.delta, r.ap_refined - r.ap_baseline, 1e-15);
    EXPECT_EQ(r.n_images, 2u);
    EXPECT_EQ(r.n_gt, 3u);
}

TEST(Compare, ImageSetsMustAgree) {
    const std::vector<GroundTruth> gts{{"a", {{0, 0, 1, 1}}}};
    const std::vector<ImageDetections> base{{"a", {}}};
    const std::vector<ImageDetections> refined{{"b", {}}};
    EXPECT_THROW(compare(base, refined, gts, Config{}), Error);
    const std::vector<GroundTruth> dup{{"a", {{0, 0, 1, 1}}}, {"a", {}}};
    EXPECT_THROW(compare(base, base, dup, Config{}), Error);
}

TEST(ThresholdBaseline, KeepsScoresAtOrAboveThreshold) {
    const std::vector<CandidateSet> sets{{"a", 10, 10, {{{0, 0, 1, 1}, 0.5, {}}, {{0, 0, 1, 1}, 0.49, {}}}}};
    const auto b = threshold_baseline(sets, 0.5);
    ASSERT_EQ(b.size(), 1u);
    EXPECT_EQ(b[0].detections.size(), 1u);
}

}  // namespace
