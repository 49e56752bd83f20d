#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "mlgc/pairs.hpp"
#include "mlgc/random.hpp"
#include "mlgc/refine.hpp"
#include "mlgc/synthgen.hpp"

namespace {

using namespace mlgc;

GroupVerdict vote(const std::vector<double>& scores, double tau = 0.5) {
    std::vector<std::size_t> members(scores.size());
    for (std::size_t i = 0; i < members.size(); ++i) members[i] = i;
    Config cfg;
    cfg.vote_threshold = tau;
    return vote_group(members, scores, cfg);
}

/// Model over 5 + dim features with the given weights on every coordinate.
MetricModel flat_model(std::size_t dim, double w = 1.0, double bias = 1.0) {
    MetricModel m;
    m.feature_dim = kPhiGeometryDim + dim;
    m.weights.assign(m.feature_dim, w);
    m.bias = bias;
    m.standardize_mean.assign(m.feature_dim, 0.0);
    m.standardize_std.assign(m.feature_dim, 1.0);
    return m;
}

CandidateSet random_set(Rng& rng, const std::string& id, std::size_t n, std::size_t dim = 3) {
    CandidateSet s{id, 640, 480, {}};
    for (std::size_t i = 0; i < n; ++i) {
        Candidate c{{rng.uniform(0, 600), rng.uniform(0, 440), rng.uniform(5, 40), rng.uniform(5, 40)}, rng.uniform(), {}};
        for (std::size_t k = 0; k < dim; ++k) c.features.push_back(rng.normal());
        s.candidates.push_back(c);
    }
    return s;
}

/// Settings under which the synthetic crowds separate from the background.
Config synthetic_config() {
    Config cfg;
    cfg.delta = 0.12;
    cfg.rng_seed = 7;
    return cfg;
}

TEST(VoteGroup, MajorityFace) { EXPECT_EQ(vote({0.9, 0.8, 0.1}).verdict, Verdict::Face); }

TEST(VoteGroup, MajorityNonFace) { EXPECT_EQ(vote({0.1, 0.2}).verdict, Verdict::NonFace); }

TEST(VoteGroup, TieGoesToMeanScore) {
    const GroupVerdict v = vote({0.9, 0.1});
    EXPECT_EQ(v.verdict, Verdict::Face);
    EXPECT_EQ(v.votes_for, 1);
    EXPECT_EQ(v.votes_against, 1);
    EXPECT_EQ(vote({0.6, 0.2}).verdict, Verdict::NonFace);
}

TEST(VoteGroup, EmptyGroupIsInvariantError) {
    try {
        vote({});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Invariant);
    }
}

// Adding a face vote to a face group never flips it.
TEST(VoteGroup, AddingFaceVoteKeepsFaceVerdict) {
    Rng rng(41);
    for (int t = 0; t < 500; ++t) {
        std::vector<double> scores(1 + rng.index(9));
        for (double& s : scores) s = rng.uniform();
        if (vote(scores).verdict != Verdict::Face) continue;
        scores.push_back(rng.uniform(0.5, 1.0));
        EXPECT_EQ(vote(scores).verdict, Verdict::Face);
    }
}

TEST(RefineImage, HomogeneousCandidatesAllKept) {
    CandidateSet s{"h", 100, 100, {}};
    for (int i = 0; i < 6; ++i) s.candidates.push_back({{10, 10, 20, 20}, 0.9, {0.5, 0.5}});
    const RefinedDetections r = refine_image(s, flat_model(2), Config{});
    EXPECT_EQ(r.kept.size(), 6u);
    ASSERT_EQ(r.group_verdicts.size(), 1u);
    EXPECT_EQ(r.group_verdicts[0].verdict, Verdict::Face);
}

TEST(RefineImage, UnitThresholdKeepsNothing) {
    Rng rng(42);
    Config cfg;
    cfg.vote_threshold = 1.0;
    CandidateSet s = random_set(rng, "x", 12);
    for (auto& c : s.candidates) c.score = std::min(c.score, 0.999);
    EXPECT_TRUE(refine_image(s, flat_model(3), cfg).kept.empty());
}

TEST(RefineImage, EmptyAndSingleton) {
    const MetricModel m = flat_model(2);
    EXPECT_TRUE(refine_image(CandidateSet{"e", 10, 10, {}}, m, Config{}).kept.empty());
    CandidateSet one{"o", 10, 10, {{{1, 1, 2, 2}, 0.7, {0, 0}}}};
    EXPECT_EQ(refine_image(one, m, Config{}).kept.size(), 1u);
    one.candidates[0].score = 0.3;
    EXPECT_TRUE(refine_image(one, m, Config{}).kept.empty());
}

TEST(RefineImage, DimensionMismatchRejected) {
    Rng rng(43);
    try {
        refine_image(random_set(rng, "x", 4, 3), flat_model(2), Config{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Dimension);
    }
}

TEST(RefineImage, KeptScoresComeFromInputAndBelongToFaceGroups) {
    Rng rng(44);
    for (int t = 0; t < 20; ++t) {
        const CandidateSet s = random_set(rng, "x", 2 + rng.index(20));
        RefineTrace trace;
        const RefinedDetections r = refine_image(s, flat_model(3, 0.3), Config{}, &trace);
        std::set<std::size_t> seen;
        for (const KeptDetection& k : r.kept) {
            ASSERT_LT(k.index, s.size());
            EXPECT_TRUE(seen.insert(k.index).second);
            EXPECT_EQ(k.score, s.candidates[k.index].score);
            EXPECT_EQ(k.box, s.candidates[k.index].box);
            const int g = trace.partition.assign[k.index];
            EXPECT_EQ(r.group_verdicts[static_cast<std::size_t>(g)].verdict, Verdict::Face);
        }
    }
}

// With a single group the pipeline is a plain majority vote over the image.
TEST(RefineImage, SingleGroupReducesToImageMajority) {
    Rng rng(45);
    Config cfg;
    cfg.k_max = 1;
    for (int t = 0; t < 20; ++t) {
        const CandidateSet s = random_set(rng, "x", 2 + rng.index(15));
        std::vector<double> scores;
        for (const auto& c : s.candidates) scores.push_back(c.score);
        const bool face = vote(scores).verdict == Verdict::Face;
        EXPECT_EQ(refine_image(s, flat_model(3), cfg).kept.size(), face ? s.size() : 0u);
    }
}

TEST(RefineImage, RescuesLowFacesAndRejectsHighBackgrounds) {
    GenSpec train_spec;
    train_spec.faces_per_image = 10;
    train_spec.bg_per_image = 10;
    train_spec.seed = 900;
    const Config cfg = synthetic_config();
    const MetricModel model = train_from_candidates(generate(train_spec).sets, cfg);

    int successes = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        GenSpec spec = train_spec;
        spec.n_images = 1;
        spec.seed = seed;
        const GeneratedCorpus corpus = generate(spec);
        const CandidateSet& set = corpus.sets[0];
        const auto& labels = corpus.labels[0];
        const RefinedDetections r = refine_image(set, model, cfg);
        std::set<std::size_t> kept;
        for (const auto& k : r.kept) kept.insert(k.index);
        bool ok = true;
        for (std::size_t i = 0; i < set.size(); ++i) {
            const double s = set.candidates[i].score;
            if (labels[i] == 1 && s < cfg.vote_threshold) ok = ok && kept.count(i);
            if (labels[i] == 0 && s >= cfg.vote_threshold) ok = ok && !kept.count(i);
        }
        successes += ok;
    }
    EXPECT_GE(successes, 40);
}

TEST(RefineCorpus, EmptyAndSingleImage) {
    const MetricModel m = flat_model(3);
    EXPECT_TRUE(refine_corpus(std::vector<CandidateSet>{}, m, Config{}).results.empty());
    Rng rng(46);
    const std::vector<CandidateSet> one{random_set(rng, "a", 9)};
    const auto r = refine_corpus(one, m, Config{});
    ASSERT_EQ(r.results.size(), 1u);
    const RefinedDetections direct = refine_image(one[0], m, Config{});
    ASSERT_EQ(r.results[0].kept.size(), direct.kept.size());
    for (std::size_t i = 0; i < direct.kept.size(); ++i) EXPECT_EQ(r.results[0].kept[i].index, direct.kept[i].index);
}

TEST(RefineCorpus, PermutationAndParallelismDoNotChangePerImageOutput) {
    Rng rng(47);
    std::vector<CandidateSet> sets;
    for (int i = 0; i < 8; ++i) sets.push_back(random_set(rng, "img" + std::to_string(i), 3 + rng.index(15)));
    const MetricModel m = flat_model(3, 0.5);
    const auto forward = refine_corpus(sets, m, Config{}, 1);
    std::vector<CandidateSet> reversed(sets.rbegin(), sets.rend());
    const auto backward = refine_corpus(reversed, m, Config{}, 4);
    ASSERT_EQ(forward.results.size(), sets.size());
    for (std::size_t i = 0; i < sets.size(); ++i) {
        const auto& a = forward.results[i];
        const auto& b = backward.results[sets.size() - 1 - i];
        EXPECT_EQ(a.image_id, b.image_id);
        ASSERT_EQ(a.kept.size(), b.kept.size());
        for (std::size_t k = 0; k < a.kept.size(); ++k) EXPECT_EQ(a.kept[k].index, b.kept[k].index);
    }
}

TEST(RefineCorpus, FailingImageReportedOthersContinue) {
    Rng rng(48);
    const std::vector<CandidateSet> sets{random_set(rng, "good", 5, 3), random_set(rng, "bad", 5, 2),
                                         random_set(rng, "good2", 5, 3)};
    const auto r = refine_corpus(sets, flat_model(3), Config{});
    ASSERT_EQ(r.results.size(), 2u);
    ASSERT_EQ(r.failures.size(), 1u);
    EXPECT_EQ(r.failures[0].image_id, "bad");
    EXPECT_TRUE(r.failures[0].input_error);
}

}  // namespace
