#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mlgc {

/// Error categories. The CLI maps each kind onto an exit code.
enum class ErrorKind {
    Parse,
    Schema,
    Io,
    Dimension,
    Training,
    Parameter,
    Input,
    Numeric,
    Invariant,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    /// True for errors caused by bad user input rather than internal faults.
    bool is_input_error() const noexcept {
        return kind_ != ErrorKind::Numeric && kind_ != ErrorKind::Invariant;
    }

private:
    ErrorKind kind_;
};

/// Axis-aligned box in pixels, (x, y) is the top-left corner.
struct Box {
    double x = 0.0;
    double y = 0.0;
    double w = 1.0;
    double h = 1.0;

    double area() const noexcept { return w * h; }
    double center_x() const noexcept { return x + 0.5 * w; }
    double center_y() const noexcept { return y + 0.5 * h; }

    bool valid() const noexcept {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(w) && std::isfinite(h) &&
               w > 0.0 && h > 0.0;
    }

    friend bool operator==(const Box&, const Box&) = default;
};

struct Candidate {
    Box box;
    double score = 0.0;
    std::vector<double> features;

    friend bool operator==(const Candidate&, const Candidate&) = default;
};

/// All candidates of one image; the unit of refinement.
struct CandidateSet {
    std::string image_id;
    double image_w = 1.0;
    double image_h = 1.0;
    std::vector<Candidate> candidates;

    std::size_t size() const noexcept { return candidates.size(); }

    /// Length of the deep feature vectors (0 for an empty set).
    std::size_t deep_dim() const noexcept {
        return candidates.empty() ? 0 : candidates.front().features.size();
    }

    friend bool operator==(const CandidateSet&, const CandidateSet&) = default;
};

struct GroundTruth {
    std::string image_id;
    std::vector<Box> boxes;
};

enum class WeightMode {
    Dissimilarity,  // w = exp(-(1 - S) / (2 delta^2))
    Literal,        // w = exp(-S / (2 delta^2))
};

struct Config {
    double top_frac = 0.10;
    double bottom_frac = 0.10;
    double delta = 1.0;
    WeightMode weight_mode = WeightMode::Dissimilarity;
    int k_max = 10;
    double vote_threshold = 0.5;
    double iou_threshold = 0.5;
    std::uint64_t rng_seed = 42;
    double svm_c = 1.0;
    int svm_max_epochs = 200;
    double svm_tol = 1e-6;

    void validate() const {
        auto fail = [](const std::string& msg) { throw Error(ErrorKind::Parameter, "config: " + msg); };
        if (!(top_frac >= 0.0 && top_frac <= 1.0)) fail("top_frac must be in [0,1]");
        if (!(bottom_frac >= 0.0 && bottom_frac <= 1.0)) fail("bottom_frac must be in [0,1]");
        if (top_frac + bottom_frac > 1.0) fail("top_frac + bottom_frac must be <= 1");
        if (!(delta > 0.0) || !std::isfinite(delta)) fail("delta must be > 0");
        if (k_max < 1) fail("k_max must be >= 1");
        if (!(vote_threshold >= 0.0 && vote_threshold <= 1.0)) fail("vote_threshold must be in [0,1]");
        if (!(iou_threshold >= 0.0 && iou_threshold <= 1.0)) fail("iou_threshold must be in [0,1]");
        if (!(svm_c > 0.0) || !std::isfinite(svm_c)) fail("svm_c must be > 0");
        if (svm_max_epochs < 1) fail("svm_max_epochs must be >= 1");
        if (!(svm_tol >= 0.0)) fail("svm_tol must be >= 0");
    }
};

/// Checks the CandidateSet invariants; throws Schema errors.
inline void validate(const CandidateSet& set) {
    auto fail = [&](const std::string& msg) {
        throw Error(ErrorKind::Schema, "image '" + set.image_id + "': " + msg);
    };
    if (!(set.image_w > 0.0) || !(set.image_h > 0.0) || !std::isfinite(set.image_w) ||
        !std::isfinite(set.image_h))
        fail("image dimensions must be positive");
    const std::size_t dim = set.deep_dim();
    for (std::size_t i = 0; i < set.candidates.size(); ++i) {
        const Candidate& c = set.candidates[i];
        const std::string where = "candidate " + std::to_string(i) + ": ";
        if (!c.box.valid()) fail(where + "invalid box (need finite x,y and w,h > 0)");
        if (!(c.score >= 0.0 && c.score <= 1.0)) fail(where + "score outside [0,1]");
        if (c.features.size() != dim)
            fail(where + "feature length " + std::to_string(c.features.size()) + " != " +
                 std::to_string(dim));
        for (double f : c.features)
            if (!std::isfinite(f)) fail(where + "non-finite feature value");
    }
}

}  // namespace mlgc
