#pragma once

#include <cctype>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mlgc/core_model.hpp"
#include "mlgc/eval.hpp"
#include "mlgc/metric.hpp"
#include "mlgc/pairs.hpp"
#include "mlgc/refine.hpp"
#include "mlgc/synthgen.hpp"

namespace mlgc::io {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

inline std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for reading");
    return in;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
    return out;
}

inline void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw Error(ErrorKind::Io, "write to '" + path.string() + "' failed");
}

/// Calls fn(object, line_number) for every non-blank line. Parse and type errors
/// are rethrown with the source and line number.
inline void for_each_jsonl(std::istream& in, const std::string& source,
                           const std::function<void(const json&, std::size_t)>& fn) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw Error(ErrorKind::Parse, source + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (!obj.is_object())
            throw Error(ErrorKind::Parse, source + ":" + std::to_string(line_no) + ": expected a JSON object");
        try {
            fn(obj, line_no);
        } catch (const json::exception& e) {
            throw Error(ErrorKind::Schema, source + ":" + std::to_string(line_no) + ": " + e.what());
        } catch (const Error& e) {
            throw Error(e.kind(), source + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

// --- field helpers ---------------------------------------------------------

inline const json& field(const json& obj, const char* name) {
    const auto it = obj.find(name);
    if (it == obj.end()) throw Error(ErrorKind::Schema, std::string("missing field '") + name + "'");
    return *it;
}

inline double number(const json& obj, const char* name) {
    const json& v = field(obj, name);
    if (!v.is_number()) throw Error(ErrorKind::Schema, std::string("field '") + name + "' must be a number");
    return v.get<double>();
}

inline std::string string_field(const json& obj, const char* name) {
    const json& v = field(obj, name);
    if (!v.is_string()) throw Error(ErrorKind::Schema, std::string("field '") + name + "' must be a string");
    return v.get<std::string>();
}

inline std::vector<double> number_array(const json& obj, const char* name) {
    const json& v = field(obj, name);
    if (!v.is_array()) throw Error(ErrorKind::Schema, std::string("field '") + name + "' must be an array");
    std::vector<double> out;
    out.reserve(v.size());
    for (const json& x : v) {
        if (!x.is_number()) throw Error(ErrorKind::Schema, std::string("field '") + name + "' must hold numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

inline Box box_from_json(const json& obj) {
    Box b{number(obj, "x"), number(obj, "y"), number(obj, "w"), number(obj, "h")};
    if (!b.valid()) throw Error(ErrorKind::Schema, "invalid box (need finite x,y and w,h > 0)");
    return b;
}

inline void box_to_json(ordered_json& obj, const Box& b) {
    obj["x"] = b.x;
    obj["y"] = b.y;
    obj["w"] = b.w;
    obj["h"] = b.h;
}

// --- candidates ------------------------------------------------------------

inline CandidateSet candidate_set_from_json(const json& obj) {
    CandidateSet set;
    set.image_id = string_field(obj, "image_id");
    set.image_w = number(obj, "image_w");
    set.image_h = number(obj, "image_h");
    const json& cands = field(obj, "candidates");
    if (!cands.is_array()) throw Error(ErrorKind::Schema, "field 'candidates' must be an array");
    for (const json& c : cands) {
        Candidate cand;
        cand.box = {number(c, "x"), number(c, "y"), number(c, "w"), number(c, "h")};
        cand.score = number(c, "score");
        cand.features = c.contains("features") ? number_array(c, "features") : std::vector<double>{};
        set.candidates.push_back(std::move(cand));
    }
    validate(set);
    return set;
}

inline ordered_json to_json(const CandidateSet& set) {
    ordered_json obj;
    obj["image_id"] = set.image_id;
    obj["image_w"] = set.image_w;
    obj["image_h"] = set.image_h;
    obj["candidates"] = ordered_json::array();
    for (const Candidate& c : set.candidates) {
        ordered_json o;
        box_to_json(o, c.box);
        o["score"] = c.score;
        o["features"] = c.features;
        obj["candidates"].push_back(std::move(o));
    }
    return obj;
}

inline std::vector<CandidateSet> read_candidate_sets(std::istream& in, const std::string& source = "<stream>") {
    std::vector<CandidateSet> sets;
    for_each_jsonl(in, source, [&](const json& obj, std::size_t) { sets.push_back(candidate_set_from_json(obj)); });
    return sets;
}

inline std::vector<CandidateSet> read_candidate_sets(const std::filesystem::path& path) {
    auto in = open_input(path);
    return read_candidate_sets(in, path.string());
}

inline void write_candidate_sets(std::ostream& out, std::span<const CandidateSet> sets) {
    for (const CandidateSet& s : sets) out << to_json(s).dump() << '\n';
}

inline void write_candidate_sets(std::span<const CandidateSet> sets, const std::filesystem::path& path) {
    auto out = open_output(path);
    write_candidate_sets(out, sets);
    finish(out, path);
}

// --- ground truth and labels -----------------------------------------------

inline std::vector<GroundTruth> read_ground_truth(std::istream& in, const std::string& source = "<stream>") {
    std::vector<GroundTruth> out;
    for_each_jsonl(in, source, [&](const json& obj, std::size_t) {
        GroundTruth g{string_field(obj, "image_id"), {}};
        const json& boxes = field(obj, "boxes");
        if (!boxes.is_array()) throw Error(ErrorKind::Schema, "field 'boxes' must be an array");
        for (const json& b : boxes) g.boxes.push_back(box_from_json(b));
        out.push_back(std::move(g));
    });
    return out;
}

inline std::vector<GroundTruth> read_ground_truth(const std::filesystem::path& path) {
    auto in = open_input(path);
    return read_ground_truth(in, path.string());
}

inline void write_ground_truth(std::span<const GroundTruth> gts, const std::filesystem::path& path) {
    auto out = open_output(path);
    for (const GroundTruth& g : gts) {
        ordered_json obj;
        obj["image_id"] = g.image_id;
        obj["boxes"] = ordered_json::array();
        for (const Box& b : g.boxes) {
            ordered_json o;
            box_to_json(o, b);
            obj["boxes"].push_back(std::move(o));
        }
        out << obj.dump() << '\n';
    }
    finish(out, path);
}

inline void write_labels(std::span<const CandidateSet> sets, const std::vector<std::vector<int>>& labels,
                         const std::filesystem::path& path) {
    auto out = open_output(path);
    for (std::size_t i = 0; i < sets.size(); ++i) {
        ordered_json obj;
        obj["image_id"] = sets[i].image_id;
        obj["labels"] = labels[i];
        out << obj.dump() << '\n';
    }
    finish(out, path);
}

// --- config and generator spec ----------------------------------------------

inline Config config_from_json(const json& obj) {
    if (!obj.is_object()) throw Error(ErrorKind::Schema, "config must be a JSON object");
    Config cfg;
    try {
        cfg.top_frac = obj.value("top_frac", cfg.top_frac);
        cfg.bottom_frac = obj.value("bottom_frac", cfg.bottom_frac);
        cfg.delta = obj.value("delta", cfg.delta);
        if (obj.contains("weight_mode")) {
            const std::string mode = obj.at("weight_mode").get<std::string>();
            if (mode == "dissimilarity")
                cfg.weight_mode = WeightMode::Dissimilarity;
            else if (mode == "literal")
                cfg.weight_mode = WeightMode::Literal;
            else
                throw Error(ErrorKind::Schema, "config: unknown weight_mode '" + mode + "'");
        }
        cfg.k_max = obj.value("k_max", cfg.k_max);
        cfg.vote_threshold = obj.value("vote_threshold", cfg.vote_threshold);
        cfg.iou_threshold = obj.value("iou_threshold", cfg.iou_threshold);
        cfg.rng_seed = obj.value("rng_seed", cfg.rng_seed);
        cfg.svm_c = obj.value("svm_c", cfg.svm_c);
        cfg.svm_max_epochs = obj.value("svm_max_epochs", cfg.svm_max_epochs);
        cfg.svm_tol = obj.value("svm_tol", cfg.svm_tol);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Schema, std::string("config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

inline json read_json_file(const std::filesystem::path& path) {
    auto in = open_input(path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
    }
}

inline Config read_config(const std::filesystem::path& path) {
    try {
        return config_from_json(read_json_file(path));
    } catch (const Error& e) {
        throw Error(e.kind(), path.string() + ": " + e.what());
    }
}

inline GenSpec gen_spec_from_json(const json& obj) {
    if (!obj.is_object()) throw Error(ErrorKind::Schema, "gen spec must be a JSON object");
    GenSpec s;
    try {
        s.n_images = obj.value("n_images", s.n_images);
        s.faces_per_image = obj.value("faces_per_image", s.faces_per_image);
        s.bg_per_image = obj.value("bg_per_image", s.bg_per_image);
        s.cluster_spread = obj.value("cluster_spread", s.cluster_spread);
        s.feature_noise = obj.value("feature_noise", s.feature_noise);
        s.score_overlap = obj.value("score_overlap", s.score_overlap);
        s.d_deep = obj.value("d_deep", s.d_deep);
        s.seed = obj.value("seed", s.seed);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Schema, std::string("gen spec: ") + e.what());
    }
    s.validate();
    return s;
}

// --- model -----------------------------------------------------------------

inline ordered_json to_json(const MetricModel& m) {
    ordered_json obj;
    obj["weights"] = m.weights;
    obj["bias"] = m.bias;
    obj["platt_scale"] = m.platt_scale;
    obj["feature_dim"] = m.feature_dim;
    obj["standardize_mean"] = m.standardize_mean;
    obj["standardize_std"] = m.standardize_std;
    return obj;
}

inline MetricModel model_from_json(const json& obj) {
    MetricModel m;
    m.weights = number_array(obj, "weights");
    m.bias = number(obj, "bias");
    m.platt_scale = number(obj, "platt_scale");
    const json& dim = field(obj, "feature_dim");
    if (!dim.is_number_unsigned()) throw Error(ErrorKind::Schema, "field 'feature_dim' must be a non-negative integer");
    m.feature_dim = dim.get<std::size_t>();
    m.standardize_mean = number_array(obj, "standardize_mean");
    m.standardize_std = number_array(obj, "standardize_std");
    m.validate();
    return m;
}

inline MetricModel read_model(const std::filesystem::path& path) {
    try {
        return model_from_json(read_json_file(path));
    } catch (const Error& e) {
        throw Error(e.kind(), path.string() + ": " + e.what());
    }
}

inline void write_model(const MetricModel& m, const std::filesystem::path& path) {
    auto out = open_output(path);
    out << to_json(m).dump(2) << '\n';
    finish(out, path);
}

// --- pairs dump ------------------------------------------------------------

inline void write_pairs(std::span<const PairSample> pairs, const std::filesystem::path& path) {
    auto out = open_output(path);
    for (const PairSample& p : pairs) {
        ordered_json obj;
        obj["feature"] = p.feature;
        obj["label"] = p.label;
        obj["image_id"] = p.image_id;
        obj["i"] = p.i;
        obj["j"] = p.j;
        out << obj.dump() << '\n';
    }
    finish(out, path);
}

// --- refined detections ------------------------------------------------------

inline ordered_json to_json(const RefinedDetections& r) {
    ordered_json obj;
    obj["image_id"] = r.image_id;
    obj["detections"] = ordered_json::array();
    for (const KeptDetection& k : r.kept) {
        ordered_json d;
        box_to_json(d, k.box);
        d["score"] = k.score;
        obj["detections"].push_back(std::move(d));
    }
    obj["groups"] = ordered_json::array();
    for (const GroupVerdict& g : r.group_verdicts) {
        ordered_json o;
        o["id"] = g.group;
        o["verdict"] = to_string(g.verdict);
        o["size"] = g.size();
        obj["groups"].push_back(std::move(o));
    }
    return obj;
}

inline void write_refined(std::ostream& out, std::span<const RefinedDetections> results) {
    for (const RefinedDetections& r : results) out << to_json(r).dump() << '\n';
}

inline void write_refined(std::span<const RefinedDetections> results, const std::filesystem::path& path) {
    auto out = open_output(path);
    write_refined(out, results);
    finish(out, path);
}

/// Reads scored detections per image. Lines in the refined-output schema
/// ("detections") are taken as-is; lines in the candidates schema ("candidates")
/// are thresholded at `candidate_threshold` to form the plain threshold baseline.
inline std::vector<ImageDetections> read_detections(std::istream& in, const std::string& source,
                                                    double candidate_threshold) {
    std::vector<ImageDetections> out;
    for_each_jsonl(in, source, [&](const json& obj, std::size_t) {
        if (obj.contains("candidates")) {
            const CandidateSet set = candidate_set_from_json(obj);
            auto thresholded = threshold_baseline(std::span<const CandidateSet>(&set, 1), candidate_threshold);
            out.push_back(std::move(thresholded.front()));
            return;
        }
        ImageDetections img{string_field(obj, "image_id"), {}};
        const json& dets = field(obj, "detections");
        if (!dets.is_array()) throw Error(ErrorKind::Schema, "field 'detections' must be an array");
        for (const json& d : dets) {
            const double score = number(d, "score");
            if (!std::isfinite(score)) throw Error(ErrorKind::Schema, "non-finite detection score");
            img.detections.push_back({box_from_json(d), score});
        }
        out.push_back(std::move(img));
    });
    return out;
}

inline std::vector<ImageDetections> read_detections(const std::filesystem::path& path, double candidate_threshold) {
    auto in = open_input(path);
    return read_detections(in, path.string(), candidate_threshold);
}

// --- debug dumps -------------------------------------------------------------

inline void write_eigenvalues(std::span<const RefinedDetections> results, std::span<const RefineTrace> traces,
                              const std::filesystem::path& path) {
    auto out = open_output(path);
    for (std::size_t i = 0; i < results.size() && i < traces.size(); ++i) {
        ordered_json obj;
        obj["image_id"] = results[i].image_id;
        obj["eigenvalues"] = traces[i].eigenvalues;
        out << obj.dump() << '\n';
    }
    finish(out, path);
}

/// File-system safe version of an image id.
inline std::string safe_name(const std::string& id) {
    std::string s = id;
    for (char& c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
    return s.empty() ? std::string("_") : s;
}

inline void write_matrix_file(const SquareMatrix& m, const std::filesystem::path& path) {
    auto out = open_output(path);
    write_matrix_text(out, m);
    finish(out, path);
}

// --- evaluation report -------------------------------------------------------

inline ordered_json to_json(const EvalReport& r) {
    ordered_json obj;
    obj["ap_baseline"] = r.ap_baseline;
    obj["ap_refined"] = r.ap_refined;
    obj["delta"] = r.delta;
    obj["n_images"] = r.n_images;
    obj["n_gt"] = r.n_gt;
    return obj;
}

inline void write_report(const EvalReport& r, const std::filesystem::path& path) {
    auto out = open_output(path);
    out << to_json(r).dump(2) << '\n';
    finish(out, path);
}

inline void write_pr_csv(const PRCurve& curve, const std::filesystem::path& path) {
    auto out = open_output(path);
    out << "threshold,recall,precision\n" << std::setprecision(17);
    for (const PRPoint& p : curve.points) out << p.threshold << ',' << p.recall << ',' << p.precision << '\n';
    finish(out, path);
}

}  // namespace mlgc::io
