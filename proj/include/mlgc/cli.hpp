#pragma once

#include <cstddef>
#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mlgc/core_model.hpp"
#include "mlgc/eval.hpp"
#include "mlgc/io.hpp"
#include "mlgc/pairs.hpp"
#include "mlgc/refine.hpp"
#include "mlgc/synthgen.hpp"

namespace mlgc::cli {

enum ExitCode : int { kOk = 0, kInputError = 1, kInternalError = 2 };

namespace detail {

inline int cmd_generate(const std::string& spec_path, const std::filesystem::path& out_dir) {
    const GenSpec spec = io::gen_spec_from_json(io::read_json_file(spec_path));
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create '" + out_dir.string() + "': " + ec.message());
    const GeneratedCorpus corpus = generate(spec);
    io::write_candidate_sets(corpus.sets, out_dir / "candidates.jsonl");
    io::write_ground_truth(corpus.gts, out_dir / "gt.jsonl");
    io::write_labels(corpus.sets, corpus.labels, out_dir / "labels.jsonl");
    return kOk;
}

inline int cmd_train(const std::string& candidates, const std::string& config, const std::string& model_out,
                     const std::string& dump_pairs) {
    const Config cfg = io::read_config(config);
    const auto sets = io::read_candidate_sets(candidates);
    std::vector<PairSample> pairs;
    const MetricModel model = train_from_candidates(sets, cfg, &pairs);
    io::write_model(model, model_out);
    if (!dump_pairs.empty()) io::write_pairs(pairs, dump_pairs);
    return kOk;
}

inline int cmd_refine(const std::string& candidates, const std::string& model_path, const std::string& config,
                      const std::string& out_path, const std::string& dump_eigvals,
                      const std::string& dump_matrices, std::size_t jobs, std::ostream& err) {
    const Config cfg = io::read_config(config);
    const MetricModel model = io::read_model(model_path);
    const auto sets = io::read_candidate_sets(candidates);
    const bool want_trace = !dump_eigvals.empty() || !dump_matrices.empty();
    std::vector<RefineTrace> traces;
    CorpusRefinement result = refine_corpus(sets, model, cfg, jobs, want_trace ? &traces : nullptr);
    io::write_refined(result.results, out_path);

    if (want_trace) {
        std::vector<RefineTrace> ok_traces;
        std::size_t f = 0;
        for (std::size_t i = 0; i < sets.size(); ++i) {
            if (f < result.failures.size() && result.failures[f].position == i) {
                ++f;
                continue;
            }
            ok_traces.push_back(std::move(traces[i]));
        }
        if (!dump_eigvals.empty()) io::write_eigenvalues(result.results, ok_traces, dump_eigvals);
        if (!dump_matrices.empty()) {
            const std::filesystem::path dir(dump_matrices);
            std::error_code ec;
            std::filesystem::create_directories(dir, ec);
            if (ec) throw Error(ErrorKind::Io, "cannot create '" + dir.string() + "': " + ec.message());
            for (std::size_t i = 0; i < result.results.size(); ++i) {
                const std::string base = io::safe_name(result.results[i].image_id);
                io::write_matrix_file(ok_traces[i].similarity.matrix(), dir / (base + ".S.txt"));
                io::write_matrix_file(ok_traces[i].weights.matrix(), dir / (base + ".W.txt"));
                io::write_matrix_file(ok_traces[i].laplacian.matrix(), dir / (base + ".L.txt"));
            }
        }
    }

    if (result.failures.empty()) return kOk;
    bool internal = false;
    for (const ImageFailure& fail : result.failures) {
        err << "error: image '" << fail.image_id << "': " << fail.message << '\n';
        internal = internal || !fail.input_error;
    }
    err << "error: " << result.failures.size() << " of " << sets.size() << " images failed\n";
    return internal ? kInternalError : kInputError;
}

inline int cmd_eval(const std::string& baseline, const std::string& refined, const std::string& gt,
                    const std::string& config, const std::string& report, const std::string& pr_csv,
                    std::size_t jobs) {
    const Config cfg = io::read_config(config);
    const auto base = io::read_detections(baseline, cfg.vote_threshold);
    const auto ref = io::read_detections(refined, cfg.vote_threshold);
    const auto gts = io::read_ground_truth(gt);
    const EvalReport r = compare(base, ref, gts, cfg, jobs);
    io::write_report(r, report);
    if (!pr_csv.empty()) io::write_pr_csv(r.refined_curve, pr_csv);
    return kOk;
}

}  // namespace detail

/// Entry point shared by the mlgc binary and the tests. Returns the exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Metric-learning and graph-cut refinement of detection candidates", "mlgc"};
    app.require_subcommand(1);

    std::string spec_path, out_dir;
    auto* gen = app.add_subcommand("generate", "Write a synthetic candidates/ground-truth/labels corpus");
    gen->add_option("--spec", spec_path, "Generator spec JSON")->required();
    gen->add_option("--out-dir", out_dir, "Output directory")->required();

    std::string candidates, config, model_out, dump_pairs;
    auto* train = app.add_subcommand("train", "Train the pairwise similarity model");
    train->add_option("--candidates", candidates, "Candidates JSONL")->required();
    train->add_option("--config", config, "Config JSON")->required();
    train->add_option("--model-out", model_out, "Model JSON to write")->required();
    train->add_option("--dump-pairs", dump_pairs, "Write training pairs as JSONL");

    std::string model_path, refine_out, dump_eigvals, dump_matrices;
    std::size_t jobs = 1;
    auto* refine = app.add_subcommand("refine", "Refine candidates by spectral grouping and voting");
    refine->add_option("--candidates", candidates, "Candidates JSONL")->required();
    refine->add_option("--model", model_path, "Model JSON")->required();
    refine->add_option("--config", config, "Config JSON")->required();
    refine->add_option("--out", refine_out, "Refined detections JSONL")->required();
    refine->add_option("--dump-eigvals", dump_eigvals, "Write Laplacian spectra as JSONL");
    refine->add_option("--dump-matrices", dump_matrices, "Directory for S/W/L text dumps");
    refine->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

    std::string baseline, refined, gt, report, pr_csv;
    auto* eval = app.add_subcommand("eval", "Compare baseline and refined detection AP");
    eval->add_option("--baseline", baseline, "Baseline detections (or candidates) JSONL")->required();
    eval->add_option("--refined", refined, "Refined detections JSONL")->required();
    eval->add_option("--gt", gt, "Ground-truth JSONL")->required();
    eval->add_option("--config", config, "Config JSON")->required();
    eval->add_option("--report", report, "Report JSON to write")->required();
    eval->add_option("--pr-csv", pr_csv, "Refined PR curve CSV");
    eval->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kInputError;
    }

    try {
        if (*gen) return detail::cmd_generate(spec_path, out_dir);
        if (*train) return detail::cmd_train(candidates, config, model_out, dump_pairs);
        if (*refine)
            return detail::cmd_refine(candidates, model_path, config, refine_out, dump_eigvals, dump_matrices, jobs,
                                      err);
        if (*eval) return detail::cmd_eval(baseline, refined, gt, config, report, pr_csv, jobs);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.is_input_error() ? kInputError : kInternalError;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kInternalError;
    }
    return kInternalError;
}

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("mlgc");
    for (const std::string& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace mlgc::cli
