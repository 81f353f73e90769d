#include "hyperrank/cg.hpp"
#include "hyperrank/error.hpp"
#include "hyperrank/hypergraph.hpp"
#include "hyperrank/learning.hpp"
#include "hyperrank/linalg.hpp"
#include "hyperrank/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace hyperrank;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_other = 1;
constexpr int exit_invalid = 2;
constexpr int exit_numerical = 3;

// Flat "key = value" file; '#' starts a comment.
std::vector<std::pair<std::string, std::string>> read_flat_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open config file: " + path);
    std::vector<std::pair<std::string, std::string>> items;
    std::string line;
    std::size_t lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string{};
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidInput(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
        auto key = trim(line.substr(0, eq));
        auto value = trim(line.substr(eq + 1));
        if (key.empty()) throw InvalidInput(path + ":" + std::to_string(lineno) + ": empty key");
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        items.emplace_back(std::move(key), std::move(value));
    }
    return items;
}

// Values from the file fill options that were not given on the command line.
void apply_flat_config(CLI::App& sub, const std::string& path) {
    for (const auto& [key, value] : read_flat_config(path)) {
        if (key == "config") throw InvalidInput("config files cannot include other config files");
        CLI::Option* opt = sub.get_option_no_throw("--" + key);
        if (opt == nullptr) throw InvalidInput("unknown key '" + key + "' for '" + sub.get_name() + "' in " + path);
        if (opt->count() > 0) continue;
        try {
            opt->add_result(value);
            opt->run_callback();
        } catch (const CLI::Error& e) {
            throw InvalidInput("config key '" + key + "': " + e.what());
        }
    }
}

class Output {
public:
    explicit Output(const std::string& path) {
        if (path.empty() || path == "-") return;
        file_ = std::make_unique<std::ofstream>(path);
        if (!*file_) throw InvalidInput("cannot open output file: " + path);
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

struct InputOptions {
    std::string prefix;
    std::string incidence;
    std::string segments;
    std::string truth;
    std::string weights;

    void add_to(CLI::App& app) {
        app.add_option("--input", prefix, "Dataset prefix: PREFIX.mtx, PREFIX.segments.tsv, PREFIX.truth.tsv");
        app.add_option("--incidence", incidence, "Incidence matrix (Matrix Market), overrides --input");
        app.add_option("--segments", segments, "Vertex segments TSV, overrides --input");
        app.add_option("--truth", truth, "Ground truth TSV, overrides --input");
        app.add_option("--weights", weights, "Hyperedge weights as dense text (n x 1); uniform when omitted");
    }

    std::string resolve(const std::string& explicit_path, const char* suffix, const char* what) const {
        if (!explicit_path.empty()) return explicit_path;
        if (prefix.empty()) throw InvalidInput(std::string("no ") + what + " file: give --input or --" + what);
        return prefix + suffix;
    }

    HypergraphModel hypergraph() const {
        return load_hypergraph(resolve(incidence, ".mtx", "incidence"), resolve(segments, ".segments.tsv", "segments"));
    }
    GroundTruth ground_truth() const { return read_truth(resolve(truth, ".truth.tsv", "truth")); }

    Vector edge_weights(const HypergraphModel& hg) const {
        const std::size_t n = hg.edge_count();
        if (weights.empty()) return Vector(n, 1.0 / double(n));
        const auto d = read_dense(weights);
        if (d.rows() * d.cols() != n)
            throw InvalidInput("weights file has " + std::to_string(d.rows() * d.cols()) + " values, expected " +
                               std::to_string(n));
        Vector w(d.data().begin(), d.data().end());
        double sum = 0.0;
        for (double x : w) {
            if (x < 0.0) throw InvalidInput("weights must be nonnegative");
            sum += x;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw InvalidInput("weights must sum to 1");
        return w;
    }
};

struct SolverOptions {
    std::string solver = "cg";
    double theta = default_theta;
    std::uint64_t seed = 0;
    std::size_t threshold = 50;
    std::string leaf_mode = "rsvd";
    std::size_t power_iters = 2;
    double cg_tolerance = 1e-10;

    void add_to(CLI::App& app) {
        app.add_option("--solver", solver, "direct | block-rsvd | cg")->capture_default_str();
        app.add_option("--theta", theta, "Regularization theta (> 0)")->capture_default_str();
        app.add_option("--seed", seed, "Seed for randomized solvers")->capture_default_str();
        app.add_option("--threshold", threshold, "Block size threshold for block-rsvd")->capture_default_str();
        app.add_option("--leaf-mode", leaf_mode, "Leaf inversion for block-rsvd: rsvd | direct")->capture_default_str();
        app.add_option("--power-iters", power_iters, "Subspace iterations in leaf rsvd")->capture_default_str();
        app.add_option("--cg-tolerance", cg_tolerance, "Relative residual tolerance for cg")->capture_default_str();
    }

    RankConfig rank_config() const {
        if (!(theta > 0.0)) throw InvalidInput("theta must be > 0");
        if (threshold == 0) throw InvalidInput("threshold must be >= 1");
        RankConfig cfg;
        cfg.solver = parse_solver(solver);
        cfg.seed = seed;
        cfg.leaf_threshold = threshold;
        if (leaf_mode == "rsvd")
            cfg.leaf_mode = LeafMode::rsvd;
        else if (leaf_mode == "direct")
            cfg.leaf_mode = LeafMode::direct;
        else
            throw InvalidInput("leaf-mode must be rsvd or direct, got '" + leaf_mode + "'");
        cfg.power_iters = power_iters;
        cfg.cg_tolerance = cg_tolerance;
        return cfg;
    }
};

GroundTruth restrict_truth(const GroundTruth& truth, const std::vector<std::size_t>& images) {
    if (images.empty()) return truth;
    GroundTruth out;
    for (std::size_t img : images) {
        const auto it = truth.find(img);
        if (it == truth.end()) throw InvalidInput("image " + std::to_string(img) + " has no ground truth entry");
        out.emplace(img, it->second);
    }
    return out;
}

// --- generate -------------------------------------------------------------------------

struct GenerateCmd {
    std::string out;
    std::optional<std::size_t> size;
    SyntheticSpec spec;

    void add_to(CLI::App& app) {
        app.add_option("--out", out, "Output prefix");
        app.add_option("--size", size, "Total vertex count; splits types in full-scale proportions");
        app.add_option("--images", spec.images)->capture_default_str();
        app.add_option("--users", spec.users)->capture_default_str();
        app.add_option("--groups", spec.groups)->capture_default_str();
        app.add_option("--geo", spec.geo)->capture_default_str();
        app.add_option("--tags", spec.tags)->capture_default_str();
        app.add_option("--clusters", spec.clusters)->capture_default_str();
        app.add_option("--p-in", spec.p_in)->capture_default_str();
        app.add_option("--p-out", spec.p_out)->capture_default_str();
        app.add_option("--test-fraction", spec.test_fraction)->capture_default_str();
        app.add_option("--seed", spec.seed)->capture_default_str();
    }

    int run() {
        if (out.empty()) throw InvalidInput("generate needs --out PREFIX");
        SyntheticSpec s = spec;
        if (size) {
            s = SyntheticSpec::scaled(*size, spec.clusters, spec.seed);
            s.p_in = spec.p_in;
            s.p_out = spec.p_out;
            s.test_fraction = spec.test_fraction;
        }
        const auto data = generate_synthetic(s);
        write_synthetic(out, data, s);
        std::cout << "wrote " << out << ".{mtx,segments.tsv,truth.tsv,gen.conf}: m=" << data.hg.vertex_count()
                  << " n=" << data.hg.edge_count() << " test_images=" << data.truth.size() << '\n';
        return exit_ok;
    }
};

// --- rank -----------------------------------------------------------------------------

struct RankCmd {
    InputOptions input;
    SolverOptions solver;
    std::vector<std::size_t> images;
    std::size_t top = 10;
    std::string out;
    std::string scores_out;

    void add_to(CLI::App& app) {
        input.add_to(app);
        solver.add_to(app);
        app.add_option("--image", images, "Image vertex to rank (repeatable or CSV); all test images by default")
            ->delimiter(',');
        app.add_option("--top", top, "Number of tags reported per image")->capture_default_str();
        app.add_option("--out", out, "JSONL output (stdout when omitted)");
        app.add_option("--scores-out", scores_out, "Write the full ranking vector f (dense text); needs one --image");
    }

    int run() {
        const auto hg = input.hypergraph();
        const auto truth = input.ground_truth();
        const auto w = input.edge_weights(hg);
        const auto cfg = solver.rank_config();
        const auto sys = build_adjacency(hg, w, solver.theta);

        std::vector<std::size_t> targets = images;
        if (targets.empty())
            for (const auto& [img, tags] : truth) targets.push_back(img);
        if (!scores_out.empty() && targets.size() != 1) throw InvalidInput("--scores-out needs exactly one --image");

        Output sink(out);
        for (std::size_t img : targets) {
            std::vector<std::size_t> withheld;
            if (const auto it = truth.find(img); it != truth.end()) withheld = it->second;
            const auto query = build_query(hg, sys, img, withheld);
            const auto result = rank(sys, query.y, cfg);
            nlohmann::json j{{"image", img},
                             {"owner", query.owner},
                             {"solver", solver_name(result.solver)},
                             {"residual", result.residual},
                             {"seconds", result.seconds},
                             {"top", top_tags(hg, result.f, top)}};
            if (result.solver == Solver::block_rsvd) j["threshold"] = result.threshold;
            if (result.solver == Solver::cg) j["iterations"] = result.iterations;
            if (!withheld.empty()) {
                nlohmann::json scores = nlohmann::json::object();
                for (std::size_t k : default_eval_positions) {
                    const auto pr = score_at(top_tags(hg, result.f, k), withheld);
                    scores[std::to_string(k)] = {{"precision", pr.precision}, {"recall", pr.recall}, {"f1", pr.f1}};
                }
                j["scores"] = scores;
            }
            sink.stream() << j.dump() << '\n';
            if (!scores_out.empty()) {
                DenseMatrix f(result.f.size(), 1);
                std::copy(result.f.begin(), result.f.end(), f.data().begin());
                write_dense(scores_out, f);
            }
        }
        return exit_ok;
    }
};

// --- learn / eval ---------------------------------------------------------------------

struct LearningOptions {
    double kappa = default_kappa;
    double mu = default_mu;
    std::size_t inner_steps = 10;
    std::size_t outer_passes = 2;
    std::size_t first_threshold = 50;
    std::size_t later_threshold = 500;

    void add_to(CLI::App& app) {
        app.add_option("--kappa", kappa, "Weight regularization kappa (>= 0)")->capture_default_str();
        app.add_option("--mu", mu, "Initial step size mu (> 0)")->capture_default_str();
        app.add_option("--inner-steps", inner_steps, "Weight learning steps between rankings")->capture_default_str();
        app.add_option("--outer-passes", outer_passes, "Ranking passes per image")->capture_default_str();
        app.add_option("--first-threshold", first_threshold, "Block threshold on the first pass (block-rsvd)")
            ->capture_default_str();
        app.add_option("--later-threshold", later_threshold, "Block threshold on later passes (block-rsvd)")
            ->capture_default_str();
    }
};

EvalReport run_method(const std::string& method, const InputOptions& input, const SolverOptions& solver,
                      const LearningOptions& learning, const std::vector<std::size_t>& positions,
                      const std::vector<std::size_t>& images, std::size_t threads) {
    const auto hg = input.hypergraph();
    const auto truth = restrict_truth(input.ground_truth(), images);
    const auto w = input.edge_weights(hg);

    PipelineConfig cfg;
    cfg.theta = solver.theta;
    cfg.rank = solver.rank_config();
    if (!positions.empty()) cfg.positions = positions;
    cfg.threads = threads;
    if (method == "ith") return run_ith(hg, w, truth, cfg);
    if (method != "ith-hweg") throw InvalidInput("method must be ith or ith-hweg, got '" + method + "'");

    if (learning.outer_passes == 0) throw InvalidInput("outer-passes must be >= 1");
    cfg.first_threshold = learning.first_threshold;
    cfg.later_threshold = learning.later_threshold;
    cfg.inner_steps = learning.inner_steps;
    cfg.outer_passes = learning.outer_passes;
    WeightState w0;
    w0.w = w;
    w0.kappa = learning.kappa;
    w0.mu = learning.mu;
    w0.validate();
    return run_ith_hweg(hg, w0, truth, cfg);
}

void print_summary(const EvalReport& report) {
    std::cerr << report.method << " solver=" << solver_name(report.solver) << " images=" << report.images.size();
    for (std::size_t i = 0; i < report.positions.size(); ++i)
        std::cerr << " F1@" << report.positions[i] << "=" << report.f1[i];
    std::cerr << " seconds=" << report.total_seconds << '\n';
}

struct LearnCmd {
    InputOptions input;
    SolverOptions solver;
    LearningOptions learning;
    std::vector<std::size_t> images;
    std::size_t threads = 1;
    std::string out;
    bool no_timing = false;

    void add_to(CLI::App& app) {
        input.add_to(app);
        solver.add_to(app);
        learning.add_to(app);
        app.add_option("--image", images, "Restrict to these test images (repeatable or CSV)")->delimiter(',');
        app.add_option("--threads", threads, "Images processed concurrently")->capture_default_str();
        app.add_option("--out", out, "JSONL report with per-pass weight traces (stdout when omitted)");
        app.add_flag("--no-timing", no_timing, "Omit wall-clock fields from the report");
    }

    int run() {
        const auto report = run_method("ith-hweg", input, solver, learning, {}, images, threads);
        Output sink(out);
        write_report_jsonl(sink.stream(), report, !no_timing);
        print_summary(report);
        return exit_ok;
    }
};

struct EvalCmd {
    InputOptions input;
    SolverOptions solver;
    LearningOptions learning;
    std::string method = "ith";
    std::vector<std::size_t> at{default_eval_positions.begin(), default_eval_positions.end()};
    std::vector<std::size_t> images;
    std::size_t threads = 1;
    std::string out;
    bool no_timing = false;

    void add_to(CLI::App& app) {
        input.add_to(app);
        solver.add_to(app);
        learning.add_to(app);
        app.add_option("--method", method, "ith | ith-hweg")->capture_default_str();
        app.add_option("--at", at, "Ranking positions k for F1@k")->delimiter(',')->capture_default_str();
        app.add_option("--image", images, "Restrict to these test images (repeatable or CSV)")->delimiter(',');
        app.add_option("--threads", threads, "Images processed concurrently")->capture_default_str();
        app.add_option("--out", out, "JSONL report (stdout when omitted)");
        app.add_flag("--no-timing", no_timing, "Omit wall-clock fields from the report");
    }

    int run() {
        if (at.empty()) throw InvalidInput("--at needs at least one position");
        for (std::size_t k : at)
            if (k == 0) throw InvalidInput("--at positions must be >= 1");
        const auto report = run_method(method, input, solver, learning, at, images, threads);
        Output sink(out);
        write_report_jsonl(sink.stream(), report, !no_timing);
        print_summary(report);
        return exit_ok;
    }
};

// --- bench ----------------------------------------------------------------------------

struct BenchCmd {
    BenchConfig cfg;
    std::vector<std::string> solvers{"direct", "block-rsvd", "cg"};
    std::string out;

    void add_to(CLI::App& app) {
        app.add_option("--sizes", cfg.sizes, "Vertex counts m")->delimiter(',')->capture_default_str();
        app.add_option("--solvers", solvers, "Solvers to time")->delimiter(',')->capture_default_str();
        app.add_option("--out", out, "Output path; writes PATH.csv and PATH.jsonl");
        app.add_option("--images-per-size", cfg.images_per_size, "Test images timed per size")->capture_default_str();
        app.add_option("--vertices-per-cluster", cfg.vertices_per_cluster)->capture_default_str();
        app.add_option("--theta", cfg.theta)->capture_default_str();
        app.add_option("--threshold", cfg.threshold, "Block threshold for block-rsvd")->capture_default_str();
        app.add_option("--seed", cfg.seed)->capture_default_str();
    }

    int run() {
        if (out.empty()) throw InvalidInput("bench needs --out PATH");
        cfg.solvers.clear();
        for (const auto& s : solvers) cfg.solvers.push_back(parse_solver(s));
        if (cfg.solvers.empty() || cfg.sizes.empty()) throw InvalidInput("bench needs at least one size and solver");
        std::ofstream csv(out + ".csv");
        std::ofstream jsonl(out + ".jsonl");
        if (!csv || !jsonl) throw InvalidInput("cannot open bench outputs at prefix " + out);
        const auto rows = run_bench(cfg, [](const BenchRow& r) {
            std::cerr << "m=" << r.m << " solver=" << solver_name(r.solver) << " total=" << r.total_seconds
                      << "s per_image=" << r.per_image_seconds << "s max_residual=" << r.max_residual << '\n';
        });
        write_bench_csv(csv, rows);
        write_bench_jsonl(jsonl, rows);
        return exit_ok;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hypergraph tag ranking with adaptive hyperedge weights"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    GenerateCmd generate;
    RankCmd rank_cmd;
    LearnCmd learn;
    EvalCmd eval;
    BenchCmd bench;

    struct Entry {
        CLI::App* app;
        std::string config;
    };
    std::vector<Entry> subs;
    auto add_sub = [&](const char* name, const char* help, auto& cmd) {
        auto* sub = app.add_subcommand(name, help);
        cmd.add_to(*sub);
        subs.push_back({sub, {}});
        return sub;
    };
    add_sub("generate", "Write a planted-cluster synthetic dataset", generate);
    add_sub("rank", "Rank tags for test images with fixed weights", rank_cmd);
    add_sub("learn", "Alternate ranking and hyperedge weight learning", learn);
    add_sub("eval", "Macro-averaged F1@k over test images", eval);
    add_sub("bench", "Time the solvers over increasing m", bench);
    for (auto& e : subs) e.app->add_option("--config", e.config, "Flat 'key = value' file; keys are flag names");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_invalid;
    }

    try {
        for (auto& e : subs) {
            if (!e.app->parsed()) continue;
            if (!e.config.empty()) apply_flat_config(*e.app, e.config);
            const std::string name = e.app->get_name();
            if (name == "generate") return generate.run();
            if (name == "rank") return rank_cmd.run();
            if (name == "learn") return learn.run();
            if (name == "eval") return eval.run();
            if (name == "bench") return bench.run();
        }
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_invalid;
    } catch (const NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return exit_numerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_other;
    }
    return exit_other;
}
