// dpdsis: robust variable screening from the command line.

#include "dpdsis/errors.hpp"
#include "dpdsis/io.hpp"
#include "dpdsis/isis.hpp"
#include "dpdsis/parallel.hpp"
#include "dpdsis/penalized.hpp"
#include "dpdsis/robustness.hpp"
#include "dpdsis/screeners.hpp"
#include "dpdsis/simbench.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#ifndef DPDSIS_VERSION
#define DPDSIS_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace dpdsis;

namespace {

struct Common {
    std::string input;
    std::string response = "0";
    double alpha = 0.3;
    std::optional<Index> d;
    std::string standardize;
    std::optional<double> lambda;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    std::string output = "dpdsis_out";
};

struct Run {
    std::string command;
    std::vector<std::string> argv;
    json options = json::object();
    json input = nullptr;
    json result = json::object();
    std::vector<std::string> warnings;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    void warn(const std::string& msg) {
        std::cerr << "warning: " << msg << "\n";
        warnings.push_back(msg);
    }
};

void add_data_flags(CLI::App* cmd, Common& c) {
    cmd->add_option("--input", c.input, "Delimited data file (comma or tab)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--response", c.response, "Response column: header name or 0-based index")->capture_default_str();
    cmd->add_option("--alpha", c.alpha, "DPD tuning parameter")->capture_default_str()->check(CLI::NonNegativeNumber);
    cmd->add_option("--d", c.d, "Model size");
    cmd->add_option("--standardize", c.standardize, "classical, robust or none (default: the method's own)")
        ->check(CLI::IsMember({"classical", "robust", "none"}));
    cmd->add_option("--lambda", c.lambda, "L1 penalty (default sqrt(log p / n))")->check(CLI::NonNegativeNumber);
}

void add_run_flags(CLI::App* cmd, Common& c) {
    cmd->add_option("--seed", c.seed, "Seed (recorded; simulate uses it)")->capture_default_str();
    cmd->add_option("--threads", c.threads, "Worker threads, 0 for all cores")->capture_default_str();
    cmd->add_option("--output", c.output, "Output directory")->capture_default_str();
}

std::ofstream open_out(const Common& c, const std::string& name) {
    std::ofstream out(fs::path(c.output) / name);
    if (!out) {
        throw DataError("cannot write '" + (fs::path(c.output) / name).string() + "'");
    }
    return out;
}

void write_manifest(const Common& c, Run& run) {
    json m;
    m["command"] = run.command;
    m["argv"] = run.argv;
    m["options"] = run.options;
    m["seed"] = c.seed;
    m["version"] = DPDSIS_VERSION;
    m["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - run.start).count();
    m["input"] = run.input;
    m["warnings"] = run.warnings;
    m["result"] = run.result;
    open_out(c, "manifest.json") << m.dump(2) << "\n";
}

InputTable load(const Common& c, Run& run) {
    const std::string text = read_file(c.input);
    InputTable t = parse_table(text, c.response);
    run.input = {{"path", c.input},
                 {"fnv1a64", fnv1a64_hex(text)},
                 {"n", t.y.size()},
                 {"p", t.x.cols()},
                 {"header", t.has_header},
                 {"delimiter", t.delimiter == '\t' ? "tab" : "comma"},
                 {"response", t.response_name}};
    return t;
}

Index clamp_d(Index d, Index p, Run& run) {
    if (d < 1) {
        throw ArgumentError("d must be at least 1");
    }
    if (d > p) {
        run.warn("d = " + std::to_string(d) + " exceeds p = " + std::to_string(p) + "; using d = " + std::to_string(p));
        return p;
    }
    return d;
}

std::string join_indices(const IndexList& v) {
    std::string out;
    for (Index j : v) out += (out.empty() ? "" : " ") + std::to_string(j);
    return out;
}

void write_model(const Common& c, const InputTable& t, const IndexList& model) {
    auto out = open_out(c, "final_model.tsv");
    out << "index\tname\n";
    for (Index j : model) out << j << "\t" << t.covariate_names[static_cast<std::size_t>(j)] << "\n";
}

void write_coefficients(const Common& c, const InputTable& t, const PenalizedFit& fit, const IndexList& cols) {
    auto out = open_out(c, "coefficients.tsv");
    out << "term\tindex\testimate\n";
    out << "(intercept)\t-1\t" << format_full(fit.intercept) << "\n";
    for (std::size_t k = 0; k < cols.size(); ++k) {
        out << t.covariate_names[static_cast<std::size_t>(cols[k])] << "\t" << cols[k] << "\t"
            << format_full(fit.coefficients[static_cast<Index>(k)]) << "\n";
    }
    out << "(sigma)\t-1\t" << format_full(fit.sigma) << "\n";
}

json fit_summary(const PenalizedFit& fit) {
    return {{"lambda", fit.lambda},
            {"sigma", fit.sigma},
            {"objective", fit.objective},
            {"converged", fit.converged},
            {"iterations", fit.n_iter}};
}

int cmd_screen(const Common& c, const std::string& method_text, bool refit, Run& run) {
    const InputTable t = load(c, run);
    ScreenerSpec spec = ScreenerSpec::parse(method_text);
    if (spec.method == Method::dpd && method_text.find(':') == std::string::npos) spec.alpha = c.alpha;
    const StandardizeMode mode =
        c.standardize.empty() ? spec.default_standardization() : parse_standardize_mode(c.standardize);
    const Index n = t.y.size();
    const Index p = t.x.cols();
    const Index d = clamp_d(c.d.value_or(n - 1), p, run);
    if (refit && spec.method != Method::dpd) {
        throw ArgumentError("--refit needs the dpd method");
    }
    const double lambda = c.lambda.value_or(default_lambda(static_cast<double>(n), std::max<double>(2.0, p)));
    run.options = {{"method", method_text}, {"alpha", spec.alpha}, {"d", d}, {"standardize", to_string(mode)},
                   {"refit", refit},        {"lambda", lambda},     {"response", c.response}};

    const Matrix xs = standardize_columns(t.x, mode).values;
    const unsigned threads = resolve_threads(c.threads);
    IndexList model;
    Ranking ranking;
    if (refit) {
        const SisResult res = run_dpd_sis(t.y, xs, spec.alpha, d, true, lambda, {}, threads);
        ranking = res.ranking;
        model = res.final_model.indices;
        std::sort(model.begin(), model.end());
        write_coefficients(c, t, *res.refit, res.screened.indices);
        run.result["refit"] = fit_summary(*res.refit);
    } else {
        ranking = screen(spec, t.y, xs, {}, threads);
        model = select_top(ranking, d).indices;
    }

    auto out = open_out(c, "ranking.tsv");
    out << "index\tname\tscore\trank\n";
    std::vector<Index> rank(static_cast<std::size_t>(p));
    for (std::size_t r = 0; r < ranking.order.size(); ++r) rank[static_cast<std::size_t>(ranking.order[r])] = r + 1;
    for (Index j = 0; j < p; ++j) {
        out << j << "\t" << t.covariate_names[static_cast<std::size_t>(j)] << "\t" << format_full(ranking.scores[j])
            << "\t" << rank[static_cast<std::size_t>(j)] << "\n";
    }
    auto top = open_out(c, "top_d.tsv");
    top << "rank\tindex\tname\n";
    const ModelSet screened = select_top(ranking, d);
    for (std::size_t r = 0; r < screened.indices.size(); ++r) {
        top << r + 1 << "\t" << screened.indices[r] << "\t"
            << t.covariate_names[static_cast<std::size_t>(screened.indices[r])] << "\n";
    }
    write_model(c, t, model);
    run.result["method"] = ranking.method.label();
    run.result["final_model_size"] = model.size();
    return 0;
}

int cmd_isis(const Common& c, std::optional<Index> d_prime, int max_iter, Run& run) {
    const InputTable t = load(c, run);
    const Index n = t.y.size();
    const Index p = t.x.cols();
    IsisConfig cfg;
    cfg.alpha = c.alpha;
    cfg.d = clamp_d(c.d.value_or(default_isis_d(n)), p, run);
    if (d_prime) {
        cfg.schedule = DPrimeSchedule::fixed;
        cfg.fixed_k = clamp_d(*d_prime, p, run);
    }
    cfg.max_iter = max_iter;
    cfg.lambda = c.lambda.value_or(default_lambda(static_cast<double>(n), std::max<double>(2.0, p)));
    cfg.threads = resolve_threads(c.threads);
    const StandardizeMode mode = c.standardize.empty() ? StandardizeMode::classical : parse_standardize_mode(c.standardize);
    run.options = {{"alpha", cfg.alpha},
                   {"d", cfg.d},
                   {"d_prime", d_prime ? json(cfg.fixed_k) : json("van")},
                   {"max_iter", cfg.max_iter},
                   {"lambda", *cfg.lambda},
                   {"standardize", to_string(mode)},
                   {"response", c.response}};

    const Matrix xs = standardize_columns(t.x, mode).values;
    const IsisResult res = run_dpd_isis(t.y, xs, cfg);

    auto it = open_out(c, "iterations.tsv");
    it << "iteration\td_prime\tcandidates\tactive\tsigma\tconverged\n";
    for (std::size_t i = 0; i < res.iterations.size(); ++i) {
        const IsisIteration& rec = res.iterations[i];
        it << i + 1 << "\t" << rec.d_prime << "\t" << join_indices(rec.candidates) << "\t" << join_indices(rec.active)
           << "\t" << format_full(rec.refit.sigma) << "\t" << (rec.refit.converged ? "true" : "false") << "\n";
    }
    write_model(c, t, res.final_model.indices);
    write_coefficients(c, t, res.final_fit, res.final_model.indices);
    run.result = {{"stop_reason", to_string(res.stop_reason)},
                  {"iterations", res.iterations.size()},
                  {"trimmed", res.trimmed},
                  {"final_model_size", res.final_model.indices.size()},
                  {"final_fit", fit_summary(res.final_fit)}};
    return 0;
}

int cmd_simulate(const Common& c, const std::string& config_path, const std::string& preset,
                 std::optional<int> reps, bool seed_given, Run& run) {
    std::string text;
    if (!config_path.empty()) {
        text = read_file(config_path);
        run.input = {{"path", config_path}, {"fnv1a64", fnv1a64_hex(text)}};
    } else {
        text = preset_text(preset);
        run.input = {{"preset", preset}, {"fnv1a64", fnv1a64_hex(text)}};
    }
    SimConfig cfg = parse_sim_config(text);
    if (reps) cfg.reps = *reps;
    if (seed_given) cfg.seed = c.seed;
    cfg.validate();
    const unsigned threads = resolve_threads(c.threads);
    run.options = {{"config", config_path}, {"preset", preset}, {"reps", cfg.reps}, {"threads", threads}};

    const ExperimentResult res = run_experiment(cfg, threads);
    open_out(c, "config.txt") << to_config_text(cfg);
    auto summary = open_out(c, "summary.tsv");
    write_summary_tsv(summary, res);
    auto records = open_out(c, "records.tsv");
    write_records_tsv(records, res);
    std::ostringstream table;
    write_table(table, res);
    open_out(c, "table.txt") << table.str();
    std::cout << table.str();
    run.result["seed"] = cfg.seed;
    for (const auto& m : res.methods) run.result["ic_pct"][m.label] = m.ic_pct;
    return 0;
}

std::vector<double> parse_grid(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            std::size_t used = 0;
            const double v = std::stod(item, &used);
            if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw ArgumentError(what + ": cannot parse '" + item + "'");
        }
    }
    if (out.empty()) {
        throw ArgumentError(what + " is empty");
    }
    return out;
}

struct CurveOptions {
    std::string alphas = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1";
    std::string deltas = "0.5,1,2";
    ModelTruth truth;
    double x_t = 1.0;
    double y_range = 10.0;
    double y_step = 0.01;
};

int cmd_robustness(const Common& c, const CurveOptions& o, Run& run) {
    const std::vector<double> alphas = parse_grid(o.alphas, "--alphas");
    const std::vector<double> deltas = parse_grid(o.deltas, "--deltas");
    o.truth.validate();
    if (!(o.y_step > 0.0) || !(o.y_range > 0.0)) {
        throw ArgumentError("--y-step and --y-range must be positive");
    }
    const ModelTruth& t = o.truth;
    run.options = {{"alphas", alphas},   {"deltas", deltas},       {"gamma0", t.gamma0}, {"beta0", t.beta0},
                   {"sigma0", t.sigma0}, {"ex", t.ex},             {"vx", t.vx},         {"x_t", o.x_t},
                   {"y_range", o.y_range}, {"y_step", o.y_step}};

    auto tr = open_out(c, "if_traces.tsv");
    tr << "alpha\ty_t\tif\n";
    const double line = t.gamma0 + t.beta0 * o.x_t;
    const auto steps = static_cast<long>(std::floor(2.0 * o.y_range / o.y_step + 1e-9));
    for (double a : alphas) {
        for (long k = 0; k <= steps; ++k) {
            const double y_t = line - o.y_range + static_cast<double>(k) * o.y_step;
            tr << format_full(a) << "\t" << format_full(y_t) << "\t" << format_full(influence_function(y_t, o.x_t, t, a))
               << "\n";
        }
    }
    auto ges = open_out(c, "ges.tsv");
    ges << "delta\talpha\tges\n";
    for (double delta : deltas) {
        const SensitivityCurve curve = ges_curve(t, alphas, delta);
        for (std::size_t i = 0; i < alphas.size(); ++i) {
            ges << format_full(delta) << "\t" << format_full(alphas[i]) << "\t"
                << (curve.values[i] == kUnbounded ? std::string("unbounded") : format_full(curve.values[i])) << "\n";
        }
    }
    auto are = open_out(c, "are.tsv");
    are << "alpha\tasymptotic_variance\tare\n";
    const SensitivityCurve curve = are_curve(t, alphas);
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        are << format_full(alphas[i]) << "\t" << format_full(asymptotic_variance(t, alphas[i])) << "\t"
            << format_full(curve.values[i]) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust variable screening with the density power divergence"};
    app.set_version_flag("--version", DPDSIS_VERSION);
    app.require_subcommand(1);

    Common common;
    Run run;
    for (int i = 0; i < argc; ++i) run.argv.emplace_back(argv[i]);

    auto* screen_cmd = app.add_subcommand("screen", "Rank covariates by a marginal screener and keep the top d");
    std::string method = "dpd";
    bool refit = false;
    add_data_flags(screen_cmd, common);
    add_run_flags(screen_cmd, common);
    screen_cmd->add_option("--method", method, "dpd[:alpha], sis, reg, rank[:spearman], gk, dcor or mcp")
        ->capture_default_str();
    screen_cmd->add_flag("--refit", refit, "Penalized DPD refit on the top d; its support becomes the model");

    auto* isis_cmd = app.add_subcommand("isis", "Iterative DPD screening with penalized refits");
    std::optional<Index> d_prime;
    int max_iter = 10;
    add_data_flags(isis_cmd, common);
    add_run_flags(isis_cmd, common);
    isis_cmd->add_option("--d-prime", d_prime, "Candidates per iteration (default: floor(2d/3), then d - |A|)");
    isis_cmd->add_option("--max-iter", max_iter, "Iteration cap")->capture_default_str()->check(CLI::PositiveNumber);

    auto* sim_cmd = app.add_subcommand("simulate", "Run a replicated screening experiment");
    std::string config_path;
    std::string preset;
    std::optional<int> reps;
    add_run_flags(sim_cmd, common);
    auto* config_opt = sim_cmd->add_option("--config", config_path, "key = value experiment file")
                           ->check(CLI::ExistingFile);
    auto* preset_opt = sim_cmd->add_option("--preset", preset, "Shipped experiment (see --list-presets)");
    config_opt->excludes(preset_opt);
    bool list_presets = false;
    sim_cmd->add_flag("--list-presets", list_presets, "Print the preset names and exit");
    sim_cmd->add_option("--reps", reps, "Override the replication count")->check(CLI::PositiveNumber);

    auto* rob_cmd = app.add_subcommand("robustness-curves", "Influence, gross-error sensitivity and efficiency data");
    CurveOptions curves;
    add_run_flags(rob_cmd, common);
    rob_cmd->add_option("--alphas", curves.alphas, "Comma-separated alpha grid")->capture_default_str();
    rob_cmd->add_option("--deltas", curves.deltas, "Comma-separated delta grid for the GES")->capture_default_str();
    rob_cmd->add_option("--gamma0", curves.truth.gamma0, "True intercept")->capture_default_str();
    rob_cmd->add_option("--beta0", curves.truth.beta0, "True slope")->capture_default_str();
    rob_cmd->add_option("--sigma0", curves.truth.sigma0, "True error scale")->capture_default_str();
    rob_cmd->add_option("--ex", curves.truth.ex, "E(X)")->capture_default_str();
    rob_cmd->add_option("--vx", curves.truth.vx, "Var(X)")->capture_default_str();
    rob_cmd->add_option("--x-t", curves.x_t, "Covariate value of the IF traces")->capture_default_str();
    rob_cmd->add_option("--y-range", curves.y_range, "Half-width of the y_t grid around the line")
        ->capture_default_str();
    rob_cmd->add_option("--y-step", curves.y_step, "Spacing of the y_t grid")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        int status = 0;
        if (sim_cmd->parsed() && list_presets) {
            for (const auto& name : preset_names()) std::cout << name << "\n";
            return 0;
        }
        fs::create_directories(common.output);
        if (screen_cmd->parsed()) {
            run.command = "screen";
            status = cmd_screen(common, method, refit, run);
        } else if (isis_cmd->parsed()) {
            run.command = "isis";
            status = cmd_isis(common, d_prime, max_iter, run);
        } else if (sim_cmd->parsed()) {
            run.command = "simulate";
            if (config_path.empty() && preset.empty()) {
                throw ArgumentError("simulate needs --config or --preset");
            }
            const bool seed_given = sim_cmd->get_option("--seed")->count() > 0;
            status = cmd_simulate(common, config_path, preset, reps, seed_given, run);
        } else {
            run.command = "robustness-curves";
            status = cmd_robustness(common, curves, run);
        }
        write_manifest(common, run);
        return status;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
