#pragma once

// Synthetic screening experiments: designs, responses with shift
// contamination, per-replication metrics, and replicated runs over a set of
// methods that all see the same dataset.

#include "dpdsis/screeners.hpp"
#include "dpdsis/types.hpp"

#include <boost/random/mersenne_twister.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dpdsis {

enum class Structure { independent, ar1, equicorr };

Structure parse_structure(const std::string& text);
std::string to_string(Structure s);

/// A method in an experiment: a marginal screener ranked at model size d, or
/// DPD-ISIS at the given alpha judged on its final model.
struct MethodSpec {
    bool isis = false;
    ScreenerSpec screener;  // for isis only `screener.alpha` is used

    /// Screener syntax of ScreenerSpec::parse, plus "isis:<alpha>".
    static MethodSpec parse(const std::string& text);
    /// "SIS", "DPD-SIS(0.3)", "DPD-ISIS(0.3)", ...
    std::string label() const;
    /// Round-trips through parse.
    std::string key() const;
};

struct SimConfig {
    std::string name = "custom";
    Index n = 100;
    /// Number of regression coefficients including the intercept; X has p - 1 columns.
    Index p = 1000;
    /// Nonzero coefficients including the intercept.
    Index s = 5;
    double coef = 1.0;
    double sigma = 1.0;
    Structure structure = Structure::independent;
    double rho = 0.0;
    double contam_frac = 0.0;
    double contam_shift = -30.0;
    int reps = 100;
    std::uint64_t seed = 1;
    /// Screening model size; defaults to n - 1.
    std::optional<Index> d;
    /// Model size handed to ISIS; defaults to n - 1.
    std::optional<Index> isis_d;
    int isis_max_iter = 10;
    /// Place the active covariates at random positions instead of first.
    bool scatter_active = false;
    std::vector<MethodSpec> methods;

    Index covariates() const { return p - 1; }
    Index model_size() const { return d.value_or(n - 1); }
    Index isis_model_size() const { return isis_d.value_or(n - 1); }
    /// Throws ConfigError naming the offending field.
    void validate() const;
};

struct TrueModel {
    Vector beta;        // p entries: intercept, then one per covariate
    IndexList active;   // 0-based covariate columns with nonzero slopes, ascending
};

using Rng = boost::random::mt19937_64;

/// Independent substreams of one replication.
enum class Stream : std::uint64_t { design = 1, response = 2, contamination = 3, placement = 4 };

/// Engine seeded from (seed, rep, stream) through splitmix64.
Rng make_stream(std::uint64_t seed, std::uint64_t rep, Stream stream);

/// n x (p - 1) covariates from N(0, Sigma_x), drawn row by row from the design stream.
Matrix gen_design(const SimConfig& cfg, std::uint64_t rep);

/// Coefficients `coef` on the intercept and the s - 1 active covariates
/// (the first ones, or random ones drawn from the placement stream).
TrueModel make_truth(const SimConfig& cfg, std::uint64_t rep);

/// beta_0 + X beta_{1..} + sigma z.
Vector gen_response(MatrixRef x, const TrueModel& truth, double sigma, Rng& rng);

/// Adds `shift` to round-half-up(eps n) distinct, uniformly chosen entries.
/// Returns the new response and the ascending contaminated indices.
std::pair<Vector, IndexList> contaminate(VectorRef y, double eps, double shift, Rng& rng);

/// 1 iff every active covariate is in the top d.
int metric_ic(const Ranking& ranking, const TrueModel& truth, Index d);
/// Active covariates among the top d.
int metric_tp(const Ranking& ranking, const TrueModel& truth, Index d);
/// Largest 1-based rank of an active covariate.
Index metric_mms(const Ranking& ranking, const TrueModel& truth);

struct MetricsSummary {
    std::string label;
    double ic_pct = 0.0;            // over replications without a failure
    std::vector<int> ic;            // per replication; -1 when the method failed
    std::vector<int> tp;            // -1 when failed
    std::vector<Index> mms;         // -1 when failed or undefined (ISIS)
    std::vector<double> runtimes;   // wall-clock seconds
    int failures = 0;
};

struct ExperimentResult {
    SimConfig config;
    std::vector<MetricsSummary> methods;  // in config.methods order
};

/// Runs every replication, each on `threads` workers at most. Results do not
/// depend on the worker count. A method that throws in a replication is
/// recorded as missing there.
ExperimentResult run_experiment(const SimConfig& cfg, unsigned threads = 1);

/// `key = value` lines; '#' starts a comment. Unknown keys raise ConfigError
/// listing the valid ones. Values not given keep their defaults.
SimConfig parse_sim_config(const std::string& text);
/// Inverse of parse_sim_config.
std::string to_config_text(const SimConfig& cfg);

std::vector<std::string> preset_names();
/// Config text of a shipped preset; throws ConfigError for an unknown name.
std::string preset_text(const std::string& name);

/// One row per method and metric: method, metric, value (%.17g).
void write_summary_tsv(std::ostream& out, const ExperimentResult& result);
/// One row per replication and method: rep, method, ic, tp, mms, seconds.
void write_records_tsv(std::ostream& out, const ExperimentResult& result);
/// Human table: IC%, median TP, median MMS per method (4 significant digits).
void write_table(std::ostream& out, const ExperimentResult& result);

/// Median of the non-missing entries (NaN if none).
double median_of(const std::vector<Index>& values);
double median_of(const std::vector<int>& values);

}  // namespace dpdsis
