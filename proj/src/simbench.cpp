#include "dpdsis/simbench.hpp"

#include "dpdsis/errors.hpp"
#include "dpdsis/isis.hpp"
#include "dpdsis/parallel.hpp"

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace dpdsis {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Shortest of %.15g / %.17g that reads back exactly.
std::string fmt_exact(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    if (std::strtod(buf, nullptr) == v) return buf;
    return fmt17(v);
}

std::string fmt4(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

double parse_real(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double out = std::stod(v, &used);
        if (used == v.size() && std::isfinite(out)) return out;
    } catch (const std::exception&) {
    }
    throw ConfigError("'" + key + "' needs a finite number, got '" + v + "'");
}

long long parse_integer(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const long long out = std::stoll(v, &used);
        if (used == v.size()) return out;
    } catch (const std::exception&) {
    }
    throw ConfigError("'" + key + "' needs an integer, got '" + v + "'");
}

std::uint64_t parse_seed(const std::string& v) {
    try {
        std::size_t used = 0;
        const unsigned long long out = std::stoull(v, &used);
        if (used == v.size() && v.find('-') == std::string::npos) return out;
    } catch (const std::exception&) {
    }
    throw ConfigError("'seed' needs a nonnegative 64-bit integer, got '" + v + "'");
}

bool parse_bool(const std::string& key, const std::string& v) {
    const std::string t = lower(v);
    if (t == "true" || t == "yes" || t == "1") return true;
    if (t == "false" || t == "no" || t == "0") return false;
    throw ConfigError("'" + key + "' needs true or false, got '" + v + "'");
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys{
        "name", "n", "p", "s", "coef", "sigma", "structure", "rho", "contam_frac", "contam_shift",
        "reps", "seed", "d", "isis_d", "isis_max_iter", "scatter_active", "methods",
    };
    return keys;
}

std::string join_keys() {
    std::string out;
    for (const auto& k : config_keys()) {
        if (!out.empty()) out += ", ";
        out += k;
    }
    return out;
}

// 1-based rank of every covariate.
std::vector<Index> positions(const Ranking& ranking) {
    std::vector<Index> pos(ranking.order.size());
    for (std::size_t r = 0; r < ranking.order.size(); ++r) {
        pos[static_cast<std::size_t>(ranking.order[r])] = static_cast<Index>(r) + 1;
    }
    return pos;
}

struct RepOutcome {
    int ic = -1;
    int tp = -1;
    Index mms = -1;
    double seconds = 0.0;
};

std::vector<RepOutcome> run_replication(const SimConfig& cfg, std::uint64_t rep) {
    const Matrix x = gen_design(cfg, rep);
    const TrueModel truth = make_truth(cfg, rep);
    Rng response_rng = make_stream(cfg.seed, rep, Stream::response);
    const Vector clean = gen_response(x, truth, cfg.sigma, response_rng);
    Rng contam_rng = make_stream(cfg.seed, rep, Stream::contamination);
    const Vector y = contaminate(clean, cfg.contam_frac, cfg.contam_shift, contam_rng).first;

    std::map<StandardizeMode, Matrix> standardized;
    const auto design_for = [&](StandardizeMode mode) -> const Matrix& {
        auto it = standardized.find(mode);
        if (it == standardized.end()) {
            it = standardized.emplace(mode, standardize_columns(x, mode).values).first;
        }
        return it->second;
    };

    std::vector<RepOutcome> out(cfg.methods.size());
    for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
        const MethodSpec& method = cfg.methods[m];
        const auto start = std::chrono::steady_clock::now();
        try {
            if (method.isis) {
                IsisConfig ic;
                ic.alpha = method.screener.alpha;
                ic.d = cfg.isis_model_size();
                ic.max_iter = cfg.isis_max_iter;
                const IsisResult res = run_dpd_isis(y, design_for(StandardizeMode::classical), ic);
                int tp = 0;
                for (Index j : truth.active) {
                    tp += std::binary_search(res.final_model.indices.begin(), res.final_model.indices.end(), j) ? 1 : 0;
                }
                out[m].tp = tp;
                out[m].ic = tp == static_cast<int>(truth.active.size()) ? 1 : 0;
            } else {
                const Matrix& xs = design_for(method.screener.default_standardization());
                const Ranking ranking = screen(method.screener, y, xs);
                out[m].ic = metric_ic(ranking, truth, cfg.model_size());
                out[m].tp = metric_tp(ranking, truth, cfg.model_size());
                out[m].mms = metric_mms(ranking, truth);
            }
        } catch (const std::exception&) {
            out[m] = RepOutcome{};
        }
        out[m].seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    return out;
}

}  // namespace

Structure parse_structure(const std::string& text) {
    const std::string t = lower(trim(text));
    if (t == "independent") return Structure::independent;
    if (t == "ar1") return Structure::ar1;
    if (t == "equicorr") return Structure::equicorr;
    throw ConfigError("structure must be independent, ar1 or equicorr, got '" + text + "'");
}

std::string to_string(Structure s) {
    switch (s) {
        case Structure::independent:
            return "independent";
        case Structure::ar1:
            return "ar1";
        case Structure::equicorr:
            return "equicorr";
    }
    return "?";
}

MethodSpec MethodSpec::parse(const std::string& text) {
    const std::string t = trim(text);
    const auto colon = t.find(':');
    if (lower(t.substr(0, colon)) == "isis") {
        MethodSpec m;
        m.isis = true;
        m.screener = ScreenerSpec::parse("dpd" + (colon == std::string::npos ? std::string() : t.substr(colon)));
        return m;
    }
    return MethodSpec{false, ScreenerSpec::parse(t)};
}

std::string MethodSpec::label() const {
    if (!isis) return screener.label();
    std::ostringstream os;
    os << "DPD-ISIS(" << screener.alpha << ")";
    return os.str();
}

std::string MethodSpec::key() const {
    if (isis) return "isis:" + fmt_exact(screener.alpha);
    switch (screener.method) {
        case Method::dpd:
            return "dpd:" + fmt_exact(screener.alpha);
        case Method::pearson:
            return "sis";
        case Method::reg:
            return "reg";
        case Method::rank:
            return screener.rank_kind == RankCorrelation::kendall ? "rank" : "rank:spearman";
        case Method::gk:
            return "gk";
        case Method::dcor:
            return "dcor";
        case Method::mcp:
            return "mcp";
    }
    return "?";
}

void SimConfig::validate() const {
    if (n < 3) throw ConfigError("n must be at least 3");
    if (p < 2) throw ConfigError("p must be at least 2 (intercept plus one covariate)");
    if (s < 1 || s > p) throw ConfigError("s must lie in [1, p]");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("sigma must be nonnegative");
    if (!std::isfinite(coef)) throw ConfigError("coef must be finite");
    if (!(contam_frac >= 0.0 && contam_frac < 1.0)) throw ConfigError("contam_frac must lie in [0, 1)");
    if (!std::isfinite(contam_shift)) throw ConfigError("contam_shift must be finite");
    if (structure == Structure::ar1 && !(rho > -1.0 && rho < 1.0)) throw ConfigError("ar1 needs rho in (-1, 1)");
    if (structure == Structure::equicorr && !(rho >= 0.0 && rho < 1.0)) {
        throw ConfigError("equicorr needs rho in [0, 1)");
    }
    if (reps < 1) throw ConfigError("reps must be at least 1");
    if (d && *d < 1) throw ConfigError("d must be at least 1");
    if (isis_d && *isis_d < 1) throw ConfigError("isis_d must be at least 1");
    if (isis_max_iter < 1) throw ConfigError("isis_max_iter must be at least 1");
    if (methods.empty()) throw ConfigError("methods is empty");
}

Rng make_stream(std::uint64_t seed, std::uint64_t rep, Stream stream) {
    std::uint64_t x = splitmix64(seed);
    x = splitmix64(x ^ splitmix64(rep));
    x = splitmix64(x ^ static_cast<std::uint64_t>(stream));
    return Rng(x);
}

Matrix gen_design(const SimConfig& cfg, std::uint64_t rep) {
    const Index n = cfg.n;
    const Index k = cfg.covariates();
    Rng rng = make_stream(cfg.seed, rep, Stream::design);
    boost::random::normal_distribution<double> z;
    Matrix x(n, k);
    const double rho = cfg.rho;
    for (Index i = 0; i < n; ++i) {
        switch (cfg.structure) {
            case Structure::independent:
                for (Index j = 0; j < k; ++j) x(i, j) = z(rng);
                break;
            case Structure::ar1: {
                const double innov = std::sqrt(1.0 - rho * rho);
                x(i, 0) = z(rng);
                for (Index j = 1; j < k; ++j) x(i, j) = rho * x(i, j - 1) + innov * z(rng);
                break;
            }
            case Structure::equicorr: {
                const double w = z(rng);
                const double a = std::sqrt(rho);
                const double b = std::sqrt(1.0 - rho);
                for (Index j = 0; j < k; ++j) x(i, j) = a * w + b * z(rng);
                break;
            }
        }
    }
    return x;
}

TrueModel make_truth(const SimConfig& cfg, std::uint64_t rep) {
    const Index k = cfg.covariates();
    const Index m = std::min(cfg.s - 1, k);
    TrueModel t;
    t.beta = Vector::Zero(cfg.p);
    t.beta[0] = cfg.coef;
    if (cfg.scatter_active) {
        Rng rng = make_stream(cfg.seed, rep, Stream::placement);
        IndexList all(static_cast<std::size_t>(k));
        for (Index j = 0; j < k; ++j) all[static_cast<std::size_t>(j)] = j;
        for (Index i = 0; i < m; ++i) {
            boost::random::uniform_int_distribution<Index> pick(i, k - 1);
            std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(pick(rng))]);
        }
        t.active.assign(all.begin(), all.begin() + m);
        std::sort(t.active.begin(), t.active.end());
    } else {
        for (Index j = 0; j < m; ++j) t.active.push_back(j);
    }
    for (Index j : t.active) t.beta[j + 1] = cfg.coef;
    return t;
}

Vector gen_response(MatrixRef x, const TrueModel& truth, double sigma, Rng& rng) {
    if (truth.beta.size() != x.cols() + 1) {
        throw DimensionError("coefficient vector needs " + std::to_string(x.cols() + 1) + " entries");
    }
    boost::random::normal_distribution<double> z;
    Vector y = Vector::Constant(x.rows(), truth.beta[0]);
    for (Index j : truth.active) y += truth.beta[j + 1] * x.col(j);
    for (Index i = 0; i < y.size(); ++i) y[i] += sigma * z(rng);
    return y;
}

std::pair<Vector, IndexList> contaminate(VectorRef y, double eps, double shift, Rng& rng) {
    if (!(eps >= 0.0 && eps < 1.0)) {
        throw DomainError("contamination fraction must lie in [0, 1)");
    }
    const Index n = y.size();
    const auto k = static_cast<Index>(std::floor(eps * static_cast<double>(n) + 0.5));
    IndexList idx(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    for (Index i = 0; i < k; ++i) {
        boost::random::uniform_int_distribution<Index> pick(i, n - 1);
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
    }
    idx.resize(static_cast<std::size_t>(k));
    std::sort(idx.begin(), idx.end());
    Vector out = y;
    for (Index i : idx) out[i] += shift;
    return {out, idx};
}

int metric_tp(const Ranking& ranking, const TrueModel& truth, Index d) {
    const auto pos = positions(ranking);
    int tp = 0;
    for (Index j : truth.active) tp += pos[static_cast<std::size_t>(j)] <= d ? 1 : 0;
    return tp;
}

int metric_ic(const Ranking& ranking, const TrueModel& truth, Index d) {
    return metric_tp(ranking, truth, d) == static_cast<int>(truth.active.size()) ? 1 : 0;
}

Index metric_mms(const Ranking& ranking, const TrueModel& truth) {
    const auto pos = positions(ranking);
    Index worst = 0;
    for (Index j : truth.active) worst = std::max(worst, pos[static_cast<std::size_t>(j)]);
    return worst;
}

ExperimentResult run_experiment(const SimConfig& cfg, unsigned threads) {
    cfg.validate();
    const auto reps = static_cast<std::size_t>(cfg.reps);
    std::vector<std::vector<RepOutcome>> outcomes(reps);
    parallel_for(reps, threads, [&](std::size_t r) { outcomes[r] = run_replication(cfg, r); });

    ExperimentResult res;
    res.config = cfg;
    for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
        MetricsSummary s;
        s.label = cfg.methods[m].label();
        int hits = 0;
        for (std::size_t r = 0; r < reps; ++r) {
            const RepOutcome& o = outcomes[r][m];
            s.ic.push_back(o.ic);
            s.tp.push_back(o.tp);
            s.mms.push_back(o.mms);
            s.runtimes.push_back(o.seconds);
            if (o.ic < 0) {
                ++s.failures;
            } else {
                hits += o.ic;
            }
        }
        const int ok = cfg.reps - s.failures;
        s.ic_pct = ok > 0 ? 100.0 * hits / ok : std::numeric_limits<double>::quiet_NaN();
        res.methods.push_back(std::move(s));
    }
    return res;
}

SimConfig parse_sim_config(const std::string& text) {
    SimConfig cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    bool have_methods = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key = lower(trim(line.substr(0, eq)));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "name") {
            cfg.name = value;
        } else if (key == "n") {
            cfg.n = parse_integer(key, value);
        } else if (key == "p") {
            cfg.p = parse_integer(key, value);
        } else if (key == "s") {
            cfg.s = parse_integer(key, value);
        } else if (key == "coef") {
            cfg.coef = parse_real(key, value);
        } else if (key == "sigma") {
            cfg.sigma = parse_real(key, value);
        } else if (key == "structure") {
            cfg.structure = parse_structure(value);
        } else if (key == "rho") {
            cfg.rho = parse_real(key, value);
        } else if (key == "contam_frac") {
            cfg.contam_frac = parse_real(key, value);
        } else if (key == "contam_shift") {
            cfg.contam_shift = parse_real(key, value);
        } else if (key == "reps") {
            cfg.reps = static_cast<int>(parse_integer(key, value));
        } else if (key == "seed") {
            cfg.seed = parse_seed(value);
        } else if (key == "d") {
            if (lower(value) == "auto") {
                cfg.d.reset();
            } else {
                cfg.d = parse_integer(key, value);
            }
        } else if (key == "isis_d") {
            if (lower(value) == "auto") {
                cfg.isis_d.reset();
            } else {
                cfg.isis_d = parse_integer(key, value);
            }
        } else if (key == "isis_max_iter") {
            cfg.isis_max_iter = static_cast<int>(parse_integer(key, value));
        } else if (key == "scatter_active") {
            cfg.scatter_active = parse_bool(key, value);
        } else if (key == "methods") {
            cfg.methods.clear();
            std::istringstream items(value);
            std::string item;
            while (std::getline(items, item, ',')) {
                if (trim(item).empty()) continue;
                try {
                    cfg.methods.push_back(MethodSpec::parse(item));
                } catch (const std::exception& e) {
                    throw ConfigError("methods: " + std::string(e.what()));
                }
            }
            have_methods = true;
        } else {
            throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key +
                              "'; valid keys: " + join_keys());
        }
    }
    if (!have_methods) {
        cfg.methods = {MethodSpec::parse("sis"), MethodSpec::parse("dpd:0.3")};
    }
    cfg.validate();
    return cfg;
}

std::string to_config_text(const SimConfig& cfg) {
    std::ostringstream os;
    os << "name = " << cfg.name << "\n"
       << "n = " << cfg.n << "\n"
       << "p = " << cfg.p << "\n"
       << "s = " << cfg.s << "\n"
       << "coef = " << fmt_exact(cfg.coef) << "\n"
       << "sigma = " << fmt_exact(cfg.sigma) << "\n"
       << "structure = " << to_string(cfg.structure) << "\n"
       << "rho = " << fmt_exact(cfg.rho) << "\n"
       << "contam_frac = " << fmt_exact(cfg.contam_frac) << "\n"
       << "contam_shift = " << fmt_exact(cfg.contam_shift) << "\n"
       << "reps = " << cfg.reps << "\n"
       << "seed = " << cfg.seed << "\n"
       << "d = " << (cfg.d ? std::to_string(*cfg.d) : "auto") << "\n"
       << "isis_d = " << (cfg.isis_d ? std::to_string(*cfg.isis_d) : "auto") << "\n"
       << "isis_max_iter = " << cfg.isis_max_iter << "\n"
       << "scatter_active = " << (cfg.scatter_active ? "true" : "false") << "\n"
       << "methods = ";
    for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
        os << (m ? ", " : "") << cfg.methods[m].key();
    }
    os << "\n";
    return os.str();
}

namespace {

const char* const kAllScreeners = "sis, reg, dpd:0.1, dpd:0.3, dpd:0.5, dpd:1, rank, gk, dcor, mcp";
const char* const kAllIsis = "isis:0, isis:0.1, isis:0.3, isis:0.5, isis:1";

std::map<std::string, std::string> build_presets() {
    std::map<std::string, std::string> out;
    const auto screen_preset = [](const std::string& name, const std::string& body, Index p, int reps) {
        return "name = " + name + "\nn = 100\np = " + std::to_string(p) + "\nreps = " + std::to_string(reps) +
               "\nseed = 20240601\nmethods = " + kAllScreeners + "\n" + body;
    };
    const auto isis_preset = [](const std::string& name, Index p, int reps) {
        return "name = " + name + "\nn = 100\np = " + std::to_string(p) + "\nreps = " + std::to_string(reps) +
               "\nseed = 20240601\nstructure = equicorr\nrho = 0.5\ncoef = 5\nsigma = 1\ncontam_frac = 0.1\n"
               "methods = " +
               kAllIsis + "\n";
    };
    const std::string t1 = "structure = independent\nsigma = 0.2\n";
    const std::string t2 = "structure = independent\nsigma = 1\ncontam_frac = 0.1\n";
    const std::string f7 = "structure = ar1\nrho = 0.5\nsigma = 1\ncontam_frac = 0.2\n";
    out["table1_desk"] = screen_preset("table1_desk", t1, 1000, 100);
    out["table2_desk"] = screen_preset("table2_desk", t2, 1000, 100);
    out["fig7_desk"] = screen_preset("fig7_desk", f7, 1000, 50);
    out["table3_desk"] = isis_preset("table3_desk", 500, 50);
    out["table1_full"] = screen_preset("table1_full", t1, 5000, 300);
    out["table2_full"] = screen_preset("table2_full", t2, 5000, 300);
    out["fig7_full"] = screen_preset("fig7_full", f7, 5000, 300);
    out["table3_full"] = isis_preset("table3_full", 5000, 100);
    out["smoke"] =
        "name = smoke\nn = 50\np = 200\nreps = 1\nseed = 7\nstructure = independent\nsigma = 1\n"
        "contam_frac = 0.1\nmethods = " +
        std::string(kAllScreeners) + ", isis:0.3\n";
    return out;
}

const std::map<std::string, std::string>& presets() {
    static const auto table = build_presets();
    return table;
}

}  // namespace

std::vector<std::string> preset_names() {
    std::vector<std::string> out;
    for (const auto& [name, text] : presets()) out.push_back(name);
    return out;
}

std::string preset_text(const std::string& name) {
    const auto it = presets().find(name);
    if (it == presets().end()) {
        std::string known;
        for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
        throw ConfigError("unknown preset '" + name + "'; available: " + known);
    }
    return it->second;
}

double median_of(const std::vector<Index>& values) {
    std::vector<double> v;
    for (Index x : values) {
        if (x >= 0) v.push_back(static_cast<double>(x));
    }
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

double median_of(const std::vector<int>& values) {
    std::vector<Index> wide(values.begin(), values.end());
    return median_of(wide);
}

namespace {

double mean_of(const std::vector<int>& values) {
    double sum = 0.0;
    int count = 0;
    for (int v : values) {
        if (v >= 0) {
            sum += v;
            ++count;
        }
    }
    return count ? sum / count : std::numeric_limits<double>::quiet_NaN();
}

double median_runtime(const std::vector<double>& values) {
    std::vector<double> v = values;
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.empty() ? 0.0 : (v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]));
}

}  // namespace

void write_summary_tsv(std::ostream& out, const ExperimentResult& result) {
    out << "method\tmetric\tvalue\n";
    for (const auto& m : result.methods) {
        out << m.label << "\tic_pct\t" << fmt17(m.ic_pct) << "\n";
        out << m.label << "\ttp_mean\t" << fmt17(mean_of(m.tp)) << "\n";
        out << m.label << "\ttp_median\t" << fmt17(median_of(m.tp)) << "\n";
        out << m.label << "\tmms_median\t" << fmt17(median_of(m.mms)) << "\n";
        out << m.label << "\tfailures\t" << m.failures << "\n";
        out << m.label << "\truntime_median_s\t" << fmt17(median_runtime(m.runtimes)) << "\n";
    }
}

void write_records_tsv(std::ostream& out, const ExperimentResult& result) {
    out << "rep\tmethod\tic\ttp\tmms\tseconds\n";
    const std::size_t reps = static_cast<std::size_t>(result.config.reps);
    for (std::size_t r = 0; r < reps; ++r) {
        for (const auto& m : result.methods) {
            out << r << "\t" << m.label << "\t";
            if (m.ic[r] < 0) {
                out << "NA\tNA\t";
            } else {
                out << m.ic[r] << "\t" << m.tp[r] << "\t";
            }
            out << (m.mms[r] < 0 ? std::string("NA") : std::to_string(m.mms[r])) << "\t" << fmt17(m.runtimes[r])
                << "\n";
        }
    }
}

void write_table(std::ostream& out, const ExperimentResult& result) {
    const SimConfig& c = result.config;
    out << c.name << ": n=" << c.n << " p=" << c.p << " " << to_string(c.structure);
    if (c.structure != Structure::independent) out << "(" << fmt4(c.rho) << ")";
    out << " sigma=" << fmt4(c.sigma) << " coef=" << fmt4(c.coef) << " eps=" << fmt4(c.contam_frac)
        << " reps=" << c.reps << " d=" << c.model_size() << "\n";
    std::size_t width = 6;
    for (const auto& m : result.methods) width = std::max(width, m.label.size());
    const auto pad = [&](const std::string& s) { return s + std::string(width + 2 - s.size(), ' '); };
    out << pad("method") << "IC%       TP(med)   MMS(med)  failures\n";
    const auto col = [](const std::string& s) { return s + std::string(s.size() < 10 ? 10 - s.size() : 1, ' '); };
    for (const auto& m : result.methods) {
        const double mms = median_of(m.mms);
        out << pad(m.label) << col(fmt4(m.ic_pct)) << col(fmt4(median_of(m.tp)))
            << col(std::isnan(mms) ? std::string("-") : fmt4(mms)) << m.failures << "\n";
    }
}

}  // namespace dpdsis
