#include "dpdsis/screeners.hpp"

#include "dpdsis/errors.hpp"
#include "dpdsis/parallel.hpp"
#include "dpdsis/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace dpdsis {

namespace {

void check_screen_input(VectorRef y, MatrixRef x) {
    if (x.rows() != y.size()) {
        throw DimensionError("covariate matrix has " + std::to_string(x.rows()) + " rows but response has " +
                             std::to_string(y.size()) + " entries");
    }
    if (!y.allFinite() || !x.allFinite()) {
        throw DataError("non-finite value in screening input");
    }
}

template <class ScoreFn>
Vector score_columns(MatrixRef x, unsigned threads, ScoreFn&& score) {
    Vector scores(x.cols());
    parallel_for(static_cast<std::size_t>(x.cols()), threads, [&](std::size_t j) {
        const auto col = static_cast<Index>(j);
        scores[col] = stats::is_constant(x.col(col)) ? 0.0 : score(col);
    });
    return scores;
}

// Average ranks (1-based), ties share the mean rank.
Vector average_ranks(VectorRef v) {
    const Index n = v.size();
    IndexList idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) { return v[a] < v[b]; });
    Vector ranks(n);
    Index i = 0;
    while (i < n) {
        Index j = i;
        while (j + 1 < n && v[idx[static_cast<std::size_t>(j + 1)]] == v[idx[static_cast<std::size_t>(i)]]) {
            ++j;
        }
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (Index k = i; k <= j; ++k) {
            ranks[idx[static_cast<std::size_t>(k)]] = r;
        }
        i = j + 1;
    }
    return ranks;
}

std::int64_t tie_pairs_sorted(const std::vector<double>& sorted) {
    std::int64_t pairs = 0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) {
            ++j;
        }
        const auto t = static_cast<std::int64_t>(j - i + 1);
        pairs += t * (t - 1) / 2;
        i = j + 1;
    }
    return pairs;
}

// Sorts v ascending and returns the number of strict inversions.
std::int64_t merge_count(std::vector<double>& v, std::vector<double>& buf, std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) {
        return 0;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    std::int64_t swaps = merge_count(v, buf, lo, mid) + merge_count(v, buf, mid, hi);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        if (v[j] < v[i]) {
            swaps += static_cast<std::int64_t>(mid - i);
            buf[k++] = v[j++];
        } else {
            buf[k++] = v[i++];
        }
    }
    while (i < mid) buf[k++] = v[i++];
    while (j < hi) buf[k++] = v[j++];
    std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
              v.begin() + static_cast<std::ptrdiff_t>(lo));
    return swaps;
}

// Double-centered distance matrix of v.
Matrix centered_distances(VectorRef v) {
    const Index n = v.size();
    Matrix a(n, n);
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < n; ++i) {
            a(i, j) = std::abs(v[i] - v[j]);
        }
    }
    const Vector row_mean = a.rowwise().mean();
    const double grand = row_mean.mean();
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < n; ++i) {
            a(i, j) += grand - row_mean[i] - row_mean[j];
        }
    }
    return a;
}

double distance_correlation_from(const Matrix& a, double a_var, VectorRef b_values) {
    const Matrix b = centered_distances(b_values);
    const double b_var = b.squaredNorm();
    if (!(a_var > 0.0) || !(b_var > 0.0)) {
        return 0.0;
    }
    const double cov = std::max(0.0, a.cwiseProduct(b).sum());
    return std::min(1.0, std::sqrt(cov / std::sqrt(a_var * b_var)));
}

// (v - median) / (1.4826 MAD); empty when the scale is zero.
bool robust_standardize(VectorRef v, Vector& out) {
    const double scale = stats::robust_scale(v);
    if (!(scale > 0.0)) {
        return false;
    }
    out = (v.array() - stats::median(v)) / scale;
    return true;
}

}  // namespace

StandardizeMode parse_standardize_mode(const std::string& text) {
    if (text == "classical") return StandardizeMode::classical;
    if (text == "robust") return StandardizeMode::robust;
    if (text == "none") return StandardizeMode::none;
    throw ArgumentError("unknown standardization '" + text + "' (expected classical, robust, or none)");
}

std::string to_string(StandardizeMode mode) {
    switch (mode) {
        case StandardizeMode::classical:
            return "classical";
        case StandardizeMode::robust:
            return "robust";
        case StandardizeMode::none:
            return "none";
    }
    return "?";
}

Standardized standardize_columns(MatrixRef x, StandardizeMode mode) {
    Standardized out{Matrix(x), std::vector<bool>(static_cast<std::size_t>(x.cols()), false)};
    if (mode == StandardizeMode::none) {
        return out;
    }
    for (Index j = 0; j < x.cols(); ++j) {
        const auto col = x.col(j);
        double center = 0.0;
        double scale = 0.0;
        if (mode == StandardizeMode::classical) {
            center = col.mean();
            scale = stats::sample_sd(col);
        } else {
            center = stats::median(col);
            scale = stats::robust_scale(col);
        }
        if (!(scale > 0.0) || !std::isfinite(scale)) {
            out.degenerate[static_cast<std::size_t>(j)] = true;
            continue;
        }
        out.values.col(j) = (col.array() - center) / scale;
    }
    return out;
}

std::string ScreenerSpec::label() const {
    switch (method) {
        case Method::dpd: {
            std::ostringstream os;
            os << "DPD-SIS(" << alpha << ")";
            return os.str();
        }
        case Method::pearson:
            return "SIS";
        case Method::reg:
            return "Reg-SIS";
        case Method::rank:
            return rank_kind == RankCorrelation::kendall ? "Rank-SIS" : "Rank-SIS(spearman)";
        case Method::gk:
            return "GK-SIS";
        case Method::dcor:
            return "dCor-SIS";
        case Method::mcp:
            return "MCP-SIS";
    }
    return "?";
}

ScreenerSpec ScreenerSpec::parse(const std::string& text) {
    std::string name = text;
    std::string arg;
    if (const auto colon = text.find(':'); colon != std::string::npos) {
        name = text.substr(0, colon);
        arg = text.substr(colon + 1);
    }
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
    ScreenerSpec spec;
    if (name == "dpd") {
        spec.method = Method::dpd;
        if (!arg.empty()) {
            try {
                std::size_t used = 0;
                spec.alpha = std::stod(arg, &used);
                if (used != arg.size()) throw std::invalid_argument(arg);
            } catch (const std::exception&) {
                throw ArgumentError("bad alpha in screener '" + text + "'");
            }
            if (!(spec.alpha >= 0.0)) {
                throw ArgumentError("alpha must be nonnegative in screener '" + text + "'");
            }
        }
        return spec;
    }
    if (!arg.empty() && name != "rank") {
        throw ArgumentError("screener '" + name + "' takes no argument");
    }
    if (name == "pearson" || name == "sis") {
        spec.method = Method::pearson;
    } else if (name == "reg") {
        spec.method = Method::reg;
        spec.alpha = 0.0;
    } else if (name == "rank") {
        spec.method = Method::rank;
        if (arg == "spearman") {
            spec.rank_kind = RankCorrelation::spearman;
        } else if (!arg.empty() && arg != "kendall") {
            throw ArgumentError("rank screener takes kendall or spearman, got '" + arg + "'");
        }
    } else if (name == "gk") {
        spec.method = Method::gk;
    } else if (name == "dcor") {
        spec.method = Method::dcor;
    } else if (name == "mcp") {
        spec.method = Method::mcp;
    } else {
        throw ArgumentError("unknown screener '" + text + "' (expected dpd[:alpha], pearson, reg, rank, gk, dcor, mcp)");
    }
    return spec;
}

StandardizeMode ScreenerSpec::default_standardization() const {
    return (method == Method::gk || method == Method::mcp) ? StandardizeMode::robust : StandardizeMode::classical;
}

Ranking make_ranking(Vector scores, const ScreenerSpec& method) {
    for (Index j = 0; j < scores.size(); ++j) {
        if (std::isnan(scores[j])) {
            scores[j] = 0.0;
        }
    }
    IndexList order(static_cast<std::size_t>(scores.size()));
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
        if (scores[a] != scores[b]) {
            return scores[a] > scores[b];
        }
        return a < b;
    });
    return Ranking{std::move(scores), std::move(order), method};
}

Ranking dpd_sis_scores(VectorRef y, MatrixRef x, double alpha, const FitOptions& opts, unsigned threads) {
    check_screen_input(y, x);
    Vector scores = score_columns(x, threads, [&](Index j) {
        try {
            return std::abs(fit_marginal(y, x.col(j), alpha, opts).params.beta);
        } catch (const DegenerateCovariateError&) {
            return 0.0;
        }
    });
    ScreenerSpec spec;
    spec.method = Method::dpd;
    spec.alpha = alpha;
    return make_ranking(std::move(scores), spec);
}

Ranking reg_sis_scores(VectorRef y, MatrixRef x, const FitOptions& opts, unsigned threads) {
    Ranking r = dpd_sis_scores(y, x, 0.0, opts, threads);
    r.method.method = Method::reg;
    return r;
}

Ranking pearson_scores(VectorRef y, MatrixRef x, unsigned threads) {
    check_screen_input(y, x);
    Vector scores =
        score_columns(x, threads, [&](Index j) { return std::min(1.0, std::abs(pearson_correlation(y, x.col(j)))); });
    return make_ranking(std::move(scores), ScreenerSpec{Method::pearson, 0.0});
}

Ranking rank_scores(VectorRef y, MatrixRef x, RankCorrelation kind, unsigned threads) {
    check_screen_input(y, x);
    Vector scores = score_columns(x, threads, [&](Index j) {
        const double r = kind == RankCorrelation::kendall ? kendall_tau_b(y, x.col(j)) : spearman_rho(y, x.col(j));
        return std::min(1.0, std::abs(r));
    });
    ScreenerSpec spec{Method::rank, 0.0, kind};
    return make_ranking(std::move(scores), spec);
}

Ranking gk_scores(VectorRef y, MatrixRef x, unsigned threads) {
    check_screen_input(y, x);
    Vector scores = score_columns(x, threads, [&](Index j) { return std::abs(gk_correlation(y, x.col(j))); });
    return make_ranking(std::move(scores), ScreenerSpec{Method::gk, 0.0});
}

Ranking dcor_scores(VectorRef y, MatrixRef x, unsigned threads) {
    check_screen_input(y, x);
    const Matrix a = centered_distances(y);
    const double a_var = a.squaredNorm();
    Vector scores = score_columns(x, threads, [&](Index j) { return distance_correlation_from(a, a_var, x.col(j)); });
    return make_ranking(std::move(scores), ScreenerSpec{Method::dcor, 0.0});
}

Ranking mcp_scores(VectorRef y, MatrixRef x, unsigned threads) {
    check_screen_input(y, x);
    Vector y_std;
    const bool y_ok = robust_standardize(y, y_std);
    Vector scores = score_columns(x, threads, [&](Index j) {
        if (!y_ok) {
            return 0.0;
        }
        Vector x_std;
        if (!robust_standardize(x.col(j), x_std)) {
            return 0.0;
        }
        const Vector prod = y_std.cwiseProduct(x_std);
        return std::abs(stats::median(prod));
    });
    return make_ranking(std::move(scores), ScreenerSpec{Method::mcp, 0.0});
}

Ranking screen(const ScreenerSpec& spec, VectorRef y, MatrixRef x, const FitOptions& opts, unsigned threads) {
    switch (spec.method) {
        case Method::dpd: {
            Ranking r = dpd_sis_scores(y, x, spec.alpha, opts, threads);
            r.method = spec;
            return r;
        }
        case Method::reg:
            return reg_sis_scores(y, x, opts, threads);
        case Method::pearson:
            return pearson_scores(y, x, threads);
        case Method::rank:
            return rank_scores(y, x, spec.rank_kind, threads);
        case Method::gk:
            return gk_scores(y, x, threads);
        case Method::dcor:
            return dcor_scores(y, x, threads);
        case Method::mcp:
            return mcp_scores(y, x, threads);
    }
    throw ArgumentError("unknown screener");
}

ModelSet select_top(const Ranking& ranking, Index d) {
    if (d < 1) {
        throw ArgumentError("model size d must be at least 1");
    }
    const auto keep = static_cast<std::size_t>(std::min<Index>(d, static_cast<Index>(ranking.order.size())));
    return ModelSet{IndexList(ranking.order.begin(), ranking.order.begin() + static_cast<std::ptrdiff_t>(keep)), d};
}

double pearson_correlation(VectorRef a, VectorRef b) {
    if (a.size() != b.size()) {
        throw DimensionError("correlation inputs differ in length");
    }
    const auto ac = (a.array() - a.mean());
    const auto bc = (b.array() - b.mean());
    const double saa = ac.square().sum();
    const double sbb = bc.square().sum();
    if (!(saa > 0.0) || !(sbb > 0.0)) {
        return 0.0;
    }
    return (ac * bc).sum() / std::sqrt(saa * sbb);
}

double kendall_tau_b(VectorRef a, VectorRef b) {
    if (a.size() != b.size()) {
        throw DimensionError("correlation inputs differ in length");
    }
    const auto n = static_cast<std::size_t>(a.size());
    if (n < 2) {
        return 0.0;
    }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
        const auto ii = static_cast<Index>(i), jj = static_cast<Index>(j);
        return a[ii] != a[jj] ? a[ii] < a[jj] : b[ii] < b[jj];
    });

    std::int64_t ties_a = 0;
    std::int64_t ties_joint = 0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        const auto first = static_cast<Index>(idx[i]);
        while (j + 1 < n && a[static_cast<Index>(idx[j + 1])] == a[first]) {
            ++j;
        }
        const auto t = static_cast<std::int64_t>(j - i + 1);
        ties_a += t * (t - 1) / 2;
        // Within an a-group the b values are sorted; count equal runs.
        std::size_t k = i;
        while (k <= j) {
            std::size_t m = k;
            while (m + 1 <= j && b[static_cast<Index>(idx[m + 1])] == b[static_cast<Index>(idx[k])]) {
                ++m;
            }
            const auto u = static_cast<std::int64_t>(m - k + 1);
            ties_joint += u * (u - 1) / 2;
            k = m + 1;
        }
        i = j + 1;
    }

    std::vector<double> seq(n);
    for (std::size_t k = 0; k < n; ++k) {
        seq[k] = b[static_cast<Index>(idx[k])];
    }
    std::vector<double> buf(n);
    const std::int64_t swaps = merge_count(seq, buf, 0, n);
    const std::int64_t ties_b = tie_pairs_sorted(seq);

    const auto total = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
    const double denom_a = static_cast<double>(total - ties_a);
    const double denom_b = static_cast<double>(total - ties_b);
    if (!(denom_a > 0.0) || !(denom_b > 0.0)) {
        return 0.0;
    }
    const double numer = static_cast<double>(total - ties_a - ties_b + ties_joint - 2 * swaps);
    return numer / std::sqrt(denom_a * denom_b);
}

double spearman_rho(VectorRef a, VectorRef b) {
    if (a.size() != b.size()) {
        throw DimensionError("correlation inputs differ in length");
    }
    return pearson_correlation(average_ranks(a), average_ranks(b));
}

double gk_correlation(VectorRef a, VectorRef b) {
    if (a.size() != b.size()) {
        throw DimensionError("correlation inputs differ in length");
    }
    const double sa = stats::robust_scale(a);
    const double sb = stats::robust_scale(b);
    if (!(sa > 0.0) || !(sb > 0.0)) {
        return 0.0;
    }
    const Vector u = a / sa;
    const Vector v = b / sb;
    const double plus = std::pow(stats::robust_scale(u + v), 2);
    const double minus = std::pow(stats::robust_scale(u - v), 2);
    if (!(plus + minus > 0.0)) {
        return 0.0;
    }
    return std::clamp((plus - minus) / (plus + minus), -1.0, 1.0);
}

double distance_correlation(VectorRef a, VectorRef b) {
    if (a.size() != b.size()) {
        throw DimensionError("correlation inputs differ in length");
    }
    const Matrix ca = centered_distances(a);
    return distance_correlation_from(ca, ca.squaredNorm(), b);
}

double median_componentwise_product(VectorRef a, VectorRef b) {
    if (a.size() != b.size()) {
        throw DimensionError("inputs differ in length");
    }
    Vector as, bs;
    if (!robust_standardize(a, as) || !robust_standardize(b, bs)) {
        return 0.0;
    }
    const Vector prod = as.cwiseProduct(bs);
    return stats::median(prod);
}

}  // namespace dpdsis
