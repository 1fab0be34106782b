#pragma once

// Marginal screening scores: DPD-SIS and the six reference screeners.

#include "dpdsis/mdpde.hpp"
#include "dpdsis/types.hpp"

#include <string>
#include <vector>

namespace dpdsis {

enum class StandardizeMode { classical, robust, none };

StandardizeMode parse_standardize_mode(const std::string& text);
std::string to_string(StandardizeMode mode);

struct Standardized {
    Matrix values;
    /// Columns with zero spread under the chosen scale; passed through unchanged.
    std::vector<bool> degenerate;
};

/// classical: mean 0 / sd 1 (denominator n - 1); robust: median 0 /
/// 1.4826 * MAD 1; none: identity.
Standardized standardize_columns(MatrixRef x, StandardizeMode mode);

enum class Method { dpd, pearson, reg, rank, gk, dcor, mcp };

enum class RankCorrelation { kendall, spearman };

/// A screener together with its tuning (alpha for dpd).
struct ScreenerSpec {
    Method method = Method::dpd;
    double alpha = 0.3;
    RankCorrelation rank_kind = RankCorrelation::kendall;

    /// "SIS", "Reg-SIS", "DPD-SIS(0.3)", "Rank-SIS", ...
    std::string label() const;
    /// Accepts "dpd:0.3", "dpd", "pearson"/"sis", "reg", "rank", "rank:spearman",
    /// "gk", "dcor", "mcp".
    static ScreenerSpec parse(const std::string& text);
    /// Standardization each method expects from its caller.
    StandardizeMode default_standardization() const;
};

struct Ranking {
    Vector scores;     // one nonnegative score per covariate
    IndexList order;   // covariates by descending score, ties by ascending index
    ScreenerSpec method;
};

struct ModelSet {
    IndexList indices;  // 0-based covariate indices in rank order
    Index d = 0;
};

/// Sorts scores into a Ranking; NaN scores are treated as 0.
Ranking make_ranking(Vector scores, const ScreenerSpec& method);

/// |beta| of the marginal MDPDE for each column. X should already be
/// standardized. Constant columns score 0.
Ranking dpd_sis_scores(VectorRef y, MatrixRef x, double alpha, const FitOptions& opts = {}, unsigned threads = 1);
Ranking reg_sis_scores(VectorRef y, MatrixRef x, const FitOptions& opts = {}, unsigned threads = 1);
Ranking pearson_scores(VectorRef y, MatrixRef x, unsigned threads = 1);
Ranking rank_scores(VectorRef y, MatrixRef x, RankCorrelation kind = RankCorrelation::kendall, unsigned threads = 1);
Ranking gk_scores(VectorRef y, MatrixRef x, unsigned threads = 1);
Ranking dcor_scores(VectorRef y, MatrixRef x, unsigned threads = 1);
Ranking mcp_scores(VectorRef y, MatrixRef x, unsigned threads = 1);

/// Dispatches on spec.method. X is used as given (no standardization here).
Ranking screen(const ScreenerSpec& spec, VectorRef y, MatrixRef x, const FitOptions& opts = {}, unsigned threads = 1);

/// First min(d, p) covariates of the ranking. Throws ArgumentError for d < 1.
ModelSet select_top(const Ranking& ranking, Index d);

// Pairwise association measures. Each returns 0 when either input has no spread.
double pearson_correlation(VectorRef a, VectorRef b);
/// Kendall tau-b via Knight's O(n log n) merge-sort algorithm.
double kendall_tau_b(VectorRef a, VectorRef b);
double spearman_rho(VectorRef a, VectorRef b);
/// Gnanadesikan-Kettenring correlation with scale 1.4826 * MAD, clipped to [-1, 1].
double gk_correlation(VectorRef a, VectorRef b);
/// Sample distance correlation (V-statistic, double-centered distance matrices).
double distance_correlation(VectorRef a, VectorRef b);
/// median(a~ * b~) after robust standardization of both inputs.
double median_componentwise_product(VectorRef a, VectorRef b);

}  // namespace dpdsis
