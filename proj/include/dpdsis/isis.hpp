#pragma once

// Screening followed by a penalized refit, and its iterative version that
// re-screens the residual response against the covariates not yet active.

#include "dpdsis/mdpde.hpp"
#include "dpdsis/penalized.hpp"
#include "dpdsis/screeners.hpp"
#include "dpdsis/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dpdsis {

/// One-pass DPD-SIS: top-d screening, then optionally a penalized refit on
/// the selected columns whose support becomes the model.
struct SisResult {
    Ranking ranking;
    ModelSet screened;
    std::optional<PenalizedFit> refit;  // coefficients follow `screened.indices`
    ModelSet final_model;               // support of the refit, or `screened` without one
};

/// `lambda` defaults to default_lambda(n, p); the optional refit is
/// fit_penalized_dpd on the screened columns.
SisResult run_dpd_sis(VectorRef y, MatrixRef x, double alpha, Index d, bool refit,
                      std::optional<double> lambda = std::nullopt, const FitOptions& opts = {},
                      unsigned threads = 1);

enum class DPrimeSchedule { van, fixed };
enum class StopReason { size_reached, active_set_unchanged, max_iter };

std::string to_string(StopReason reason);

struct IsisConfig {
    double alpha = 0.3;
    Index d = 1;
    /// van: floor(2d/3) candidates first, then d - |A_i|; fixed: `fixed_k` every time.
    DPrimeSchedule schedule = DPrimeSchedule::van;
    Index fixed_k = 0;
    int max_iter = 10;
    /// Used for the refits inside the loop and for the final fit; defaults to default_lambda(n, p).
    std::optional<double> lambda;
    unsigned threads = 1;
};

struct IsisIteration {
    Index d_prime = 0;
    IndexList candidates;  // screened this iteration, rank order
    IndexList pool;        // union of all candidates so far, in order of first selection
    IndexList active;      // nonzero support of the refit, ascending
    PenalizedFit refit;    // coefficients follow `pool`
};

struct IsisResult {
    ModelSet final_model;      // ascending indices; equals the support of final_fit
    PenalizedFit final_fit;    // coefficients follow final_model.indices
    std::vector<IsisIteration> iterations;
    StopReason stop_reason = StopReason::max_iter;
    bool trimmed = false;
};

/// X should be standardized. Throws ArgumentError for an invalid config.
IsisResult run_dpd_isis(VectorRef y, MatrixRef x, const IsisConfig& cfg, const FitOptions& opts = {});

/// y - intercept - Xsub * coefficients. Throws DimensionError on mismatch.
Vector compute_residuals(VectorRef y, MatrixRef x_sub, const PenalizedFit& fit);

/// Keeps the d members of `active` with the highest scores in `ranking_last`
/// (ties by ascending index); returns `active` unchanged when |active| <= d.
ModelSet trim_to_size(const ModelSet& active, const Ranking& ranking_last, Index d);

/// floor(n / log n), the default model size for the iterative method (13 at n = 54).
Index default_isis_d(Index n);

}  // namespace dpdsis
