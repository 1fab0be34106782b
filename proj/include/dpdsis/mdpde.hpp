#pragma once

// Minimum density power divergence estimation for the three-parameter
// marginal model y = gamma + beta * x + e, e ~ N(0, sigma^2).

#include "dpdsis/types.hpp"

#include <array>
#include <optional>
#include <string_view>

namespace dpdsis {

struct MarginalParams {
    double gamma = 0.0;
    double beta = 0.0;
    double sigma = 1.0;
};

enum class StartKind { ols, robust, warm };

std::string_view to_string(StartKind kind);

struct FitOptions {
    double grad_tol = 1e-8;
    int max_iter = 500;
    /// Lower bound for sigma; 0 means 1e-8 * MAD(y), or 1e-8 when MAD(y) is 0.
    double sigma_floor = 0.0;
    bool multi_start = true;
};

struct MarginalFit {
    MarginalParams params;
    double alpha = 0.0;
    double objective = 0.0;  // mean loss at params
    bool converged = false;
    int n_iter = 0;
    StartKind start_used = StartKind::ols;
};

/// DPD loss of one observation with linear predictor eta. alpha == 0 gives
/// the negative normal log density. Throws DomainError for sigma <= 0 or
/// alpha < 0.
double dpd_loss(double y, double eta, double sigma, double alpha);

/// Mean of dpd_loss over the sample with eta_i = gamma + beta * x_i.
double dpd_objective(VectorRef y, VectorRef x, const MarginalParams& params, double alpha);

/// Partial derivatives of dpd_objective with respect to (gamma, beta, log sigma).
std::array<double, 3> dpd_gradient(VectorRef y, VectorRef x, const MarginalParams& params, double alpha);

/// Weighted variants; weights are normalized to sum to one.
double dpd_objective_weighted(VectorRef y, VectorRef x, VectorRef weights, const MarginalParams& params,
                              double alpha);
std::array<double, 3> dpd_gradient_weighted(VectorRef y, VectorRef x, VectorRef weights,
                                            const MarginalParams& params, double alpha);

/// Simple least squares with sigma^2 = mean squared residual, floored at
/// `sigma_floor` (the FitOptions default rule when 0).
MarginalParams ols_closed_form(VectorRef y, VectorRef x, double sigma_floor = 0.0);

/// The sigma floor actually used for response y under `opts`.
double resolve_sigma_floor(VectorRef y, const FitOptions& opts);

/// Marginal MDPDE. Runs a bounded BFGS over (gamma, beta, log sigma) from the
/// OLS start and, with multi_start, from a robust start (median intercept,
/// zero slope, normalized MAD scale), keeping the lower objective.
/// Throws DegenerateCovariateError for constant x and DataError for
/// non-finite input. Non-convergence is reported through `converged`.
MarginalFit fit_marginal(VectorRef y, VectorRef x, double alpha, const FitOptions& opts = {});

/// Weighted MDPDE (weights >= 0, normalized internally). An optional warm
/// start is tried in addition to the usual starts.
MarginalFit fit_marginal_weighted(VectorRef y, VectorRef x, VectorRef weights, double alpha,
                                  const FitOptions& opts = {},
                                  std::optional<MarginalParams> warm_start = std::nullopt);

}  // namespace dpdsis
