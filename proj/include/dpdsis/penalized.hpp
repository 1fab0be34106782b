#pragma once

// L1-penalized DPD regression on a reduced covariate set. At a given sigma the
// slopes minimize
//   mean_i l_alpha(y_i - b0 - x_i' beta; sigma) + lambda_sigma * sum_j |beta_j|,
//   lambda_sigma = lambda (2 pi)^{-alpha/2} sigma^{-(1 + alpha)},
// and sigma minimizes the unpenalized mean loss at the fitted residuals. The
// scaling keeps lambda in standardized-residual units, so its meaning does not
// depend on the units of y; at alpha = 0 this is the scaled lasso.

#include "dpdsis/mdpde.hpp"
#include "dpdsis/types.hpp"

#include <optional>
#include <vector>

namespace dpdsis {

struct PenalizedFit {
    double intercept = 0.0;
    Vector coefficients;  // one per supplied column; thresholded entries are exactly 0
    double sigma = 1.0;
    double lambda = 0.0;
    double alpha = 0.0;
    double objective = 0.0;  // penalized objective at the stored parameters
    bool converged = false;
    int n_iter = 0;  // proximal-gradient steps taken by the reported start
};

struct PenalizedControl {
    /// Hold sigma at this value instead of profiling it.
    std::optional<double> fixed_sigma;
    /// Start only from this fit (its coefficient vector must match X's columns).
    std::optional<PenalizedFit> warm_start;
    /// Stationarity tolerance on the KKT residual.
    double kkt_tol = 1e-7;
};

/// Proximal gradient on (b0, beta) with soft-thresholding and backtracking,
/// alternating with a 1-D minimization over log sigma until both conditions
/// hold. The DPD loss is not convex, so the solver returns the solution
/// reached from a single robust pilot: least squares (ridge-stabilized when
/// k + 1 >= n) reweighted by the DPD weights of its residuals. A warm start
/// replaces the pilot. Throws DataError on
/// non-finite input, DomainError for alpha < 0 or lambda < 0, ArgumentError
/// for k == 0 or n < 3.
PenalizedFit fit_penalized_dpd(VectorRef y, MatrixRef x, double alpha, double lambda, const FitOptions& opts = {},
                               const PenalizedControl& control = {});

/// Intercept-and-scale MDPDE (no covariates); coefficients is empty.
PenalizedFit fit_location_scale(VectorRef y, double alpha, const FitOptions& opts = {});

/// lambda (2 pi)^{-alpha/2} sigma^{-(1 + alpha)}, the slope penalty at scale sigma.
double effective_lambda(double lambda, double alpha, double sigma);

/// Mean loss plus effective_lambda(lambda, alpha, sigma) * |coefficients|_1.
double penalized_objective(VectorRef y, MatrixRef x, double alpha, double lambda, double intercept,
                           VectorRef coefficients, double sigma);

/// Gradient of the unpenalized mean loss: entry 0 is the intercept, entries
/// 1..k the slopes, entry k + 1 the log sigma derivative.
Vector penalized_loss_gradient(VectorRef y, MatrixRef x, double alpha, double intercept, VectorRef coefficients,
                               double sigma);

/// Largest violation of the fixed-point conditions of `fit`: the slope KKT
/// conditions at effective_lambda(fit.sigma), the intercept, and the log sigma
/// derivative of the mean loss unless sigma was held fixed.
double kkt_residual(VectorRef y, MatrixRef x, const PenalizedFit& fit, bool sigma_free = true);

/// Smallest lambda giving all-zero slopes: max_j |d loss / d beta_j| at the
/// location-scale fit, divided by effective_lambda(1, alpha, sigma) there.
double lambda_max(VectorRef y, MatrixRef x, double alpha, const FitOptions& opts = {});

/// Fits along `lambdas` in the given order, each warm-started from the previous.
std::vector<PenalizedFit> fit_penalized_path(VectorRef y, MatrixRef x, double alpha, const std::vector<double>& lambdas,
                                             const FitOptions& opts = {});

/// sqrt(log(p) / n). Throws ArgumentError unless n >= 2 and p >= 2.
double default_lambda(double n, double p);

/// Positions of the nonzero coefficients (exact test).
IndexList support(const PenalizedFit& fit);

}  // namespace dpdsis
