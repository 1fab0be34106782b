#pragma once

// Influence function, gross-error sensitivity and efficiency of the slope of
// the marginal MDPDE under the normal model y = gamma0 + beta0 x + sigma0 z.

#include "dpdsis/mdpde.hpp"
#include "dpdsis/types.hpp"

#include <limits>
#include <vector>

namespace dpdsis {

struct ModelTruth {
    double gamma0 = 0.0;
    double beta0 = 1.0;
    double sigma0 = 1.0;
    double ex = 0.0;  // E(X)
    double vx = 1.0;  // Var(X)

    /// Throws DomainError unless sigma0 > 0 and vx > 0 (all finite).
    void validate() const;
};

struct SensitivityCurve {
    std::vector<double> alphas;  // strictly increasing
    std::vector<double> values;
};

/// Marker returned by gross_error_sensitivity when the IF is unbounded (alpha = 0).
inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

/// (1 + alpha)^{3/2} (x_t - E X) / Var X * u * exp(-alpha u^2 / (2 sigma0^2)),
/// u = y_t - gamma0 - beta0 x_t. Throws DomainError for alpha < 0.
double influence_function(double y_t, double x_t, const ModelTruth& truth, double alpha);

/// (beta(contaminated) - beta(clean)) / eps, where the contaminated fit gives
/// the sample mass 1 - eps and the point (x_t, y_t) mass eps. Throws
/// DomainError unless eps is in (0, 0.1], DiagnosticError if a fit fails.
double empirical_if(VectorRef y, VectorRef x, double alpha, double y_t, double x_t, double eps,
                    const FitOptions& opts = {});

/// Slope asymptotic variance J^{-1} K J^{-1} under the true model, by
/// Gauss-Kronrod quadrature over the standardized residual.
/// Throws DiagnosticError when the quadrature error is not small.
double asymptotic_variance(const ModelTruth& truth, double alpha);

/// max over y_t of |IF| / sqrt(asymptotic_variance) at x_t = E X + sqrt(delta Var X).
/// Scans y_t over the line value +-max(10, 3 / sqrt(alpha)) sigma0 at 1e-3 sigma0
/// spacing, then refines with Brent. Returns kUnbounded at alpha = 0. Throws DomainError for
/// alpha < 0 or delta < 0.
double gross_error_sensitivity(const ModelTruth& truth, double alpha, double delta);

/// asymptotic_variance(0) / asymptotic_variance(alpha) over `alphas`.
/// Throws ArgumentError unless alphas is nonempty and strictly increasing.
SensitivityCurve are_curve(const ModelTruth& truth, const std::vector<double>& alphas);

/// gross_error_sensitivity over `alphas` at fixed delta.
SensitivityCurve ges_curve(const ModelTruth& truth, const std::vector<double>& alphas, double delta);

}  // namespace dpdsis
