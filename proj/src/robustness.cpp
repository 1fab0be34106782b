#include "dpdsis/robustness.hpp"

#include "dpdsis/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace dpdsis {

namespace {

void check_alpha(double alpha) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
        throw DomainError("alpha must be a finite nonnegative number");
    }
}

// E[f(Z)] for Z standard normal.
double normal_expectation(const auto& f, const char* what) {
    using boost::math::quadrature::gauss_kronrod;
    const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    const auto integrand = [&](double z) { return f(z) * inv_sqrt_2pi * std::exp(-0.5 * z * z); };
    double error = 0.0;
    double l1 = 0.0;
    const double inf = std::numeric_limits<double>::infinity();
    const double value = gauss_kronrod<double, 61>::integrate(integrand, -inf, inf, 15, 1e-13, &error, &l1);
    if (!std::isfinite(value) || error > 1e-9 * std::max(1.0, l1)) {
        throw DiagnosticError(std::string("quadrature for ") + what + " did not converge (error estimate " +
                              std::to_string(error) + ")");
    }
    return value;
}

void check_curve_grid(const std::vector<double>& alphas) {
    if (alphas.empty()) {
        throw ArgumentError("alpha grid is empty");
    }
    for (std::size_t i = 1; i < alphas.size(); ++i) {
        if (!(alphas[i] > alphas[i - 1])) {
            throw ArgumentError("alpha grid must be strictly increasing");
        }
    }
}

}  // namespace

void ModelTruth::validate() const {
    if (!std::isfinite(gamma0) || !std::isfinite(beta0) || !std::isfinite(ex)) {
        throw DomainError("true parameters must be finite");
    }
    if (!(sigma0 > 0.0) || !std::isfinite(sigma0)) {
        throw DomainError("sigma0 must be positive");
    }
    if (!(vx > 0.0) || !std::isfinite(vx)) {
        throw DomainError("Var(X) must be positive");
    }
}

double influence_function(double y_t, double x_t, const ModelTruth& truth, double alpha) {
    check_alpha(alpha);
    truth.validate();
    const double u = y_t - truth.gamma0 - truth.beta0 * x_t;
    const double damp = alpha == 0.0 ? 1.0 : std::exp(-alpha * u * u / (2.0 * truth.sigma0 * truth.sigma0));
    return std::pow(1.0 + alpha, 1.5) * (x_t - truth.ex) / truth.vx * u * damp;
}

double empirical_if(VectorRef y, VectorRef x, double alpha, double y_t, double x_t, double eps,
                    const FitOptions& opts) {
    check_alpha(alpha);
    if (!(eps > 0.0 && eps <= 0.1)) {
        throw DomainError("eps must lie in (0, 0.1]");
    }
    if (y.size() != x.size()) {
        throw DimensionError("y and x lengths differ");
    }
    const Index n = y.size();
    Vector ya(n + 1);
    Vector xa(n + 1);
    ya << y, y_t;
    xa << x, x_t;
    Vector w = Vector::Constant(n + 1, 1.0 / static_cast<double>(n));
    w[n] = 0.0;
    const MarginalFit clean = fit_marginal_weighted(ya, xa, w, alpha, opts);
    if (!clean.converged) {
        throw DiagnosticError("clean fit did not converge");
    }
    w.head(n).setConstant((1.0 - eps) / static_cast<double>(n));
    w[n] = eps;
    const MarginalFit cont = fit_marginal_weighted(ya, xa, w, alpha, opts, clean.params);
    if (!cont.converged) {
        throw DiagnosticError("contaminated fit did not converge");
    }
    return (cont.params.beta - clean.params.beta) / eps;
}

double asymptotic_variance(const ModelTruth& truth, double alpha) {
    check_alpha(alpha);
    truth.validate();
    // In the standardized residual z the slope score is proportional to
    // (x - E X) z exp(-alpha z^2 / 2). Its cross terms with the scale score
    // vanish by symmetry and the intercept block removes E X, so the slope
    // entry of J^{-1} K J^{-1} reduces to sigma0^2 K_z / (J_z^2 Var X).
    const double jz = normal_expectation(
        [alpha](double z) { return std::exp(-0.5 * alpha * z * z) * (1.0 - alpha * z * z); }, "J");
    const double kz = normal_expectation([alpha](double z) { return z * z * std::exp(-alpha * z * z); }, "K");
    if (!(jz > 0.0)) {
        throw DiagnosticError("sandwich bread is not positive");
    }
    return truth.sigma0 * truth.sigma0 * kz / (jz * jz * truth.vx);
}

double gross_error_sensitivity(const ModelTruth& truth, double alpha, double delta) {
    check_alpha(alpha);
    truth.validate();
    if (!(delta >= 0.0) || !std::isfinite(delta)) {
        throw DomainError("delta must be a finite nonnegative number");
    }
    if (alpha == 0.0) {
        return kUnbounded;
    }
    if (delta == 0.0) {
        return 0.0;
    }
    const double x_t = truth.ex + std::sqrt(delta * truth.vx);
    const double line = truth.gamma0 + truth.beta0 * x_t;
    const double s = truth.sigma0;
    const auto neg_abs_if = [&](double y_t) { return -std::abs(influence_function(y_t, x_t, truth, alpha)); };

    // |IF| peaks at a residual of sigma0 / sqrt(alpha), which leaves the
    // +-10 sigma0 window once alpha < 0.01.
    const double half_width = std::max(10.0, 3.0 / std::sqrt(alpha));
    const double h = 1e-3 * s;
    const auto half_steps = static_cast<long>(std::ceil(half_width / 1e-3));
    double best_y = line;
    double best = 0.0;
    for (long i = -half_steps; i <= half_steps; ++i) {
        const double yv = line + h * static_cast<double>(i);
        const double v = neg_abs_if(yv);
        if (v < best) {
            best = v;
            best_y = yv;
        }
    }
    const double refined = boost::math::tools::brent_find_minima(neg_abs_if, best_y - h, best_y + h, 52).second;
    best = std::min(best, refined);
    return -best / std::sqrt(asymptotic_variance(truth, alpha));
}

SensitivityCurve are_curve(const ModelTruth& truth, const std::vector<double>& alphas) {
    check_curve_grid(alphas);
    const double v0 = asymptotic_variance(truth, 0.0);
    SensitivityCurve out{alphas, {}};
    out.values.reserve(alphas.size());
    for (double a : alphas) {
        out.values.push_back(v0 / asymptotic_variance(truth, a));
    }
    return out;
}

SensitivityCurve ges_curve(const ModelTruth& truth, const std::vector<double>& alphas, double delta) {
    check_curve_grid(alphas);
    SensitivityCurve out{alphas, {}};
    out.values.reserve(alphas.size());
    for (double a : alphas) {
        out.values.push_back(gross_error_sensitivity(truth, a, delta));
    }
    return out;
}

}  // namespace dpdsis
