#include "dpdsis/penalized.hpp"

#include "dpd_kernel.hpp"
#include "dpdsis/errors.hpp"
#include "dpdsis/stats.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace dpdsis {

namespace {

using detail::residual_loss;
using detail::residual_terms;
using detail::scale_terms;

constexpr int kMaxBacktracks = 60;

// Slack for objective comparisons near the point where changes reach the
// last few bits; at small sigma the curvature makes this matter.
double round_off(double f) { return 16.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(f)); }

double soft_threshold(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

double penalty_weight(double lambda, double alpha, double s) {
    return lambda * std::exp(-alpha * detail::kHalfLog2Pi - (1.0 + alpha) * s);
}

struct Iterate {
    double b0 = 0.0;
    Vector beta;
    double s = 0.0;  // log sigma
};

class PenalizedProblem {
public:
    PenalizedProblem(VectorRef y, MatrixRef x, double alpha, double lambda)
        : y_(y), x_(x), alpha_(alpha), lambda_(lambda), n_(static_cast<double>(y.size())) {}

    Vector residuals(double b0, const Vector& beta) const {
        Vector r = y_.array() - b0;
        if (beta.size() > 0) {
            r.noalias() -= x_ * beta;
        }
        return r;
    }

    double loss(const Vector& r, double s) const {
        const auto t = scale_terms(s, alpha_);
        double sum = 0.0;
        for (Index i = 0; i < r.size(); ++i) {
            sum += residual_loss(r[i], t);
        }
        return sum / n_;
    }

    /// Slope penalty weight at log sigma s: lambda (2 pi)^{-alpha/2} sigma^{-(1 + alpha)},
    /// the loss's own scaling of a unit standardized residual.
    double lambda_at(double s) const { return penalty_weight(lambda_, alpha_, s); }

    double penalty(const Vector& beta, double s) const {
        return beta.size() > 0 ? lambda_at(s) * beta.cwiseAbs().sum() : 0.0;
    }

    /// Mean loss; fills the gradient in (b0, beta) and returns d/ds through `ds`.
    double loss_grad(const Vector& r, double s, double& g0, Vector& g, double* ds = nullptr) const {
        const auto t = scale_terms(s, alpha_);
        Vector u(r.size());
        double sum = 0.0;
        double ds_sum = 0.0;
        for (Index i = 0; i < r.size(); ++i) {
            const auto terms = residual_terms(r[i], t);
            sum += terms.loss;
            u[i] = terms.weight * r[i];
            ds_sum += terms.weight * (1.0 - r[i] * r[i] * t.inv_sigma2);
        }
        const double scale = -t.inv_sigma2 / n_;
        g0 = scale * u.sum();
        if (x_.cols() > 0) {
            g.noalias() = scale * (x_.transpose() * u);
        } else {
            g.resize(0);
        }
        if (ds != nullptr) {
            *ds = -alpha_ * t.base + ds_sum / n_;
        }
        return sum / n_;
    }

    /// Largest violation of the optimality conditions in (b0, beta) at it.s.
    double kkt(const Iterate& it, double g0, const Vector& g) const {
        const double lambda = lambda_at(it.s);
        double worst = std::abs(g0);
        for (Index j = 0; j < g.size(); ++j) {
            const double v = it.beta[j] != 0.0 ? std::abs(g[j] + lambda * (it.beta[j] > 0 ? 1.0 : -1.0))
                                               : std::max(0.0, std::abs(g[j]) - lambda);
            worst = std::max(worst, v);
        }
        return worst;
    }

    double alpha() const { return alpha_; }
    Index cols() const { return x_.cols(); }

private:
    VectorRef y_;
    MatrixRef x_;
    double alpha_;
    double lambda_;
    double n_;
};

struct RunResult {
    Iterate it;
    double objective = std::numeric_limits<double>::infinity();
    bool converged = false;
    int steps = 0;
};

class Solver {
public:
    Solver(const PenalizedProblem& prob, double s_min, bool sigma_free, double tol, int max_outer)
        : prob_(prob), s_min_(s_min), sigma_free_(sigma_free), tol_(tol), max_outer_(max_outer) {}

    RunResult run(Iterate it) const {
        RunResult out;
        it.s = std::max(it.s, s_min_);
        Vector r = prob_.residuals(it.b0, it.beta);
        if (sigma_free_) {
            it.s = minimize_scale(r, it.s, 4.0);
        }
        int steps = 0;
        const int max_steps = 20 * max_outer_;
        double step = initial_step(it.s);
        for (int outer = 0; outer < max_outer_ && steps < max_steps; ++outer) {
            const bool inner_ok = descend(it, r, step, steps, max_steps);
            const double s_before = it.s;
            if (sigma_free_) {
                it.s = minimize_scale(r, it.s, 1.0);
                step *= std::exp(2.0 * (it.s - s_before));
            }
            double g0 = 0.0;
            double ds = 0.0;
            Vector g;
            prob_.loss_grad(r, it.s, g0, g, &ds);
            if (violation(it, g0, g, ds) <= tol_) {
                out.converged = true;
                break;
            }
            if (!inner_ok && it.s == s_before) {
                break;  // stalled: the line search cannot make progress
            }
        }
        out.objective = prob_.loss(r, it.s) + prob_.penalty(it.beta, it.s);
        out.it = std::move(it);
        out.steps = steps;
        return out;
    }

private:
    double initial_step(double s) const {
        // Curvature of the least-squares part is about mean(x^2) / sigma^2 <= (1 + k) / sigma^2
        // for standardized columns.
        return std::exp(2.0 * s) / (1.0 + static_cast<double>(prob_.cols()));
    }

    // Violation of the optimality conditions, including log sigma when it is
    // free (at the floor only a negative derivative counts).
    double violation(const Iterate& it, double g0, const Vector& g, double ds) const {
        double worst = prob_.kkt(it, g0, g);
        if (sigma_free_) {
            worst = std::max(worst, it.s > s_min_ ? std::abs(ds) : std::max(0.0, -ds));
        }
        return worst;
    }

    // Proximal-gradient steps on (b0, beta) at the current sigma. Returns false
    // when the line search stalls before reaching the tolerance.
    bool descend(Iterate& it, Vector& r, double& step, int& steps, int max_steps) const {
        double g0 = 0.0;
        Vector g;
        double f = prob_.loss_grad(r, it.s, g0, g);
        const double lambda = prob_.lambda_at(it.s);
        while (steps < max_steps) {
            if (prob_.kkt(it, g0, g) <= 0.1 * tol_) {
                return true;
            }
            const double f_total = f + prob_.penalty(it.beta, it.s);
            bool accepted = false;
            double t = step;
            double b0_new = 0.0;
            Vector beta_new(it.beta.size());
            Vector r_new;
            double f_new = 0.0;
            for (int bt = 0; bt < kMaxBacktracks; ++bt) {
                b0_new = it.b0 - t * g0;
                for (Index j = 0; j < beta_new.size(); ++j) {
                    beta_new[j] = soft_threshold(it.beta[j] - t * g[j], t * lambda);
                }
                r_new = prob_.residuals(b0_new, beta_new);
                f_new = prob_.loss(r_new, it.s);
                const double d0 = b0_new - it.b0;
                const Vector d = beta_new - it.beta;
                const double lin = g0 * d0 + (d.size() > 0 ? g.dot(d) : 0.0);
                const double quad = (d0 * d0 + d.squaredNorm()) / (2.0 * t);
                if (std::isfinite(f_new) && f_new <= f + lin + quad + round_off(f)) {
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if (!accepted) {
                return false;
            }
            const double f_total_new = f_new + prob_.penalty(beta_new, it.s);
            if (!(f_total_new <= f_total + round_off(f_total))) {
                return false;
            }
            ++steps;
            double g0_new = 0.0;
            Vector g_new;
            f_new = prob_.loss_grad(r_new, it.s, g0_new, g_new);
            const double sd0 = b0_new - it.b0;
            const Vector sd = beta_new - it.beta;
            const double ss = sd0 * sd0 + sd.squaredNorm();
            const double sy = sd0 * (g0_new - g0) + (sd.size() > 0 ? sd.dot(g_new - g) : 0.0);
            // Barzilai-Borwein guess, allowed to at most double the accepted step so the
            // iterates stay in the basin of the pilot.
            const double bb = (sy > 0.0 && std::isfinite(ss / sy)) ? ss / sy : 2.0 * t;
            step = std::clamp(bb, 1e-12, 2.0 * t);
            it.b0 = b0_new;
            it.beta = std::move(beta_new);
            r = std::move(r_new);
            f = f_new;
            g0 = g0_new;
            g = std::move(g_new);
        }
        return false;
    }

    // Minimizes the mean loss over log sigma, scanning +-half_width around s
    // at step 0.25 and polishing with Brent. Only an improvement is accepted.
    double minimize_scale(const Vector& r, double s, double half_width) const {
        if (prob_.alpha() == 0.0) {
            const double ms = r.squaredNorm() / static_cast<double>(r.size());
            return ms > 0.0 ? std::max(0.5 * std::log(ms), s_min_) : s_min_;
        }
        const auto h = [&](double v) { return prob_.loss(r, v); };
        const double h0 = h(s);
        constexpr double kStep = 0.25;
        double best_s = s;
        double best_h = h0;
        for (double v = std::max(s - half_width, s_min_); v <= s + half_width + 1e-12; v += kStep) {
            const double hv = h(v);
            if (hv < best_h) {
                best_h = hv;
                best_s = v;
            }
        }
        const double lo = std::max(best_s - kStep, s_min_);
        const double hi = best_s + kStep;
        const auto [bs, bh] = boost::math::tools::brent_find_minima(h, lo, hi, 40);
        if (bh < best_h) {
            best_s = bs;
            best_h = bh;
        }
        return best_h < h0 ? best_s : s;
    }

    const PenalizedProblem& prob_;
    double s_min_;
    bool sigma_free_;
    double tol_;
    int max_outer_;
};

// Least squares (ridge-stabilized on the slopes when k + 1 >= n), then
// reweighted with the DPD weights exp(-alpha r^2 / (2 s^2)) of its own
// residuals at the normalized-MAD scale s until the weights settle.
Iterate pilot_start(VectorRef y, MatrixRef x, double alpha, double lambda, double floor) {
    const Index n = y.size();
    const Index k = x.cols();
    Matrix design(n, k + 1);
    design.col(0).setOnes();
    design.rightCols(k) = x;
    const double ridge = k + 1 < n ? 0.0 : std::max(lambda, 1e-3) * static_cast<double>(n);
    Vector w = Vector::Ones(n);
    Vector coef = Vector::Zero(k + 1);
    coef[0] = stats::median(y);
    Vector r = y.array() - coef[0];
    const int rounds = alpha > 0.0 ? 30 : 1;
    for (int round = 0; round < rounds; ++round) {
        Matrix gram = design.transpose() * w.asDiagonal() * design;
        gram.diagonal().tail(k).array() += ridge;
        const Vector rhs = design.transpose() * w.cwiseProduct(y);
        const Vector next = gram.ldlt().solve(rhs);
        if (!next.allFinite()) {
            break;
        }
        coef = next;
        r = y - design * coef;
        if (alpha == 0.0) {
            break;
        }
        const double scale = std::max(stats::robust_scale(r), floor);
        const Vector w_next = (-alpha * r.array().square() / (2.0 * scale * scale)).exp();
        if (!(w_next.sum() > 1e-8 * static_cast<double>(n))) {
            break;
        }
        const double change = (w_next - w).cwiseAbs().maxCoeff();
        w = w_next;
        if (change < 1e-10) {
            break;
        }
    }
    const double scale = alpha == 0.0 ? std::sqrt(r.squaredNorm() / static_cast<double>(n)) : stats::robust_scale(r);
    return {coef[0], coef.tail(k), std::log(std::max(scale, floor))};
}

void check_inputs(VectorRef y, MatrixRef x, double alpha, double lambda) {
    if (!(alpha >= 0.0)) {
        throw DomainError("alpha must be nonnegative");
    }
    if (!(lambda >= 0.0)) {
        throw DomainError("lambda must be nonnegative");
    }
    if (x.rows() != y.size()) {
        throw DimensionError("covariate matrix has " + std::to_string(x.rows()) + " rows but response has " +
                             std::to_string(y.size()) + " entries");
    }
    if (y.size() < 3) {
        throw ArgumentError("penalized fit needs at least 3 observations");
    }
    if (!y.allFinite() || !x.allFinite()) {
        throw DataError("non-finite value in penalized fit input");
    }
}

PenalizedFit fit_impl(VectorRef y, MatrixRef x, double alpha, double lambda, const FitOptions& opts,
                      const PenalizedControl& control) {
    check_inputs(y, x, alpha, lambda);
    if (opts.max_iter < 1) {
        throw ArgumentError("max_iter must be at least 1");
    }
    const Index k = x.cols();
    const double floor = resolve_sigma_floor(y, opts);
    const bool sigma_free = !control.fixed_sigma.has_value();
    if (!sigma_free && !(*control.fixed_sigma > 0.0)) {
        throw DomainError("fixed sigma must be positive");
    }
    const double s_min = sigma_free ? std::log(floor) : std::log(*control.fixed_sigma);

    const PenalizedProblem prob(y, x, alpha, lambda);
    const Solver solver(prob, s_min, sigma_free, control.kkt_tol, opts.max_iter);

    Iterate start;
    if (control.warm_start) {
        const PenalizedFit& w = *control.warm_start;
        if (w.coefficients.size() != k) {
            throw DimensionError("warm start has " + std::to_string(w.coefficients.size()) + " coefficients for " +
                                 std::to_string(k) + " columns");
        }
        start = {w.intercept, w.coefficients, std::log(std::max(w.sigma, floor))};
    } else {
        start = pilot_start(y, x, alpha, lambda, floor);
    }
    if (!sigma_free) {
        start.s = s_min;
    }
    const RunResult best = solver.run(start);

    PenalizedFit fit;
    fit.intercept = best.it.b0;
    fit.coefficients = best.it.beta;
    fit.sigma = best.it.s <= s_min ? (sigma_free ? floor : *control.fixed_sigma) : std::exp(best.it.s);
    fit.lambda = lambda;
    fit.alpha = alpha;
    fit.objective = penalized_objective(y, x, alpha, lambda, fit.intercept, fit.coefficients, fit.sigma);
    fit.converged = best.converged;
    fit.n_iter = best.steps;
    return fit;
}

}  // namespace

PenalizedFit fit_penalized_dpd(VectorRef y, MatrixRef x, double alpha, double lambda, const FitOptions& opts,
                               const PenalizedControl& control) {
    if (x.cols() < 1) {
        throw ArgumentError("penalized fit needs at least one covariate");
    }
    return fit_impl(y, x, alpha, lambda, opts, control);
}

PenalizedFit fit_location_scale(VectorRef y, double alpha, const FitOptions& opts) {
    const Matrix none(y.size(), 0);
    return fit_impl(y, none, alpha, 0.0, opts, {});
}

double effective_lambda(double lambda, double alpha, double sigma) {
    if (!(sigma > 0.0)) {
        throw DomainError("sigma must be positive");
    }
    return penalty_weight(lambda, alpha, std::log(sigma));
}

double penalized_objective(VectorRef y, MatrixRef x, double alpha, double lambda, double intercept,
                           VectorRef coefficients, double sigma) {
    if (!(sigma > 0.0)) {
        throw DomainError("sigma must be positive");
    }
    if (coefficients.size() != x.cols() || x.rows() != y.size()) {
        throw DimensionError("penalized objective inputs do not conform");
    }
    const PenalizedProblem prob(y, x, alpha, lambda);
    const Vector beta = coefficients;
    const double s = std::log(sigma);
    return prob.loss(prob.residuals(intercept, beta), s) + prob.penalty(beta, s);
}

Vector penalized_loss_gradient(VectorRef y, MatrixRef x, double alpha, double intercept, VectorRef coefficients,
                               double sigma) {
    if (!(sigma > 0.0)) {
        throw DomainError("sigma must be positive");
    }
    if (coefficients.size() != x.cols() || x.rows() != y.size()) {
        throw DimensionError("penalized gradient inputs do not conform");
    }
    const PenalizedProblem prob(y, x, alpha, 0.0);
    const Vector beta = coefficients;
    double g0 = 0.0;
    double ds = 0.0;
    Vector g;
    prob.loss_grad(prob.residuals(intercept, beta), std::log(sigma), g0, g, &ds);
    Vector out(x.cols() + 2);
    out[0] = g0;
    out.segment(1, x.cols()) = g;
    out[x.cols() + 1] = ds;
    return out;
}

double kkt_residual(VectorRef y, MatrixRef x, const PenalizedFit& fit, bool sigma_free) {
    const Vector grad = penalized_loss_gradient(y, x, fit.alpha, fit.intercept, fit.coefficients, fit.sigma);
    const Index k = x.cols();
    const double lambda = effective_lambda(fit.lambda, fit.alpha, fit.sigma);
    double worst = std::abs(grad[0]);
    for (Index j = 0; j < k; ++j) {
        const double b = fit.coefficients[j];
        const double g = grad[j + 1];
        const double v = b != 0.0 ? std::abs(g + lambda * (b > 0 ? 1.0 : -1.0))
                                  : std::max(0.0, std::abs(g) - lambda);
        worst = std::max(worst, v);
    }
    if (sigma_free) {
        worst = std::max(worst, std::abs(grad[k + 1]));
    }
    return worst;
}

double lambda_max(VectorRef y, MatrixRef x, double alpha, const FitOptions& opts) {
    check_inputs(y, x, alpha, 0.0);
    const PenalizedFit loc = fit_location_scale(y, alpha, opts);
    const Vector grad = penalized_loss_gradient(y, x, alpha, loc.intercept, Vector::Zero(x.cols()), loc.sigma);
    const double top = x.cols() > 0 ? grad.segment(1, x.cols()).cwiseAbs().maxCoeff() : 0.0;
    return top / effective_lambda(1.0, alpha, loc.sigma);
}

std::vector<PenalizedFit> fit_penalized_path(VectorRef y, MatrixRef x, double alpha, const std::vector<double>& lambdas,
                                             const FitOptions& opts) {
    std::vector<PenalizedFit> path;
    path.reserve(lambdas.size());
    PenalizedControl control;
    for (double lambda : lambdas) {
        path.push_back(fit_penalized_dpd(y, x, alpha, lambda, opts, control));
        control.warm_start = path.back();
    }
    return path;
}

double default_lambda(double n, double p) {
    if (!(n >= 2.0) || !(p >= 2.0)) {
        throw ArgumentError("default lambda needs n >= 2 and p >= 2");
    }
    return std::sqrt(std::log(p) / n);
}

IndexList support(const PenalizedFit& fit) {
    IndexList out;
    for (Index j = 0; j < fit.coefficients.size(); ++j) {
        if (fit.coefficients[j] != 0.0) {
            out.push_back(j);
        }
    }
    return out;
}

}  // namespace dpdsis
