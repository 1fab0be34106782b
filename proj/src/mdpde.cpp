#include "dpdsis/mdpde.hpp"

#include "dpd_kernel.hpp"
#include "dpdsis/errors.hpp"
#include "dpdsis/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace dpdsis {

namespace {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

void check_scale_args(double sigma, double alpha) {
    if (!(sigma > 0.0)) {
        throw DomainError("sigma must be positive, got " + std::to_string(sigma));
    }
    if (!(alpha >= 0.0)) {
        throw DomainError("alpha must be nonnegative, got " + std::to_string(alpha));
    }
}

void check_pair(VectorRef y, VectorRef x) {
    if (y.size() != x.size()) {
        throw DimensionError("response has " + std::to_string(y.size()) + " entries but covariate has " +
                             std::to_string(x.size()));
    }
}

void check_fit_input(VectorRef y, VectorRef x) {
    check_pair(y, x);
    if (y.size() < 3) {
        throw ArgumentError("marginal fit needs at least 3 observations");
    }
    if (!y.allFinite() || !x.allFinite()) {
        throw DataError("non-finite value in marginal fit input");
    }
    if (stats::is_constant(x)) {
        throw DegenerateCovariateError("constant covariate");
    }
}

// Mean (or weighted mean) DPD loss over (gamma, beta, log sigma).
class MarginalProblem {
public:
    MarginalProblem(VectorRef y, VectorRef x, const Vector* weights, double alpha)
        : y_(y), x_(x), weights_(weights), alpha_(alpha) {}

    double value(const Vec3& theta) const {
        const auto terms = detail::scale_terms(theta[2], alpha_);
        double f = 0.0;
        const Index n = y_.size();
        for (Index i = 0; i < n; ++i) {
            const double r = y_[i] - theta[0] - theta[1] * x_[i];
            f += weight(i) * detail::residual_loss(r, terms);
        }
        return weights_ ? f : f / static_cast<double>(n);
    }

    double value_grad(const Vec3& theta, Vec3& grad) const {
        const auto terms = detail::scale_terms(theta[2], alpha_);
        double f = 0.0;
        double g_eta = 0.0;
        double g_slope = 0.0;
        double g_scale = 0.0;
        const Index n = y_.size();
        for (Index i = 0; i < n; ++i) {
            const double r = y_[i] - theta[0] - theta[1] * x_[i];
            const auto rt = detail::residual_terms(r, terms);
            const double w = weight(i);
            f += w * rt.loss;
            const double wr = w * rt.weight * r;
            g_eta += wr;
            g_slope += wr * x_[i];
            g_scale += w * rt.weight * (1.0 - r * r * terms.inv_sigma2);
        }
        const double norm = weights_ ? 1.0 : 1.0 / static_cast<double>(n);
        grad[0] = -g_eta * terms.inv_sigma2 * norm;
        grad[1] = -g_slope * terms.inv_sigma2 * norm;
        grad[2] = g_scale * norm - alpha_ * terms.base;
        return f * norm;
    }

private:
    double weight(Index i) const { return weights_ ? (*weights_)[i] : 1.0; }

    VectorRef y_;
    VectorRef x_;
    const Vector* weights_;
    double alpha_;
};

struct OptResult {
    Vec3 theta;
    double f = 0.0;
    bool converged = false;
    int iters = 0;
};

// BFGS on (gamma, beta, s = log sigma) with the bound s >= s_min handled by
// projection; when the bound is active the step is restricted to the first
// two coordinates.
OptResult minimize_bounded(const MarginalProblem& prob, Vec3 theta, double s_min, const FitOptions& opts) {
    theta[2] = std::max(theta[2], s_min);
    Vec3 g;
    double f = prob.value_grad(theta, g);
    Mat3 h = Mat3::Identity();
    bool fresh = true;
    OptResult out;
    constexpr double kArmijo = 1e-4;
    const double eps = std::numeric_limits<double>::epsilon();

    auto projected = [&](const Vec3& th, const Vec3& gr) {
        Vec3 pg = gr;
        if (th[2] <= s_min && gr[2] > 0.0) {
            pg[2] = 0.0;
        }
        return pg;
    };

    int iter = 0;
    for (; iter < opts.max_iter; ++iter) {
        const Vec3 pg = projected(theta, g);
        if (pg.norm() <= opts.grad_tol) {
            out.converged = true;
            break;
        }
        const bool at_bound = pg[2] == 0.0 && theta[2] <= s_min;
        Vec3 d;
        if (at_bound) {
            d.head<2>() = -h.topLeftCorner<2, 2>() * g.head<2>();
            d[2] = 0.0;
        } else {
            d = -h * g;
        }
        if (!(d.dot(pg) < 0.0)) {
            h.setIdentity();
            fresh = true;
            d = -pg;
        }
        if (fresh) {
            d *= std::min(1.0, 1.0 / pg.norm());
        }

        double t = 1.0;
        bool accepted = false;
        Vec3 cand;
        Vec3 g_cand;
        double f_cand = 0.0;
        for (int ls = 0; ls < 60; ++ls) {
            cand = theta + t * d;
            cand[2] = std::max(cand[2], s_min);
            const Vec3 step = cand - theta;
            f_cand = prob.value_grad(cand, g_cand);
            if (std::isfinite(f_cand)) {
                if (f_cand <= f + kArmijo * g.dot(step)) {
                    accepted = true;
                    break;
                }
                // Round-off regime: objective flat to machine precision but
                // the gradient still shrinks.
                if (f_cand <= f + 8.0 * eps * (1.0 + std::abs(f)) &&
                    projected(cand, g_cand).norm() < pg.norm()) {
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if (!accepted) {
            if (!fresh) {
                h.setIdentity();
                fresh = true;
                continue;
            }
            break;
        }

        const Vec3 s = cand - theta;
        const Vec3 yv = g_cand - g;
        const double sy = s.dot(yv);
        if (sy > 1e-12 * s.norm() * yv.norm()) {
            if (fresh) {
                h = Mat3::Identity() * (sy / yv.squaredNorm());
                fresh = false;
            }
            const double rho = 1.0 / sy;
            const Mat3 v = Mat3::Identity() - rho * s * yv.transpose();
            h = v * h * v.transpose() + rho * s * s.transpose();
        }
        theta = cand;
        f = f_cand;
        g = g_cand;
    }
    if (!out.converged && projected(theta, g).norm() <= opts.grad_tol) {
        out.converged = true;
    }
    out.theta = theta;
    out.f = f;
    out.iters = iter;
    return out;
}

double floor_for(VectorRef y, const FitOptions& opts) { return resolve_sigma_floor(y, opts); }

MarginalFit fit_impl(VectorRef y, VectorRef x, const Vector* weights, double alpha, const FitOptions& opts,
                     std::optional<MarginalParams> warm) {
    if (!(alpha >= 0.0)) {
        throw DomainError("alpha must be nonnegative");
    }
    if (!(opts.grad_tol > 0.0) || opts.max_iter < 1) {
        throw ArgumentError("fit options need grad_tol > 0 and max_iter >= 1");
    }
    check_fit_input(y, x);
    const double floor = floor_for(y, opts);
    const double s_min = std::log(floor);
    const MarginalProblem prob(y, x, weights, alpha);

    struct Candidate {
        Vec3 theta;
        StartKind kind;
    };
    std::vector<Candidate> starts;
    const MarginalParams ols = ols_closed_form(y, x, floor);
    starts.push_back({Vec3(ols.gamma, ols.beta, std::log(ols.sigma)), StartKind::ols});
    if (opts.multi_start) {
        const double scale = std::max(stats::robust_scale(y), floor);
        starts.push_back({Vec3(stats::median(y), 0.0, std::log(scale)), StartKind::robust});
    }
    if (warm) {
        starts.push_back({Vec3(warm->gamma, warm->beta, std::log(std::max(warm->sigma, floor))), StartKind::warm});
    }

    MarginalFit best;
    bool have = false;
    for (const auto& start : starts) {
        const OptResult res = minimize_bounded(prob, start.theta, s_min, opts);
        if (!have || res.f < best.objective) {
            best.params = {res.theta[0], res.theta[1], res.theta[2] <= s_min ? floor : std::exp(res.theta[2])};
            best.objective = res.f;
            best.converged = res.converged;
            best.n_iter = res.iters;
            best.start_used = start.kind;
            have = true;
        }
    }
    best.alpha = alpha;
    // Report the objective at the stored (sigma-exponentiated) parameters.
    best.objective = weights ? dpd_objective_weighted(y, x, *weights, best.params, alpha)
                             : dpd_objective(y, x, best.params, alpha);
    return best;
}

}  // namespace

std::string_view to_string(StartKind kind) {
    switch (kind) {
        case StartKind::ols:
            return "ols";
        case StartKind::robust:
            return "robust";
        case StartKind::warm:
            return "warm";
    }
    return "?";
}

double dpd_loss(double y, double eta, double sigma, double alpha) {
    check_scale_args(sigma, alpha);
    return detail::residual_loss(y - eta, detail::scale_terms(std::log(sigma), alpha));
}

double dpd_objective(VectorRef y, VectorRef x, const MarginalParams& params, double alpha) {
    check_pair(y, x);
    check_scale_args(params.sigma, alpha);
    return MarginalProblem(y, x, nullptr, alpha).value(Vec3(params.gamma, params.beta, std::log(params.sigma)));
}

std::array<double, 3> dpd_gradient(VectorRef y, VectorRef x, const MarginalParams& params, double alpha) {
    check_pair(y, x);
    check_scale_args(params.sigma, alpha);
    Vec3 g;
    MarginalProblem(y, x, nullptr, alpha).value_grad(Vec3(params.gamma, params.beta, std::log(params.sigma)), g);
    return {g[0], g[1], g[2]};
}

namespace {
Vector normalized_weights(VectorRef y, VectorRef weights) {
    if (weights.size() != y.size()) {
        throw DimensionError("weights length does not match the response");
    }
    if (!weights.allFinite() || (weights.array() < 0.0).any() || !(weights.sum() > 0.0)) {
        throw DataError("weights must be finite, nonnegative, and not all zero");
    }
    return weights / weights.sum();
}
}  // namespace

double dpd_objective_weighted(VectorRef y, VectorRef x, VectorRef weights, const MarginalParams& params,
                              double alpha) {
    check_pair(y, x);
    check_scale_args(params.sigma, alpha);
    const Vector w = normalized_weights(y, weights);
    return MarginalProblem(y, x, &w, alpha).value(Vec3(params.gamma, params.beta, std::log(params.sigma)));
}

std::array<double, 3> dpd_gradient_weighted(VectorRef y, VectorRef x, VectorRef weights,
                                            const MarginalParams& params, double alpha) {
    check_pair(y, x);
    check_scale_args(params.sigma, alpha);
    const Vector w = normalized_weights(y, weights);
    Vec3 g;
    MarginalProblem(y, x, &w, alpha).value_grad(Vec3(params.gamma, params.beta, std::log(params.sigma)), g);
    return {g[0], g[1], g[2]};
}

double resolve_sigma_floor(VectorRef y, const FitOptions& opts) {
    if (opts.sigma_floor > 0.0) {
        return opts.sigma_floor;
    }
    const double m = y.size() > 0 ? stats::mad(y) : 0.0;
    return m > 0.0 ? 1e-8 * m : 1e-8;
}

MarginalParams ols_closed_form(VectorRef y, VectorRef x, double sigma_floor) {
    check_pair(y, x);
    if (y.size() < 3) {
        throw ArgumentError("least squares needs at least 3 observations");
    }
    if (stats::is_constant(x)) {
        throw DegenerateCovariateError("constant covariate");
    }
    const double n = static_cast<double>(y.size());
    const double xbar = x.mean();
    const double ybar = y.mean();
    const auto xc = (x.array() - xbar);
    const double sxx = xc.square().sum();
    const double sxy = (xc * (y.array() - ybar)).sum();
    MarginalParams p;
    p.beta = sxy / sxx;
    p.gamma = ybar - p.beta * xbar;
    const double rss = (y.array() - p.gamma - p.beta * x.array()).square().sum();
    const double floor = sigma_floor > 0.0 ? sigma_floor : resolve_sigma_floor(y, FitOptions{});
    p.sigma = std::max(std::sqrt(rss / n), floor);
    return p;
}

MarginalFit fit_marginal(VectorRef y, VectorRef x, double alpha, const FitOptions& opts) {
    return fit_impl(y, x, nullptr, alpha, opts, std::nullopt);
}

MarginalFit fit_marginal_weighted(VectorRef y, VectorRef x, VectorRef weights, double alpha,
                                  const FitOptions& opts, std::optional<MarginalParams> warm_start) {
    check_pair(y, x);
    const Vector w = normalized_weights(y, weights);
    return fit_impl(y, x, &w, alpha, opts, warm_start);
}

}  // namespace dpdsis
