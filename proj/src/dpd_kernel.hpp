#pragma once

// Per-observation pieces of the normal-model DPD loss, shared by the marginal
// and the penalized joint fits. Everything is expressed through
//   L = log(sigma) + log(2 pi) / 2    and    A = L + r^2 / (2 sigma^2),
// i.e. A is the negative log normal density of the residual r. With
// e = exp(-alpha A) the loss reads
//   l = exp(-alpha L) / sqrt(1 + alpha) - e - (e - 1) / alpha,
// which is evaluated with expm1 so that alpha -> 0 recovers A without
// cancellation.

#include <cmath>
#include <numbers>

namespace dpdsis::detail {

inline constexpr double kHalfLog2Pi = 0.91893853320467274178;

struct ScaleTerms {
    double alpha;
    double log_sigma;
    double inv_sigma2;
    double base;       // exp(-alpha L) / sqrt(1 + alpha), the integral term
    double half_log2pi_plus_log_sigma;
};

inline ScaleTerms scale_terms(double log_sigma, double alpha) {
    const double big_l = log_sigma + kHalfLog2Pi;
    ScaleTerms t{};
    t.alpha = alpha;
    t.log_sigma = log_sigma;
    t.inv_sigma2 = std::exp(-2.0 * log_sigma);
    t.base = alpha > 0.0 ? std::exp(-alpha * big_l) / std::sqrt(1.0 + alpha) : 0.0;
    t.half_log2pi_plus_log_sigma = big_l;
    return t;
}

/// Loss of one residual. For alpha == 0 this is the negative log density.
inline double residual_loss(double r, const ScaleTerms& t) {
    const double a = t.half_log2pi_plus_log_sigma + 0.5 * r * r * t.inv_sigma2;
    if (t.alpha == 0.0) {
        return a;
    }
    const double em = std::expm1(-t.alpha * a);
    return t.base - (1.0 + em) - em / t.alpha;
}

/// Loss plus the weight (1 + alpha) exp(-alpha A) = dl/dA used by every
/// partial derivative: dl/d(eta) = -weight * r / sigma^2 and
/// dl/d(log sigma) = -alpha * base + weight * (1 - r^2 / sigma^2).
struct ResidualTerms {
    double loss;
    double weight;
};

inline ResidualTerms residual_terms(double r, const ScaleTerms& t) {
    const double a = t.half_log2pi_plus_log_sigma + 0.5 * r * r * t.inv_sigma2;
    if (t.alpha == 0.0) {
        return {a, 1.0};
    }
    const double em = std::expm1(-t.alpha * a);
    const double e = 1.0 + em;
    return {t.base - e - em / t.alpha, (1.0 + t.alpha) * e};
}

}  // namespace dpdsis::detail
