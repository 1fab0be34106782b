#pragma once

#include "dpdsis/mdpde.hpp"
#include "dpdsis/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>
#include <utility>

namespace testutil {

using dpdsis::Index;
using dpdsis::Vector;

inline double rel_err(double a, double b, double floor = 1e-3) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// y = gamma + beta x + sigma e with x, e standard normal.
inline std::pair<Vector, Vector> simple_sample(std::mt19937_64& rng, Index n, double gamma, double beta,
                                               double sigma) {
    std::normal_distribution<double> z;
    Vector x(n), y(n);
    for (Index i = 0; i < n; ++i) {
        x[i] = z(rng);
        y[i] = gamma + beta * x[i] + sigma * z(rng);
    }
    return {y, x};
}

/// Like simple_sample but the first round(frac * n) responses are shifted.
inline std::pair<Vector, Vector> contaminated_sample(std::mt19937_64& rng, Index n, double gamma, double beta,
                                                     double sigma, double frac, double shift) {
    auto [y, x] = simple_sample(rng, n, gamma, beta, sigma);
    const auto k = static_cast<Index>(std::floor(frac * static_cast<double>(n) + 0.5));
    for (Index i = 0; i < k; ++i) {
        y[i] += shift;
    }
    return {y, x};
}

/// n x p independent normal design, y = 1 + x_0 + x_1 + x_2 + x_3 + e, and the
/// responses at round(frac * n) random rows shifted by `shift`.
struct ScreenFixture {
    dpdsis::Matrix x;
    Vector y;
};

inline ScreenFixture screen_fixture(std::uint64_t seed, Index n, Index p, double frac, double shift = -30.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    ScreenFixture f{dpdsis::Matrix(n, p), Vector(n)};
    for (Index j = 0; j < p; ++j) {
        for (Index i = 0; i < n; ++i) {
            f.x(i, j) = z(rng);
        }
    }
    for (Index i = 0; i < n; ++i) {
        f.y[i] = 1.0 + f.x(i, 0) + f.x(i, 1) + f.x(i, 2) + f.x(i, 3) + z(rng);
    }
    std::vector<Index> rows(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = i;
    std::shuffle(rows.begin(), rows.end(), rng);
    const auto k = static_cast<Index>(std::floor(frac * static_cast<double>(n) + 0.5));
    for (Index i = 0; i < k; ++i) {
        f.y[rows[static_cast<std::size_t>(i)]] += shift;
    }
    return f;
}

/// Central differences of the objective in (gamma, beta, log sigma).
inline std::array<double, 3> central_difference(const Vector& y, const Vector& x, const dpdsis::MarginalParams& p,
                                                double alpha, double h) {
    auto f = [&](double g, double b, double s) { return dpdsis::dpd_objective(y, x, {g, b, std::exp(s)}, alpha); };
    const double s = std::log(p.sigma);
    return {(f(p.gamma + h, p.beta, s) - f(p.gamma - h, p.beta, s)) / (2 * h),
            (f(p.gamma, p.beta + h, s) - f(p.gamma, p.beta - h, s)) / (2 * h),
            (f(p.gamma, p.beta, s + h) - f(p.gamma, p.beta, s - h)) / (2 * h)};
}

}  // namespace testutil
