#include "dpdsis/errors.hpp"
#include "dpdsis/penalized.hpp"
#include "dpdsis/screeners.hpp"
#include "dpdsis/stats.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace dpdsis;

namespace {

Matrix normal_matrix(std::uint64_t seed, Index n, Index p) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    Matrix x(n, p);
    for (Index j = 0; j < p; ++j)
        for (Index i = 0; i < n; ++i) x(i, j) = z(rng);
    return x;
}

Vector linear_response(std::uint64_t seed, const Matrix& x, const Vector& beta, double b0, double sigma) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    Vector y = x * beta;
    for (Index i = 0; i < y.size(); ++i) y[i] += b0 + sigma * z(rng);
    return y;
}

// Cyclic coordinate descent for
//   (1 / 2n) ||y - b0 - X beta||^2 + lambda ||beta||_1,
// written independently of the library as the LASSO reference.
std::pair<double, Vector> lasso_cd(const Vector& y, const Matrix& x, double lambda) {
    const Index n = x.rows();
    const Index k = x.cols();
    Vector beta = Vector::Zero(k);
    double b0 = y.mean();
    Vector r = y.array() - b0;
    for (int sweep = 0; sweep < 100000; ++sweep) {
        double change = 0.0;
        const double shift = r.mean();
        b0 += shift;
        r.array() -= shift;
        change = std::max(change, std::abs(shift));
        for (Index j = 0; j < k; ++j) {
            const double norm = x.col(j).squaredNorm() / static_cast<double>(n);
            const double rho = x.col(j).dot(r) / static_cast<double>(n) + norm * beta[j];
            double updated = 0.0;
            if (rho > lambda) updated = (rho - lambda) / norm;
            if (rho < -lambda) updated = (rho + lambda) / norm;
            const double delta = updated - beta[j];
            if (delta != 0.0) {
                r -= delta * x.col(j);
                beta[j] = updated;
                change = std::max(change, std::abs(delta));
            }
        }
        if (change < 1e-14) break;
    }
    return {b0, beta};
}

}  // namespace

TEST(DefaultLambda, Examples) {
    EXPECT_NEAR(default_lambda(54, 21236), 0.42954439975965322751, 1e-15);
    EXPECT_NEAR(default_lambda(100, 5000), 0.29184230658724306051, 1e-15);
    EXPECT_NEAR(default_lambda(100, std::exp(100.0)), 1.0, 1e-15);
    EXPECT_THROW(default_lambda(1, 10), ArgumentError);
    EXPECT_THROW(default_lambda(10, 1), ArgumentError);
}

TEST(Support, ExactZeroTest) {
    PenalizedFit fit;
    fit.coefficients = Vector::Zero(3);
    EXPECT_TRUE(support(fit).empty());
    fit.coefficients = Vector(4);
    fit.coefficients << 0, 1.2, 0, -0.3;
    EXPECT_EQ(support(fit), (IndexList{1, 3}));
    fit.coefficients << 1e-300, 0, 0, 0;
    EXPECT_EQ(support(fit), (IndexList{0}));
}

TEST(Penalized, ZeroLambdaSingleColumnMatchesMarginalFit) {
    std::mt19937_64 rng(17);
    for (double alpha : {0.0, 0.1, 0.3, 0.5}) {
        auto [y, x] = testutil::contaminated_sample(rng, 60, 0.4, 1.3, 0.8, 0.1, -30.0);
        Matrix xm(x.size(), 1);
        xm.col(0) = x;
        const PenalizedFit pen = fit_penalized_dpd(y, xm, alpha, 0.0);
        const MarginalFit marg = fit_marginal(y, x, alpha);
        EXPECT_TRUE(pen.converged) << alpha;
        EXPECT_NEAR(pen.intercept, marg.params.gamma, 1e-5) << alpha;
        EXPECT_NEAR(pen.coefficients[0], marg.params.beta, 1e-5) << alpha;
        EXPECT_NEAR(pen.sigma, marg.params.sigma, 1e-5) << alpha;
        EXPECT_NEAR(pen.objective, marg.objective, 1e-9) << alpha;
    }
}

TEST(Penalized, LargeLambdaGivesLocationFit) {
    const Matrix x = normal_matrix(5, 50, 6);
    Vector beta(6);
    beta << 1, -1, 0.5, 0, 0, 0;
    const Vector y = linear_response(6, x, beta, 2.0, 1.0);
    for (double alpha : {0.0, 0.3}) {
        const double lmax = lambda_max(y, x, alpha);
        EXPECT_GT(lmax, 0.0);
        // The zero-slope point is stationary from lmax on; the solver returns
        // it once the pilot's slopes cannot survive the first threshold step.
        const PenalizedFit fit = fit_penalized_dpd(y, x, alpha, 100.0 * lmax);
        EXPECT_TRUE(support(fit).empty());
        const PenalizedFit loc = fit_location_scale(y, alpha);
        EXPECT_NEAR(fit.intercept, loc.intercept, 1e-6);
        EXPECT_NEAR(fit.sigma, loc.sigma, 1e-6);
        const Vector grad = penalized_loss_gradient(y, x, alpha, fit.intercept, fit.coefficients, fit.sigma);
        EXPECT_LE(grad.segment(1, 6).cwiseAbs().maxCoeff(), effective_lambda(lmax, alpha, fit.sigma) * (1 + 1e-4));
        EXPECT_LT(std::abs(grad[0]), 1e-6);
        EXPECT_LT(std::abs(grad[7]), 1e-6);
        // Below lmax the zero-slope point is no longer stationary.
        const PenalizedFit below = fit_penalized_dpd(y, x, alpha, lmax * 0.95);
        EXPECT_FALSE(support(below).empty());
    }
}

TEST(Penalized, StrongSignalKeepsTrueSupport) {
    const Matrix x = normal_matrix(9, 100, 10);
    Vector beta = Vector::Zero(10);
    beta.head(4).setConstant(5.0);
    const Vector y = linear_response(10, x, beta, 5.0, 1.0);
    const PenalizedFit fit = fit_penalized_dpd(y, x, 0.3, default_lambda(100, 500));
    EXPECT_TRUE(fit.converged);
    const IndexList sup = support(fit);
    ASSERT_GE(sup.size(), 4u);
    EXPECT_EQ(IndexList(sup.begin(), sup.begin() + 4), (IndexList{0, 1, 2, 3}));
    for (Index j = 0; j < 4; ++j) EXPECT_NEAR(fit.coefficients[j], 5.0, 1.0);
    EXPECT_LT(fit.coefficients.tail(6).cwiseAbs().maxCoeff(), 0.3);
    EXPECT_NEAR(fit.sigma, 1.0, 0.3);
}

TEST(Penalized, AffineEquivariantInResponse) {
    const Matrix x = normal_matrix(11, 80, 8);
    Vector beta = Vector::Zero(8);
    beta << 2.0, -1.0, 0.5, 0, 0, 0, 0, 0;
    const Vector y = linear_response(12, x, beta, 1.0, 1.0);
    const double c = 37.0;
    const double m = -250.0;
    const Vector yc = (c * y.array() + m).matrix();
    for (double a : {0.0, 0.3}) {
        const PenalizedFit f = fit_penalized_dpd(y, x, a, 0.1);
        const PenalizedFit g = fit_penalized_dpd(yc, x, a, 0.1);
        EXPECT_EQ(support(f), support(g)) << a;
        EXPECT_NEAR(g.sigma, c * f.sigma, 1e-5 * c * f.sigma) << a;
        EXPECT_NEAR(g.intercept, c * f.intercept + m, 1e-4 * c) << a;
        for (Index j = 0; j < 8; ++j) EXPECT_NEAR(g.coefficients[j], c * f.coefficients[j], 1e-4 * c) << a;
    }
}

TEST(Penalized, LocationFitAtAlphaZeroIsMeanAndSd) {
    const Matrix x = normal_matrix(7, 40, 3);
    const Vector y = linear_response(8, x, Vector::Zero(3), -1.0, 2.0);
    const PenalizedFit fit = fit_penalized_dpd(y, x, 0.0, 10.0);
    EXPECT_TRUE(support(fit).empty());
    EXPECT_NEAR(fit.intercept, y.mean(), 1e-6);
    const double ms = (y.array() - y.mean()).square().mean();
    EXPECT_NEAR(fit.sigma, std::sqrt(ms), 1e-6);
}

TEST(Penalized, AlphaZeroFixedSigmaMatchesCoordinateDescentLasso) {
    const Matrix x = normal_matrix(30, 30, 5);
    Vector beta(5);
    beta << 1.5, 0, -0.7, 0.2, 0;
    const Vector y = linear_response(31, x, beta, 0.5, 1.0);
    for (double lambda : {0.01, 0.1, 0.3}) {
        PenalizedControl ctl;
        ctl.fixed_sigma = 1.0;
        const PenalizedFit fit = fit_penalized_dpd(y, x, 0.0, lambda, {}, ctl);
        const auto [b0, ref] = lasso_cd(y, x, lambda);
        EXPECT_TRUE(fit.converged);
        EXPECT_EQ(fit.sigma, 1.0);
        EXPECT_NEAR(fit.intercept, b0, 1e-4) << lambda;
        for (Index j = 0; j < 5; ++j) {
            EXPECT_NEAR(fit.coefficients[j], ref[j], 1e-4) << lambda << " " << j;
            EXPECT_EQ(fit.coefficients[j] == 0.0, ref[j] == 0.0) << lambda << " " << j;
        }
    }
}

TEST(Penalized, ZeroLambdaAlphaZeroIsMultipleRegression) {
    const Matrix x = normal_matrix(40, 45, 4);
    Vector beta(4);
    beta << 0.3, -2, 1, 0.1;
    const Vector y = linear_response(41, x, beta, 1.0, 0.5);
    const PenalizedFit fit = fit_penalized_dpd(y, x, 0.0, 0.0);
    Matrix design(45, 5);
    design.col(0).setOnes();
    design.rightCols(4) = x;
    const Vector coef = design.colPivHouseholderQr().solve(y);
    const double sigma = std::sqrt((y - design * coef).squaredNorm() / 45.0);
    EXPECT_NEAR(fit.intercept, coef[0], 1e-5);
    for (Index j = 0; j < 4; ++j) EXPECT_NEAR(fit.coefficients[j], coef[j + 1], 1e-5);
    EXPECT_NEAR(fit.sigma, sigma, 1e-5);
    EXPECT_EQ(support(fit).size(), 4u);
}

TEST(Penalized, ZeroLambdaRobustFitKeepsFullSupport) {
    const Matrix x = normal_matrix(50, 60, 3);
    Vector beta(3);
    beta << 1, 1, 1;
    const Vector y = linear_response(51, x, beta, 0.0, 1.0);
    const PenalizedFit fit = fit_penalized_dpd(y, x, 0.3, 0.0);
    EXPECT_EQ(support(fit), (IndexList{0, 1, 2}));
}

TEST(Penalized, KktHoldsAtConvergence) {
    auto f = testutil::screen_fixture(60, 80, 20, 0.1);
    const Matrix xs = standardize_columns(f.x, StandardizeMode::classical).values;
    for (double alpha : {0.0, 0.1, 0.3, 0.5}) {
        const PenalizedFit fit = fit_penalized_dpd(f.y, xs, alpha, default_lambda(80, 20));
        EXPECT_TRUE(fit.converged) << alpha;
        EXPECT_LE(kkt_residual(f.y, xs, fit), 1e-4) << alpha;
        EXPECT_NEAR(fit.objective,
                    penalized_objective(f.y, xs, alpha, fit.lambda, fit.intercept, fit.coefficients, fit.sigma),
                    1e-14);
    }
}

TEST(Penalized, RobustFitRecoversActiveSetUnderContamination) {
    auto f = testutil::screen_fixture(61, 100, 15, 0.1);
    const Matrix xs = standardize_columns(f.x, StandardizeMode::classical).values;
    const PenalizedFit fit = fit_penalized_dpd(f.y, xs, 0.3, 0.05);
    const IndexList sup = support(fit);
    for (Index j = 0; j < 4; ++j) {
        EXPECT_NE(std::find(sup.begin(), sup.end(), j), sup.end()) << j;
        EXPECT_NEAR(fit.coefficients[j], 1.0, 0.3) << j;
    }
    EXPECT_NEAR(fit.sigma, 1.0, 0.35);
}

TEST(Penalized, PathSupportShrinksBetweenEndpoints) {
    auto f = testutil::screen_fixture(62, 60, 10, 0.0);
    const Matrix xs = standardize_columns(f.x, StandardizeMode::classical).values;
    const double lmax = lambda_max(f.y, xs, 0.3);
    std::vector<double> grid;
    grid.push_back(100.0 * lmax);
    for (int i = 1; i <= 10; ++i) grid.push_back(lmax * (1.0 - i / 10.0));
    const auto path = fit_penalized_path(f.y, xs, 0.3, grid);
    ASSERT_EQ(path.size(), grid.size());
    EXPECT_TRUE(support(path.front()).empty());
    EXPECT_EQ(support(path.back()).size(), 10u);
    for (const auto& fit : path) EXPECT_LE(kkt_residual(f.y, xs, fit), 1e-4);
}

TEST(Penalized, WarmStartReachesSameSolution) {
    auto f = testutil::screen_fixture(63, 70, 8, 0.1);
    const Matrix xs = standardize_columns(f.x, StandardizeMode::classical).values;
    const PenalizedFit cold = fit_penalized_dpd(f.y, xs, 0.3, 0.1);
    PenalizedControl ctl;
    ctl.warm_start = cold;
    const PenalizedFit warm = fit_penalized_dpd(f.y, xs, 0.3, 0.1, {}, ctl);
    EXPECT_LE(warm.objective, cold.objective + 1e-12);
    EXPECT_LE(warm.n_iter, 5);
    ctl.warm_start->coefficients = Vector::Zero(3);
    EXPECT_THROW(fit_penalized_dpd(f.y, xs, 0.3, 0.1, {}, ctl), DimensionError);
}

TEST(Penalized, Errors) {
    const Matrix x = normal_matrix(70, 10, 2);
    Vector y = x.col(0);
    EXPECT_THROW(fit_penalized_dpd(y, x, -0.1, 0.1), DomainError);
    EXPECT_THROW(fit_penalized_dpd(y, x, 0.3, -0.1), DomainError);
    EXPECT_THROW(fit_penalized_dpd(y, x.leftCols(0), 0.3, 0.1), ArgumentError);
    EXPECT_THROW(fit_penalized_dpd(y.head(9), x, 0.3, 0.1), DimensionError);
    y[2] = std::numeric_limits<double>::infinity();
    EXPECT_THROW(fit_penalized_dpd(y, x, 0.3, 0.1), DataError);
    PenalizedControl ctl;
    ctl.fixed_sigma = 0.0;
    EXPECT_THROW(fit_penalized_dpd(x.col(0), x, 0.3, 0.1, {}, ctl), DomainError);
}

TEST(Penalized, NonConvergenceReportsBestIterate) {
    auto f = testutil::screen_fixture(64, 60, 12, 0.1);
    FitOptions opts;
    opts.max_iter = 1;
    const PenalizedFit fit = fit_penalized_dpd(f.y, f.x, 0.3, 0.01, opts);
    EXPECT_FALSE(fit.converged);
    EXPECT_TRUE(std::isfinite(fit.objective));
}
