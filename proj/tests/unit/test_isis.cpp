#include "dpdsis/errors.hpp"
#include "dpdsis/isis.hpp"
#include "dpdsis/screeners.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace dpdsis;

namespace {

// Equicorrelated design with the first four covariates active at `tau`.
testutil::ScreenFixture equicorr_fixture(std::uint64_t seed, Index n, Index p, double rho, double tau,
                                         double frac) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    testutil::ScreenFixture f{Matrix(n, p), Vector(n)};
    for (Index i = 0; i < n; ++i) {
        const double w = z(rng);
        for (Index j = 0; j < p; ++j) f.x(i, j) = std::sqrt(rho) * w + std::sqrt(1 - rho) * z(rng);
    }
    for (Index i = 0; i < n; ++i) {
        f.y[i] = tau * (1.0 + f.x(i, 0) + f.x(i, 1) + f.x(i, 2) + f.x(i, 3)) + z(rng);
    }
    const auto k = static_cast<Index>(std::floor(frac * static_cast<double>(n) + 0.5));
    for (Index i = 0; i < k; ++i) f.y[i] -= 30.0;
    return f;
}

bool contains_all_active(const IndexList& model) {
    for (Index j = 0; j < 4; ++j) {
        if (std::find(model.begin(), model.end(), j) == model.end()) return false;
    }
    return true;
}

}  // namespace

TEST(Residuals, Examples) {
    const Vector y = (Vector(4) << 1, -2, 3, 0.5).finished();
    Matrix x(4, 2);
    x << 1, 0, 0, 1, 2, 1, -1, 3;
    PenalizedFit zero;
    zero.coefficients = Vector::Zero(2);
    EXPECT_EQ(compute_residuals(y, x, zero), y);

    PenalizedFit fit;
    fit.intercept = 0.5;
    fit.coefficients = (Vector(2) << 2, -1).finished();
    const Vector exact = (x * fit.coefficients).array() + 0.5;
    EXPECT_LE(compute_residuals(exact, x, fit).cwiseAbs().maxCoeff(), 1e-15);
    const Vector r = compute_residuals(y, x, fit);
    // y - 0.5 - (2 x1 - x2): (1 - 0.5 - 2, -2 - 0.5 + 1, 3 - 0.5 - 3, 0.5 - 0.5 + 5)
    EXPECT_DOUBLE_EQ(r[0], -1.5);
    EXPECT_DOUBLE_EQ(r[1], -1.5);
    EXPECT_DOUBLE_EQ(r[2], -0.5);
    EXPECT_DOUBLE_EQ(r[3], 5.0);
    EXPECT_THROW(compute_residuals(y, x.leftCols(1), fit), DimensionError);
}

TEST(TrimToSize, Examples) {
    Vector scores(6);
    scores << 0.9, 0.2, 0.5, 0.5, 0.1, 0.7;
    const Ranking r = make_ranking(scores, ScreenerSpec{});
    const ModelSet active{{0, 1, 2, 3, 5}, 5};
    EXPECT_EQ(trim_to_size(active, r, 5).indices, active.indices);
    EXPECT_EQ(trim_to_size(active, r, 8).indices, active.indices);
    EXPECT_EQ(trim_to_size(active, r, 3).indices, (IndexList{0, 2, 5}));
    // 2 and 3 tie at the cut; the lower index stays.
    EXPECT_EQ(trim_to_size(active, r, 3).indices.size(), 3u);
    EXPECT_EQ(trim_to_size(ModelSet{{2, 3, 4}, 3}, r, 1).indices, (IndexList{2}));
}

TEST(DefaultIsisD, RoundedRatio) {
    EXPECT_EQ(default_isis_d(54), 13);
    EXPECT_EQ(default_isis_d(100), 21);
    EXPECT_THROW(default_isis_d(1), ArgumentError);
}

TEST(Isis, SingleIterationCollapsesToScreenAndRefit) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        auto f = testutil::screen_fixture(100 + seed, 60, 80, 0.1);
        const Matrix xs = standardize_columns(f.x, StandardizeMode::classical).values;
        IsisConfig cfg;
        cfg.alpha = 0.3;
        cfg.d = 12;
        cfg.schedule = DPrimeSchedule::fixed;
        cfg.fixed_k = 12;
        cfg.max_iter = 1;
        const IsisResult isis = run_dpd_isis(f.y, xs, cfg);
        const SisResult sis = run_dpd_sis(f.y, xs, 0.3, 12, true);
        IndexList sis_model = sis.final_model.indices;
        std::sort(sis_model.begin(), sis_model.end());
        EXPECT_EQ(isis.final_model.indices, sis_model) << seed;
        EXPECT_EQ(isis.iterations.size(), 1u);
        EXPECT_EQ(isis.iterations[0].candidates, sis.screened.indices);
    }
}

TEST(Isis, OrthogonalDesignRecoversDisjointSignals) {
    const Index n = 64, p = 40;
    std::mt19937_64 rng(8);
    std::normal_distribution<double> z;
    Matrix raw(n, p);
    for (Index j = 0; j < p; ++j)
        for (Index i = 0; i < n; ++i) raw(i, j) = z(rng);
    raw.rowwise() -= raw.colwise().mean();
    Matrix q = raw.householderQr().householderQ() * Matrix::Identity(n, p);
    q *= std::sqrt(static_cast<double>(n - 1));
    Vector y(n);
    for (Index i = 0; i < n; ++i) y[i] = 1.0 + 2.0 * (q(i, 0) + q(i, 1) + q(i, 2) + q(i, 3)) + 0.5 * z(rng);
    IsisConfig cfg;
    cfg.d = 8;
    const IsisResult isis = run_dpd_isis(y, q, cfg);
    ASSERT_TRUE(contains_all_active(isis.final_model.indices));
    EXPECT_LE(isis.final_model.indices.size(), 8u);
    // The true slopes dominate whatever noise columns were kept.
    const auto& m = isis.final_model.indices;
    double weakest_true = 1e300, strongest_noise = 0.0;
    for (std::size_t j = 0; j < m.size(); ++j) {
        const double b = std::abs(isis.final_fit.coefficients[static_cast<Index>(j)]);
        if (m[j] < 4) {
            weakest_true = std::min(weakest_true, b);
        } else {
            strongest_noise = std::max(strongest_noise, b);
        }
    }
    EXPECT_GT(weakest_true, 5 * strongest_noise);
    const SisResult sis = run_dpd_sis(y, q, 0.3, 8, true);
    EXPECT_TRUE(contains_all_active(sis.final_model.indices));
}

TEST(Isis, StructuralInvariants) {
    for (std::uint64_t seed : {11u, 12u, 13u, 14u}) {
        auto f = equicorr_fixture(seed, 60, 120, 0.5, 1.0, seed % 2 == 0 ? 0.1 : 0.0);
        const Matrix xs = standardize_columns(f.x, StandardizeMode::classical).values;
        IsisConfig cfg;
        cfg.d = 20;
        cfg.max_iter = 4;
        const IsisResult res = run_dpd_isis(f.y, xs, cfg);
        ASSERT_FALSE(res.iterations.empty());
        EXPECT_LE(res.iterations.size(), 4u);
        for (std::size_t i = 0; i < res.iterations.size(); ++i) {
            const auto& it = res.iterations[i];
            for (Index a : it.active) {
                EXPECT_NE(std::find(it.pool.begin(), it.pool.end(), a), it.pool.end());
            }
            EXPECT_EQ(it.refit.coefficients.size(), static_cast<Index>(it.pool.size()));
            if (i > 0) {
                const auto& prev = res.iterations[i - 1].active;
                for (Index c : it.candidates) {
                    EXPECT_FALSE(std::binary_search(prev.begin(), prev.end(), c)) << "re-screened " << c;
                }
            }
        }
        EXPECT_EQ(res.final_fit.coefficients.size(), static_cast<Index>(res.final_model.indices.size()));
        EXPECT_EQ(support(res.final_fit).size(), res.final_model.indices.size());
        EXPECT_LE(static_cast<Index>(res.final_model.indices.size()), cfg.d);
        EXPECT_TRUE(std::is_sorted(res.final_model.indices.begin(), res.final_model.indices.end()));
    }
}

TEST(Isis, SelectedVariableCanBeDroppedLater) {
    // Strongly correlated design where a covariate active after the first
    // refit leaves the active set once more candidates join the pool.
    auto f = equicorr_fixture(1, 80, 200, 0.8, 1.0, 0.0);
    const Matrix xs = standardize_columns(f.x, StandardizeMode::classical).values;
    IsisConfig cfg;
    cfg.d = 15;
    cfg.max_iter = 5;
    const IsisResult res = run_dpd_isis(f.y, xs, cfg);
    ASSERT_GE(res.iterations.size(), 2u);
    const auto& a1 = res.iterations[0].active;
    const auto& a2 = res.iterations[1].active;
    const bool dropped = std::any_of(a1.begin(), a1.end(),
                                     [&](Index j) { return !std::binary_search(a2.begin(), a2.end(), j); });
    EXPECT_TRUE(dropped);
}

TEST(Isis, Deterministic) {
    auto f = equicorr_fixture(21, 60, 100, 0.5, 2.0, 0.1);
    const Matrix xs = standardize_columns(f.x, StandardizeMode::classical).values;
    IsisConfig cfg;
    cfg.d = 15;
    const IsisResult a = run_dpd_isis(f.y, xs, cfg);
    cfg.threads = 3;
    const IsisResult b = run_dpd_isis(f.y, xs, cfg);
    EXPECT_EQ(a.final_model.indices, b.final_model.indices);
    EXPECT_EQ(a.final_fit.coefficients, b.final_fit.coefficients);
    EXPECT_EQ(a.iterations.size(), b.iterations.size());
    EXPECT_EQ(a.stop_reason, b.stop_reason);
}

TEST(Isis, EquicorrelatedRecoverySmallRun) {
    int hits = 0;
    const int reps = 6;
    for (int r = 0; r < reps; ++r) {
        auto f = equicorr_fixture(500 + r, 100, 200, 0.5, 5.0, 0.0);
        const Matrix xs = standardize_columns(f.x, StandardizeMode::classical).values;
        IsisConfig cfg;
        cfg.d = 99;
        const IsisResult res = run_dpd_isis(f.y, xs, cfg);
        hits += contains_all_active(res.final_model.indices) ? 1 : 0;
    }
    EXPECT_GE(hits, reps - 1);
}

TEST(Isis, ConfigErrors) {
    auto f = testutil::screen_fixture(3, 20, 10, 0.0);
    IsisConfig cfg;
    cfg.d = 0;
    EXPECT_THROW(run_dpd_isis(f.y, f.x, cfg), ArgumentError);
    cfg.d = 5;
    cfg.schedule = DPrimeSchedule::fixed;
    EXPECT_THROW(run_dpd_isis(f.y, f.x, cfg), ArgumentError);
    cfg.fixed_k = 2;
    cfg.max_iter = 0;
    EXPECT_THROW(run_dpd_isis(f.y, f.x, cfg), ArgumentError);
    cfg.max_iter = 2;
    EXPECT_THROW(run_dpd_isis(f.y.head(10), f.x, cfg), DimensionError);
}

TEST(Isis, StopReasonNames) {
    EXPECT_EQ(to_string(StopReason::size_reached), "size_reached");
    EXPECT_EQ(to_string(StopReason::active_set_unchanged), "active_set_unchanged");
    EXPECT_EQ(to_string(StopReason::max_iter), "max_iter");
}
