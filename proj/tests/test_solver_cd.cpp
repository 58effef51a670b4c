#include <random>
#include <gtest/gtest.h>
#include <autolasso/path_eval.hpp>
#include <autolasso/solver_cd.hpp>
#include <autolasso/solver_lars.hpp>
#include "test_util.hpp"

using namespace autolasso;

TEST(SoftThreshold, Examples)
{
    EXPECT_EQ(soft_threshold(2.0, 1.0), 1.0);
    EXPECT_EQ(soft_threshold(-0.5, 1.0), 0.0);
    EXPECT_EQ(soft_threshold(-3.0, 1.0), -2.0);
}

TEST(SoftThreshold, ShrinksTowardZero)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-5, 5), l(0, 3);
    for (int i = 0; i < 1000; ++i) {
        const double z = u(rng), lam = l(rng);
        const double s = soft_threshold(z, lam);
        EXPECT_LE(std::abs(s), std::abs(z));
        EXPECT_TRUE(s == 0.0 || (s > 0) == (z > 0));
    }
}

TEST(LambdaMax, HandExample)
{
    Matrix X(2, 1);
    X << 1, -1;
    Vector y(2);
    y << 2, -2;
    Dataset d = make_raw(X, y);
    d.standardized = true;
    EXPECT_DOUBLE_EQ(lambda_max(d), 2.0);
}

TEST(LambdaMax, DegenerateResponse)
{
    Matrix X(4, 2);
    X << 1, 1, -1, 1, 1, -1, -1, -1;
    Vector y(4);
    y << 1, -1, -1, 1;
    Dataset d = make_raw(X, y);
    d.standardized = true;
    try {
        lambda_max(d);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DegenerateResponse);
    }
}

TEST(LambdaMax, BruteForce)
{
    const auto d = fixtures::gaussian_data(50, 10, 0.2, 9);
    double best = 0.0;
    for (Index j = 0; j < d.p(); ++j) {
        double s = 0.0;
        for (Index i = 0; i < d.n(); ++i) s += d.X(i, j) * d.y[i];
        best = std::max(best, std::abs(s) / d.n());
    }
    EXPECT_NEAR(lambda_max(d), best, 1e-13 * best);
}

TEST(LambdaGrids, MinRule)
{
    EXPECT_EQ(lambda_min_ratio(100, 50), 1e-4);
    EXPECT_EQ(lambda_min_ratio(50, 50), 1e-4);
    EXPECT_EQ(lambda_min_ratio(50, 80), 1e-2);
}

TEST(LambdaGrids, DefaultGrid)
{
    const auto d = fixtures::gaussian_data(100, 50, 0.0, 1);
    const auto g = default_lambda_grid(d);
    ASSERT_EQ(g.size(), 100u);
    EXPECT_EQ(g.values.front(), g.lambda_max);
    EXPECT_NEAR(g.lambda_min_def, 1e-4 * g.lambda_max, 1e-18);
    EXPECT_NEAR(g.values.back(), g.lambda_min_def, 1e-15 * g.lambda_max);
    const double ratio = g.values[1] / g.values[0];
    for (std::size_t i = 1; i + 1 < g.size(); ++i) EXPECT_NEAR(g.values[i + 1] / g.values[i], ratio, 1e-12);

    const auto wide = fixtures::gaussian_data(50, 80, 0.0, 2);
    const auto gw = default_lambda_grid(wide);
    EXPECT_NEAR(gw.lambda_min_def, 1e-2 * gw.lambda_max, 1e-16);
}

TEST(LambdaGrids, ExtendedGrid)
{
    const auto d = fixtures::gaussian_data(60, 20, 0.3, 4);
    const auto base = default_lambda_grid(d);
    const auto same = extended_lambda_grid(d, 100);
    EXPECT_EQ(same.values, base.values);
    const auto ext = extended_lambda_grid(d, 102);
    ASSERT_EQ(ext.size(), 102u);
    EXPECT_NEAR(ext.values[100], base.lambda_min_def * 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(ext.values[101], base.lambda_min_def / 3.0, 1e-15);
    try {
        extended_lambda_grid(d, 99);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InvalidConfig);
    }
}

TEST(LambdaGrids, ExtendedAppendedValuesFromFormula)
{
    // with lambda_min_def = 0.3 the two appended values are 0.2 and 0.1
    LambdaGrid g;
    g.lambda_min_def = 0.3;
    const int m = 2;
    std::vector<double> appended;
    for (int j = m; j >= 1; --j) appended.push_back(g.lambda_min_def * j / (m + 1));
    EXPECT_NEAR(appended[0], 0.2, 1e-15);
    EXPECT_NEAR(appended[1], 0.1, 1e-15);
}

TEST(LambdaGrids, ExtendedAlwaysDecreasingPositive)
{
    const auto d = fixtures::gaussian_data(80, 60, 0.5, 7);
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> n_lambda(100, 120);
    for (int t = 0; t < 1000; ++t) {
        const auto g = extended_lambda_grid(d, n_lambda(rng));
        for (std::size_t i = 0; i + 1 < g.size(); ++i) ASSERT_GT(g.values[i], g.values[i + 1]);
        ASSERT_GT(g.values.back(), 0.0);
    }
}

TEST(FitAtLambda, ZeroAboveLambdaMax)
{
    const auto d = fixtures::gaussian_data(40, 8, 0.4, 3);
    const double lmax = lambda_max(d);
    for (const double lam : {lmax, 2 * lmax}) {
        const auto fit = fit_at_lambda(d, lam, Vector::Zero(d.p()), 1e-7);
        EXPECT_TRUE(fit.beta.isZero(0.0));
        EXPECT_EQ(fit.sweeps, 1);
    }
}

TEST(FitAtLambda, SingleCoordinateClosedForm)
{
    const auto d = fixtures::gaussian_data(30, 1, 0.0, 12);
    const double z = d.X.col(0).dot(d.y) / d.n();
    const double lam = 0.3 * std::abs(z);
    const auto fit = fit_at_lambda(d, lam, Vector::Zero(1), 1e-12);
    EXPECT_NEAR(fit.beta[0], soft_threshold(z, lam), 1e-14);
}

TEST(FitAtLambda, MatchesExactSolution)
{
    const auto d = fixtures::gaussian_data(100, 5, 0.0, 13);
    const auto exact = lars_path(d);
    const double lmax = lambda_max(d);
    for (const double frac : {0.5, 0.1, 0.01}) {
        const auto fit = fit_at_lambda(d, frac * lmax, Vector::Zero(d.p()), 1e-12);
        EXPECT_LE((fit.beta - eval_exact(exact, frac * lmax)).cwiseAbs().maxCoeff(), 1e-6);
    }
}

TEST(FitAtLambda, MonotoneDescent)
{
    const auto d = fixtures::gaussian_data(60, 40, 0.7, 14);
    std::vector<double> trace;
    fit_at_lambda(d, 0.01 * lambda_max(d), Vector::Zero(d.p()), 1e-12, {}, &trace);
    ASSERT_GE(trace.size(), 2u);
    for (std::size_t i = 1; i < trace.size(); ++i) {
        EXPECT_LE(trace[i], trace[i - 1] + 1e-12 * std::abs(trace[i - 1]));
    }
}

TEST(FitAtLambda, KktAtTightThreshold)
{
    for (int seed = 0; seed < 10; ++seed) {
        const auto d = fixtures::gaussian_data(80, 30, 0.0, 150 + seed);
        const double lam = 0.05 * lambda_max(d);
        const auto fit = fit_at_lambda(d, lam, Vector::Zero(d.p()), 1e-16);
        EXPECT_LE(fixtures::kkt_violation(d, fit.beta, lam), 1e-6);
    }
}

// The per-sweep objective rule leaves a KKT residual of order sqrt(tau * D_null).
TEST(FitAtLambda, KktResidualScalesWithThreshold)
{
    for (const double rho : {0.0, 0.5, 0.8}) {
        for (const double tau : {1e-8, 1e-10, 1e-12}) {
            const auto d = fixtures::gaussian_data(80, 30, rho, 15);
            for (const double f : {0.5, 0.05}) {
                const double lam = f * lambda_max(d);
                const auto fit = fit_at_lambda(d, lam, Vector::Zero(d.p()), tau);
                EXPECT_LE(fixtures::kkt_violation(d, fit.beta, lam), 5.0 * std::sqrt(tau * null_deviance(d)));
            }
        }
    }
}

TEST(FitAtLambda, IterationCapIsAnError)
{
    const auto d = fixtures::gaussian_data(60, 40, 0.9, 16);
    CdOptions opt;
    opt.max_sweeps = 1;
    try {
        fit_at_lambda(d, 1e-3 * lambda_max(d), Vector::Zero(d.p()), 1e-14, opt);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::MaxIterationsExceeded);
    }
}

TEST(FitPath, SinglePointGrid)
{
    const auto d = fixtures::gaussian_data(30, 4, 0.0, 17);
    LambdaGrid g;
    g.lambda_max = lambda_max(d);
    g.lambda_min_def = g.lambda_max;
    g.values = {g.lambda_max};
    const auto path = fit_path(d, g, 1e-7);
    ASSERT_EQ(path.coefs.size(), 1u);
    EXPECT_TRUE(path.coefs[0].isZero(0.0));
}

TEST(FitPath, ObjectiveBelowNullModel)
{
    const auto d = fixtures::gaussian_data(50, 20, 0.5, 18);
    const auto g = extended_lambda_grid(d, 150);
    const auto path = fit_path(d, g, 1e-7);
    ASSERT_EQ(path.coefs.size(), g.size());
    EXPECT_TRUE(path.coefs.front().isZero(0.0));
    const Vector zero = Vector::Zero(d.p());
    for (std::size_t k = 0; k < g.size(); ++k) {
        EXPECT_LE(lasso_objective(d, path.coefs[k], g.values[k]), lasso_objective(d, zero, g.values[k]) + 1e-15);
    }
}

TEST(FitPath, ErrorCarriesLambdaIndex)
{
    const auto d = fixtures::gaussian_data(60, 40, 0.9, 19);
    CdOptions opt;
    opt.max_sweeps = 2;
    try {
        fit_path(d, default_lambda_grid(d), 1e-14, opt);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::MaxIterationsExceeded);
        EXPECT_NE(std::string(e.what()).find("lambda index"), std::string::npos);
    }
}

TEST(FitPath, DenseGridMatchesExactPath)
{
    const auto d = fixtures::gaussian_data(200, 50, 0.0, 20);
    const auto g = log_lambda_grid(d, 5e-4, 2000);
    const auto path = fit_path(d, g, 1e-12);
    EXPECT_LT(spe(lars_path(d), path), 1e-4);
}

TEST(FitPath, TighterThresholdHelpsInMedian)
{
    std::vector<double> loose, tight;
    for (int s = 0; s < 20; ++s) {
        const auto d = fixtures::gaussian_data(100, 60, 0.6, 100 + s);
        const auto exact = lars_path(d);
        const auto g = extended_lambda_grid(d, 120);
        loose.push_back(spe(exact, fit_path(d, g, 1e-7)));
        tight.push_back(spe(exact, fit_path(d, g, 1e-9)));
    }
    std::sort(loose.begin(), loose.end());
    std::sort(tight.begin(), tight.end());
    EXPECT_LE(tight[10], loose[10]);
}
