#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <gtest/gtest.h>
#include <autolasso/pareto_tuner.hpp>
#include "test_util.hpp"

using namespace autolasso;
using fixtures::constant_lars;
using fixtures::constant_perf;

namespace {

ParetoPoint pt(double t, double s, std::size_t i)
{
    return ParetoPoint{SolverConfig{1e-8, 100 + static_cast<int>(i)}, s, t, i};
}

/// Perf model whose predicted time grows with n_lambda and SPE shrinks with
/// it, over the n_lambda range of p = 60.
MlpModel tradeoff_perf()
{
    auto m = init_model(ModelKind::Performance, {14, 1, 2}, 0);
    for (auto& w : m.weights) w.setZero();
    m.weights[0](0, 13) = 1.0;
    m.weights[1](0, 0) = -1.0;
    m.weights[1](1, 0) = 1.0;
    m.input.shift[13] = std::log(110.0);
    m.input.scale[13] = 0.1;
    return m;
}

std::vector<ParetoPoint> brute_force_front(const std::vector<ParetoPoint>& pts)
{
    std::vector<ParetoPoint> out;
    for (const auto& a : pts) {
        bool dominated = false;
        for (const auto& b : pts) {
            const bool distinct = a.t_hat != b.t_hat || a.spe_hat != b.spe_hat;
            if (distinct && b.t_hat <= a.t_hat && b.spe_hat <= a.spe_hat) dominated = true;
        }
        if (dominated) continue;
        const bool dup = std::any_of(out.begin(), out.end(), [&](const ParetoPoint& o) {
            return o.t_hat == a.t_hat && o.spe_hat == a.spe_hat;
        });
        if (!dup) out.push_back(a);
    }
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.t_hat < y.t_hat; });
    return out;
}

} // namespace

TEST(SampleConfigs, Ranges)
{
    const auto cs = sample_configs(5000, 80, 1);
    ASSERT_EQ(cs.size(), 5000u);
    int lo = 200, hi = 0;
    for (const auto& c : cs) {
        EXPECT_GE(c.tau, 1e-9);
        EXPECT_LE(c.tau, 1e-7);
        lo = std::min(lo, c.n_lambda);
        hi = std::max(hi, c.n_lambda);
    }
    EXPECT_EQ(lo, 100);
    EXPECT_EQ(hi, 160);
    EXPECT_EQ(sample_configs(1, 80, 1).size(), 1u);
    EXPECT_EQ(sample_configs(10, 80, 4), sample_configs(10, 80, 4));
}

TEST(SampleConfigs, InvalidRange)
{
    try {
        sample_configs(10, 49, 0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InvalidRange);
    }
    EXPECT_NO_THROW(sample_configs(10, 50, 0));
}

TEST(SampleConfigs, LogTauUniform)
{
    const auto cs = sample_configs(100000, 100, 2);
    std::vector<double> x;
    for (const auto& c : cs) x.push_back(std::log10(c.tau));
    std::sort(x.begin(), x.end());
    double gap = 0.0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double cdf = (x[i] + 9.0) / 2.0;
        gap = std::max({gap, std::abs(cdf - i / n), std::abs(cdf - (i + 1) / n)});
    }
    EXPECT_LT(gap, 0.01);
}

TEST(Front, Example)
{
    const auto f = pareto_front({pt(5, 1, 0), pt(3, 2, 1), pt(4, 3, 2)});
    ASSERT_EQ(f.size(), 2u);
    EXPECT_EQ(f[0].index, 1u);
    EXPECT_EQ(f[1].index, 0u);
    const auto single = pareto_front({pt(2, 2, 7)});
    ASSERT_EQ(single.size(), 1u);
    EXPECT_EQ(single[0], pt(2, 2, 7));
}

TEST(Front, DuplicatesKeepLowestIndex)
{
    const auto f = pareto_front({pt(3, 2, 4), pt(3, 2, 1), pt(3, 2, 9)});
    ASSERT_EQ(f.size(), 1u);
    EXPECT_EQ(f[0].index, 1u);
}

TEST(Front, MatchesBruteForce)
{
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> coarse(1, 30);
    std::uniform_real_distribution<double> fine(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t K = trial < 10 ? 1000 : 2000;
        std::vector<ParetoPoint> pts;
        for (std::size_t i = 0; i < K; ++i) {
            // coarse values create ties on one or both objectives
            const bool tie = trial % 2;
            pts.push_back(pt(tie ? coarse(rng) : fine(rng), tie ? coarse(rng) : fine(rng), i));
        }
        const auto fast = pareto_front(pts);
        const auto slow = brute_force_front(pts);
        ASSERT_EQ(fast.size(), slow.size());
        for (std::size_t i = 0; i < fast.size(); ++i) {
            EXPECT_EQ(fast[i].t_hat, slow[i].t_hat);
            EXPECT_EQ(fast[i].spe_hat, slow[i].spe_hat);
        }
    }
}

TEST(Select, Examples)
{
    const auto f = pareto_front({pt(5, 1, 0), pt(3, 2, 1), pt(4, 3, 2)});
    auto s = select_best(f, 4);
    EXPECT_FALSE(s.budget_infeasible);
    EXPECT_EQ(s.point.index, 1u);
    s = select_best(f, 10);
    EXPECT_EQ(s.point.index, 0u);
    s = select_best(f, 2);
    EXPECT_TRUE(s.budget_infeasible);
    EXPECT_EQ(s.point.index, 1u);
    s = select_best(f, 5);  // strict budget
    EXPECT_EQ(s.point.index, 1u);
}

TEST(Select, FeasibilityAndScaleInvariance)
{
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.01, 10.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<ParetoPoint> pts;
        for (std::size_t i = 0; i < 300; ++i) pts.push_back(pt(u(rng), u(rng), i));
        const auto f = pareto_front(pts);
        const double t_hope = u(rng);
        const auto s = select_best(f, t_hope);
        if (!s.budget_infeasible) {
            EXPECT_LT(s.point.t_hat, t_hope);
            for (const auto& q : f)
                if (q.t_hat < t_hope) EXPECT_GE(q.spe_hat, s.point.spe_hat);
        }
        const double c = 0.5 + u(rng);
        auto scaled = pts;
        for (auto& q : scaled) q.t_hat *= c;
        const auto s2 = select_best(pareto_front(scaled), t_hope * c);
        EXPECT_EQ(s2.point.index, s.point.index);
        EXPECT_EQ(s2.budget_infeasible, s.budget_infeasible);
    }
}

TEST(AutoLasso, TinyProblemTakesLars)
{
    const auto d = fixtures::gaussian_data(50, 20, 0.5, 1);
    const auto res = auto_lasso(make_raw(d.X, d.y), 20.0, constant_perf(0.01, 1.0), constant_lars(1e-3));
    EXPECT_EQ(res.choice, SolverChoice::Lars);
    ASSERT_TRUE(res.lars_path.has_value());
    const auto data = standardize(make_raw(d.X, d.y));
    for (std::size_t k = 0; k < res.lars_path->knots.size(); ++k) {
        if (res.lars_path->knots[k] <= 0.0) continue;
        EXPECT_LE(fixtures::kkt_violation(data, res.lars_path->knot_coefs[k], res.lars_path->knots[k]), 1e-8);
    }
    EXPECT_TRUE(res.candidates.empty());
    EXPECT_EQ(res.coefs.size(), 20);
}

TEST(AutoLasso, TradeoffSelectsWithinBudget)
{
    const auto d = fixtures::gaussian_data(120, 60, 0.5, 2);
    const auto raw = make_raw(d.X, d.y);
    // t_hat = exp(swish(z)), spe_hat = exp(-swish(z)) with z the standardized log n_lambda
    const auto res = auto_lasso(raw, 1.0, tradeoff_perf(), constant_lars(100.0));
    EXPECT_EQ(res.choice, SolverChoice::CdTuned);
    ASSERT_TRUE(res.selected.has_value());
    EXPECT_LT(res.selected->t_hat, 1.0);
    for (const auto& c : res.candidates)
        if (c.t_hat < 1.0) EXPECT_GE(c.spe_hat, res.selected->spe_hat);
    EXPECT_TRUE(std::find(res.front.begin(), res.front.end(), *res.selected) != res.front.end());
    EXPECT_EQ(res.cd_path->grid.size(), static_cast<std::size_t>(res.selected->config.n_lambda));
    const auto again = auto_lasso(raw, 1.0, tradeoff_perf(), constant_lars(100.0));
    EXPECT_EQ(again.selected, res.selected);
    EXPECT_EQ(again.coefs, res.coefs);
}

TEST(AutoLasso, BudgetInfeasibleFallsBack)
{
    const auto d = fixtures::gaussian_data(80, 60, 0.3, 3);
    const auto res = auto_lasso(make_raw(d.X, d.y), 20.0, constant_perf(0.01, 100.0), constant_lars(1000.0));
    EXPECT_EQ(res.choice, SolverChoice::CdFallback);
    EXPECT_FALSE(res.warnings.empty());
    EXPECT_EQ(res.predicted_seconds, res.selected->t_hat);
}

TEST(AutoLasso, NarrowDataFixesGridSize)
{
    const auto d = fixtures::gaussian_data(80, 20, 0.3, 4);
    TuneOptions opt;
    opt.allow_lars = false;
    opt.n_configs = 50;
    const auto res = auto_lasso(make_raw(d.X, d.y), 20.0, constant_perf(0.01, 1.0), constant_lars(1e-3), opt);
    EXPECT_EQ(res.choice, SolverChoice::CdTuned);
    EXPECT_EQ(res.selected->config.n_lambda, 100);
    EXPECT_FALSE(res.warnings.empty());
}

TEST(AutoLasso, PredictionsAndStageLabels)
{
    const auto d = fixtures::gaussian_data(60, 10, 0.3, 5);
    const Matrix new_x = d.X.topRows(7);
    const auto res = auto_lasso(make_raw(d.X, d.y), 20.0, constant_perf(0.01, 1.0), constant_lars(1e-3), {}, &new_x);
    ASSERT_TRUE(res.predictions.has_value());
    EXPECT_EQ(res.predictions->size(), 7);
    try {
        auto_lasso(make_raw(d.X, d.y), 20.0, constant_lars(1.0), constant_lars(1e-3));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::WrongModelKind);
        EXPECT_NE(std::string(e.what()).find("prediction"), std::string::npos);
    }
    Matrix bad = d.X;
    bad.col(3).setConstant(2.0);
    try {
        auto_lasso(make_raw(bad, d.y), 20.0, constant_perf(0.01, 1.0), constant_lars(1e-3));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ZeroVarianceColumn);
        EXPECT_NE(std::string(e.what()).find("feature extraction"), std::string::npos);
    }
}

TEST(ParetoCsv, MarksFrontAndSelection)
{
    const auto d = fixtures::gaussian_data(120, 60, 0.5, 6);
    TuneOptions opt;
    opt.n_configs = 200;
    const auto res = auto_lasso(make_raw(d.X, d.y), 1.0, tradeoff_perf(), constant_lars(100.0), opt);
    const auto path = (std::filesystem::temp_directory_path() / "autolasso_pareto.csv").string();
    write_pareto_csv(res, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "tau,n_lambda,spe_hat,t_hat,on_front,selected");
    int rows = 0, front = 0, selected = 0;
    while (std::getline(in, line)) {
        ++rows;
        front += line[line.size() - 3] == '1';
        selected += line.back() == '1';
    }
    EXPECT_EQ(rows, 200);
    EXPECT_EQ(front, static_cast<int>(res.front.size()));
    EXPECT_EQ(selected, 1);
    std::filesystem::remove(path);
}
