#pragma once
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <vector>
#include <autolasso/model_selection.hpp>
#include <autolasso/surrogate_mlp.hpp>
#include <autolasso/synth_data.hpp>

namespace autolasso {

struct ParetoPoint
{
    SolverConfig config;
    double spe_hat = 0.0;
    double t_hat = 0.0;
    std::size_t index = 0;  // position in the candidate list

    friend bool operator==(const ParetoPoint&, const ParetoPoint&) = default;
};

inline constexpr double tau_sample_lo = 1e-9;
inline constexpr double tau_sample_hi = 1e-7;

/// K configurations: tau log-uniform on [1e-9, 1e-7], n_lambda uniform on
/// the integers [100, 2p].
inline std::vector<SolverConfig> sample_configs(std::size_t K, Index p, std::uint64_t seed)
{
    if (K < 1) {
        throw Error(ErrorKind::InvalidConfig, "need at least one configuration");
    }
    if (2 * p < default_n_lambda) {
        throw Error(ErrorKind::InvalidRange,
                    "n_lambda range [100, 2p] is empty for p = " + std::to_string(p));
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> log_tau(std::log10(tau_sample_lo), std::log10(tau_sample_hi));
    std::uniform_int_distribution<Index> n_lambda(default_n_lambda, 2 * p);
    std::vector<SolverConfig> out(K);
    for (auto& c : out) {
        c.tau = std::clamp(std::pow(10.0, log_tau(rng)), tau_sample_lo, tau_sample_hi);
        c.n_lambda = static_cast<int>(n_lambda(rng));
    }
    return out;
}

/// Points not weakly dominated by a point with a different objective pair,
/// sorted by t_hat. Among equal pairs the lowest index is kept.
inline std::vector<ParetoPoint> pareto_front(const std::vector<ParetoPoint>& points)
{
    std::vector<const ParetoPoint*> order;
    order.reserve(points.size());
    for (const auto& pt : points) order.push_back(&pt);
    std::sort(order.begin(), order.end(), [](const ParetoPoint* a, const ParetoPoint* b) {
        if (a->t_hat != b->t_hat) return a->t_hat < b->t_hat;
        if (a->spe_hat != b->spe_hat) return a->spe_hat < b->spe_hat;
        return a->index < b->index;
    });
    std::vector<ParetoPoint> front;
    for (const auto* pt : order) {
        if (front.empty() || pt->spe_hat < front.back().spe_hat) front.push_back(*pt);
    }
    return front;
}

struct Selection
{
    ParetoPoint point;
    bool budget_infeasible = false;  // no front point is faster than t_hope; point is the fastest one
};

/// Lowest spe_hat among front points with t_hat < t_hope (ties to the
/// faster point); otherwise the fastest point flagged infeasible.
inline Selection select_best(const std::vector<ParetoPoint>& front, double t_hope)
{
    if (front.empty()) {
        throw Error(ErrorKind::InvalidConfig, "empty Pareto front");
    }
    const ParetoPoint* best = nullptr;
    for (const auto& pt : front) {
        if (!(pt.t_hat < t_hope)) continue;
        if (!best || pt.spe_hat < best->spe_hat || (pt.spe_hat == best->spe_hat && pt.t_hat < best->t_hat)) {
            best = &pt;
        }
    }
    if (best) return {*best, false};
    const auto fastest = std::min_element(front.begin(), front.end(), [](const auto& a, const auto& b) {
        return a.t_hat < b.t_hat;
    });
    return {*fastest, true};
}

// ---------------------------------------------------------------------------
// Hardware calibration

/// Fixed coordinate-descent workload (10-fold CV path fit on a seeded
/// N=200, p=100 compound-symmetry problem); returns its wall-clock seconds.
inline double calibration_benchmark()
{
    const Matrix cov = cov_compound_symmetry(100, 0.5);
    const Vector beta = beta_pattern(100, 1, 11);
    const auto sample = sample_dataset(200, cov, beta, 1.0, 12);
    const Dataset data = standardize(sample.train);
    const auto grid = extended_lambda_grid(data, 200);
    const auto start = std::chrono::steady_clock::now();
    for (int rep = 0; rep < 3; ++rep) fit_cd_with_cv(data, grid, 1e-9, 10, 13);
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---------------------------------------------------------------------------
// Tuned fit

enum class SolverChoice
{
    Lars,
    CdTuned,
    CdFallback,
};

inline std::string to_string(SolverChoice c)
{
    switch (c) {
        case SolverChoice::Lars: return "lars";
        case SolverChoice::CdTuned: return "cd_tuned";
        case SolverChoice::CdFallback: return "cd_fallback";
    }
    return "unknown";
}

struct TuneOptions
{
    std::size_t n_configs = 2000;
    int folds = 10;
    int lars_fractions = 100;
    std::uint64_t seed = 0;
    bool calibrate = false;  // rescale predicted times by current / reference benchmark
    bool allow_lars = true;
    CdOptions cd;
    LarsOptions lars;
};

struct TuneResult
{
    SolverChoice choice = SolverChoice::CdTuned;
    double t_hope = 0.0;
    DataFeatures features;
    double t_lars_hat = 0.0;
    double time_scale = 1.0;                 // calibration factor applied to predicted times
    std::vector<ParetoPoint> candidates;     // empty on the LARS branch
    std::vector<ParetoPoint> front;          // ordered by t_hat
    std::optional<ParetoPoint> selected;     // CD branches
    double predicted_seconds = 0.0;          // of the chosen branch
    double fit_seconds = 0.0;                // measured path + CV
    Standardization stats;
    std::optional<SolutionPath> cd_path;
    std::optional<ExactPath> lars_path;
    CvResult cv;                             // lambda (CD) or l1 fraction (LARS)
    Vector coefs;                            // selected, standardized scale
    std::optional<Vector> predictions;       // on new data, when given
    std::vector<std::string> warnings;
};

/// Standardizes `raw`, extracts features from the sample covariance of the
/// standardized predictors, and either runs the exact path (predicted LARS
/// time below t_hope) or the coordinate-descent solver at the configuration
/// chosen from the predicted Pareto front, both with k-fold CV.
inline TuneResult auto_lasso(const Dataset& raw,
                             double t_hope,
                             const MlpModel& perf_model,
                             const MlpModel& lars_model,
                             const TuneOptions& options = {},
                             const Matrix* new_x = nullptr)
{
    if (!(t_hope > 0.0)) {
        throw Error(ErrorKind::InvalidConfig, "t_hope must be positive");
    }
    TuneResult res;
    res.t_hope = t_hope;
    Dataset data;
    try {
        data = standardize(raw);
        res.stats = data.stats;
        res.features = DataFeatures{data.n(), data.p(), eigen_features(sample_covariance(data.X))};
    } catch (const Error& e) {
        rethrow_with_context(e, "feature extraction");
    }

    try {
        detail::require_kind(perf_model, ModelKind::Performance);
        detail::require_kind(lars_model, ModelKind::LarsTime);
        res.t_lars_hat = predict_lars_time(lars_model, res.features);
        if (options.calibrate) {
            if (!perf_model.calibration_seconds || !lars_model.calibration_seconds) {
                res.warnings.push_back("model has no calibration reference; predicted times are not rescaled");
            } else {
                const double now = calibration_benchmark();
                res.time_scale = now / *perf_model.calibration_seconds;
                res.t_lars_hat *= now / *lars_model.calibration_seconds;
            }
        }
        if (options.allow_lars && res.t_lars_hat < t_hope) {
            res.choice = SolverChoice::Lars;
            res.predicted_seconds = res.t_lars_hat;
        } else {
            std::vector<SolverConfig> configs;
            if (2 * data.p() >= default_n_lambda) {
                configs = sample_configs(options.n_configs, data.p(), options.seed);
            } else {
                configs = sample_configs(options.n_configs, default_n_lambda / 2, options.seed);
                for (auto& c : configs) c.n_lambda = default_n_lambda;
                res.warnings.push_back("2p < 100: n_lambda fixed at 100");
            }
            const auto preds = predict_performance_batch(perf_model, res.features, configs);
            res.candidates.reserve(configs.size());
            for (std::size_t k = 0; k < configs.size(); ++k) {
                res.candidates.push_back({configs[k], preds[k].spe, preds[k].t_seconds * res.time_scale, k});
            }
            res.front = pareto_front(res.candidates);
            const auto sel = select_best(res.front, t_hope);
            res.selected = sel.point;
            res.predicted_seconds = sel.point.t_hat;
            res.choice = sel.budget_infeasible ? SolverChoice::CdFallback : SolverChoice::CdTuned;
            if (sel.budget_infeasible) {
                res.warnings.push_back("no configuration is predicted to finish within t_hope; using the fastest one");
            }
        }
    } catch (const Error& e) {
        rethrow_with_context(e, "prediction");
    }

    try {
        const auto start = std::chrono::steady_clock::now();
        const auto cv_seed = derive_seed(options.seed, 1);
        if (res.choice == SolverChoice::Lars) {
            auto fit = fit_lars_with_cv(data, options.folds, options.lars_fractions, cv_seed, options.lars);
            res.lars_path = std::move(fit.path);
            res.cv = std::move(fit.cv);
            res.coefs = std::move(fit.coefs);
        } else {
            const auto grid = extended_lambda_grid(data, res.selected->config.n_lambda);
            auto fit = fit_cd_with_cv(data, grid, res.selected->config.tau, options.folds, cv_seed, options.cd);
            res.cd_path = std::move(fit.path);
            res.cv = std::move(fit.cv);
            res.coefs = std::move(fit.coefs);
        }
        res.fit_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (new_x) res.predictions = predict(res.coefs, res.stats, *new_x);
    } catch (const Error& e) {
        rethrow_with_context(e, "fit");
    }
    return res;
}

/// Fit with a fixed configuration, as the default solver would run.
struct FixedFit
{
    Dataset data;
    CdCvFit fit;
};

inline FixedFit fit_fixed(const Dataset& raw, const SolverConfig& config, int folds, std::uint64_t seed)
{
    config.validate();
    FixedFit out;
    out.data = standardize(raw);
    const auto grid = config.n_lambda == default_n_lambda ? default_lambda_grid(out.data)
                                                          : extended_lambda_grid(out.data, config.n_lambda);
    out.fit = fit_cd_with_cv(out.data, grid, config.tau, folds, seed);
    return out;
}

/// Candidate table as CSV: tau,n_lambda,spe_hat,t_hat,on_front,selected.
inline void write_pareto_csv(const TuneResult& res, const std::string& path)
{
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorKind::Io, "cannot write " + path);
    }
    std::vector<bool> on_front(res.candidates.size(), false);
    for (const auto& pt : res.front) on_front[pt.index] = true;
    out << "tau,n_lambda,spe_hat,t_hat,on_front,selected\n";
    for (const auto& c : res.candidates) {
        const bool selected = res.selected && res.selected->index == c.index;
        out << csv::format_double(c.config.tau) << ',' << c.config.n_lambda << ',' << csv::format_double(c.spe_hat)
            << ',' << csv::format_double(c.t_hat) << ',' << (on_front[c.index] ? 1 : 0) << ',' << (selected ? 1 : 0)
            << '\n';
    }
}

} // namespace autolasso
