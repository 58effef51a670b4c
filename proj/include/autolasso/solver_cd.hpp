#pragma once
#include <algorithm>
#include <cassert>
#include <cmath>
#include <string>
#include <vector>
#include <autolasso/dataset.hpp>

namespace autolasso {

/// Number of points in the default log-spaced grid.
inline constexpr int default_n_lambda = 100;

/// The two tunable knobs of the coordinate-descent path solver.
struct SolverConfig
{
    double tau = 1e-7;
    int n_lambda = default_n_lambda;

    void validate() const
    {
        if (!(tau > 0.0) || !std::isfinite(tau)) {
            throw Error(ErrorKind::InvalidConfig, "tau must be positive, got " + std::to_string(tau));
        }
        if (n_lambda < default_n_lambda) {
            throw Error(ErrorKind::InvalidConfig,
                        "n_lambda must be >= 100, got " + std::to_string(n_lambda));
        }
    }

    friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

struct LambdaGrid
{
    std::vector<double> values;    // strictly decreasing, values[0] == lambda_max
    double lambda_max = 0.0;
    double lambda_min_def = 0.0;

    std::size_t size() const { return values.size(); }
};

struct SolutionPath
{
    LambdaGrid grid;
    std::vector<Vector> coefs;     // one per grid value
    std::vector<long> iterations;  // sweeps per grid value
};

struct CdOptions
{
    long max_sweeps = 100000;
};

struct CdFit
{
    Vector beta;
    long sweeps = 0;
};

inline double soft_threshold(double z, double lam)
{
    if (z > lam) return z - lam;
    if (z < -lam) return z + lam;
    return 0.0;
}

/// (1/2N)||y - X beta||^2 + lam ||beta||_1
inline double lasso_objective(const Dataset& data, const Vector& beta, double lam)
{
    const double n = static_cast<double>(data.n());
    return (data.y - data.X * beta).squaredNorm() / (2.0 * n) + lam * beta.lpNorm<1>();
}

/// (1/N)||y||^2 for centered y.
inline double null_deviance(const Dataset& data)
{
    return data.y.squaredNorm() / static_cast<double>(data.n());
}

inline double lambda_max(const Dataset& data)
{
    require_standardized(data);
    const double n = static_cast<double>(data.n());
    // same per-column dot as the coordinate update, so the first CD step at
    // lambda_max thresholds to exactly zero
    double value = 0.0;
    for (Index j = 0; j < data.p(); ++j) {
        value = std::max(value, std::abs(data.X.col(j).dot(data.y) / n));
    }
    if (!(value > 0.0)) {
        throw Error(ErrorKind::DegenerateResponse, "y is orthogonal to every column of X");
    }
    return value;
}

inline double lambda_min_ratio(Index n, Index p)
{
    return n < p ? 1e-2 : 1e-4;
}

/// `count` log-spaced values from `hi` down to `lo`, both inclusive.
inline std::vector<double> log_spaced(double hi, double lo, int count)
{
    std::vector<double> out(static_cast<std::size_t>(count));
    if (count == 1) {
        out[0] = hi;
        return out;
    }
    const double log_hi = std::log(hi);
    const double step = (std::log(lo) - log_hi) / (count - 1);
    for (int i = 0; i < count; ++i) out[i] = std::exp(log_hi + step * i);
    out[0] = hi;
    out[count - 1] = lo;
    return out;
}

/// A log grid between `lambda_max` and an arbitrary lower end. Used for
/// dense reference grids; `lambda_min_def` is still filled with the
/// default rule so the grid carries the same metadata as the standard ones.
inline LambdaGrid log_lambda_grid(const Dataset& data, double lambda_lo, int count)
{
    LambdaGrid grid;
    grid.lambda_max = lambda_max(data);
    grid.lambda_min_def = lambda_min_ratio(data.n(), data.p()) * grid.lambda_max;
    if (!(lambda_lo > 0.0 && lambda_lo < grid.lambda_max) || count < 2) {
        throw Error(ErrorKind::InvalidConfig, "log grid needs 0 < lower end < lambda_max and count >= 2");
    }
    grid.values = log_spaced(grid.lambda_max, lambda_lo, count);
    return grid;
}

inline LambdaGrid default_lambda_grid(const Dataset& data)
{
    LambdaGrid grid;
    grid.lambda_max = lambda_max(data);
    grid.lambda_min_def = lambda_min_ratio(data.n(), data.p()) * grid.lambda_max;
    grid.values = log_spaced(grid.lambda_max, grid.lambda_min_def, default_n_lambda);
    return grid;
}

/// Default grid followed by m = n_lambda - 100 points
/// lambda_min_def * j / (m + 1), j = m..1, i.e. evenly spaced on the open
/// interval (0, lambda_min_def).
inline LambdaGrid extended_lambda_grid(const Dataset& data, int n_lambda)
{
    if (n_lambda < default_n_lambda) {
        throw Error(ErrorKind::InvalidConfig,
                    "n_lambda must be >= 100, got " + std::to_string(n_lambda));
    }
    auto grid = default_lambda_grid(data);
    const int m = n_lambda - default_n_lambda;
    grid.values.reserve(static_cast<std::size_t>(n_lambda));
    for (int j = m; j >= 1; --j) {
        grid.values.push_back(grid.lambda_min_def * j / (m + 1));
    }
    return grid;
}

/// Cyclic coordinate descent at a single lambda, starting from `init`.
/// Stops after the first full sweep whose objective decrease is below
/// tau * null_deviance. `trace`, when given, receives the objective after
/// every sweep (entry 0 is the starting objective).
inline CdFit fit_at_lambda(const Dataset& data,
                           double lam,
                           const Vector& init,
                           double tau,
                           const CdOptions& options = {},
                           std::vector<double>* trace = nullptr)
{
    require_standardized(data);
    if (init.size() != data.p()) {
        throw Error(ErrorKind::DimensionMismatch, "init has wrong length");
    }
    if (!(lam >= 0.0) || !(tau > 0.0)) {
        throw Error(ErrorKind::InvalidConfig, "need lam >= 0 and tau > 0");
    }
    const auto& X = data.X;
    const double n = static_cast<double>(data.n());
    const double threshold = tau * null_deviance(data);

    CdFit fit;
    fit.beta = init;
    Vector r = data.y - X * fit.beta;
    double l1 = fit.beta.lpNorm<1>();
    double objective = r.squaredNorm() / (2.0 * n) + lam * l1;
    if (trace) trace->push_back(objective);

    for (long sweep = 1; sweep <= options.max_sweeps; ++sweep) {
        for (Index j = 0; j < data.p(); ++j) {
            const double old = fit.beta[j];
            const double z = X.col(j).dot(r) / n + old;
            const double updated = soft_threshold(z, lam);
            if (updated != old) {
                r.noalias() -= (updated - old) * X.col(j);
                fit.beta[j] = updated;
            }
        }
        l1 = fit.beta.lpNorm<1>();
        const double next = r.squaredNorm() / (2.0 * n) + lam * l1;
        if (trace) trace->push_back(next);
        assert(next <= objective + 1e-12 * std::abs(objective) + 1e-300);
        const double decrease = objective - next;
        objective = next;
        if (decrease < threshold) {
            fit.sweeps = sweep;
            return fit;
        }
    }
    throw Error(ErrorKind::MaxIterationsExceeded,
                "no convergence after " + std::to_string(options.max_sweeps) + " sweeps at lambda "
                + std::to_string(lam));
}

/// Warm-started path over `grid` in decreasing-lambda order.
inline SolutionPath fit_path(const Dataset& data,
                             const LambdaGrid& grid,
                             double tau,
                             const CdOptions& options = {})
{
    SolutionPath path;
    path.grid = grid;
    path.coefs.reserve(grid.size());
    path.iterations.reserve(grid.size());
    Vector beta = Vector::Zero(data.p());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        try {
            auto fit = fit_at_lambda(data, grid.values[k], beta, tau, options);
            beta = std::move(fit.beta);
            path.coefs.push_back(beta);
            path.iterations.push_back(fit.sweeps);
        } catch (const Error& e) {
            rethrow_with_context(e, "lambda index " + std::to_string(k));
        }
    }
    return path;
}

} // namespace autolasso
