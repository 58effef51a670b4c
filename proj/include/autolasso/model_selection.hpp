#pragma once
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>
#include <autolasso/dataset.hpp>
#include <autolasso/path_eval.hpp>
#include <autolasso/solver_cd.hpp>
#include <autolasso/solver_lars.hpp>

namespace autolasso {

struct CvResult
{
    std::vector<double> grid;        // lambda values (CD) or l1 fractions (LARS)
    std::vector<double> mean_error;  // pooled held-out MSE per grid value
    std::vector<double> std_error;   // standard error of the per-fold MSEs
    std::size_t selected_index = 0;
    double selected = 0.0;

    friend bool operator==(const CvResult&, const CvResult&) = default;
};

/// Standardizes `newX` with the training statistics, applies the
/// standardized-scale coefficients and adds back the response mean.
inline Vector predict(const Vector& coefs, const Standardization& stats, const Matrix& newX)
{
    if (coefs.size() != stats.x_means.size()) {
        throw Error(ErrorKind::DimensionMismatch, "coefficient length does not match the training data");
    }
    const Matrix Z = apply_standardization(stats, newX);
    return (Z * coefs).array() + stats.y_mean;
}

/// Fold index (0..folds-1) of every row; a seeded shuffle dealt round-robin.
inline std::vector<int> fold_assignment(Index n, int folds, std::uint64_t seed)
{
    if (folds < 2 || n < folds) {
        throw Error(ErrorKind::InvalidConfig,
                    "need 2 <= folds <= N (folds = " + std::to_string(folds) + ", N = " + std::to_string(n) + ")");
    }
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> fold(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < order.size(); ++i) {
        fold[static_cast<std::size_t>(order[i])] = static_cast<int>(i % static_cast<std::size_t>(folds));
    }
    return fold;
}

namespace detail {

struct FoldSplit
{
    Dataset train;   // standardized with the fold's own statistics
    Matrix X_held;
    Vector y_held;
};

inline FoldSplit split_fold(const Dataset& data, const std::vector<int>& fold, int k)
{
    const auto held = static_cast<Index>(std::count(fold.begin(), fold.end(), k));
    const Index kept = data.n() - held;
    Matrix Xt(kept, data.p()), Xh(held, data.p());
    Vector yt(kept), yh(held);
    Index it = 0, ih = 0;
    for (Index i = 0; i < data.n(); ++i) {
        if (fold[static_cast<std::size_t>(i)] == k) {
            Xh.row(ih) = data.X.row(i);
            yh[ih++] = data.y[i];
        } else {
            Xt.row(it) = data.X.row(i);
            yt[it++] = data.y[i];
        }
    }
    FoldSplit s;
    s.train = standardize(make_raw(std::move(Xt), std::move(yt)));
    s.X_held = std::move(Xh);
    s.y_held = std::move(yh);
    return s;
}

/// Aggregates per-fold squared-error sums into pooled means and standard
/// errors, then picks the first minimizer along `grid`.
inline CvResult summarize_cv(std::vector<double> grid,
                             const std::vector<std::vector<double>>& fold_sse,
                             const std::vector<Index>& fold_sizes)
{
    const auto m = grid.size();
    const auto folds = fold_sse.size();
    double total_n = 0.0;
    for (const auto s : fold_sizes) total_n += static_cast<double>(s);

    CvResult cv;
    cv.grid = std::move(grid);
    cv.mean_error.assign(m, 0.0);
    cv.std_error.assign(m, 0.0);
    for (std::size_t g = 0; g < m; ++g) {
        double sse = 0.0;
        for (std::size_t f = 0; f < folds; ++f) sse += fold_sse[f][g];
        const double mean = sse / total_n;
        double var = 0.0;
        for (std::size_t f = 0; f < folds; ++f) {
            const double mse = fold_sse[f][g] / static_cast<double>(fold_sizes[f]);
            var += (mse - mean) * (mse - mean);
        }
        var /= static_cast<double>(folds > 1 ? folds - 1 : 1);
        cv.mean_error[g] = mean;
        cv.std_error[g] = std::sqrt(var / static_cast<double>(folds));
    }
    // strict comparison keeps the earliest grid value on ties
    std::size_t best = 0;
    for (std::size_t g = 1; g < m; ++g) {
        if (cv.mean_error[g] < cv.mean_error[best]) best = g;
    }
    cv.selected_index = best;
    cv.selected = cv.grid[best];
    return cv;
}

} // namespace detail

/// k-fold CV of the coordinate-descent path over a fixed lambda grid.
/// Ties in mean error go to the larger lambda.
inline CvResult kfold_cv_cd(const Dataset& data,
                            const LambdaGrid& grid,
                            double tau,
                            int folds,
                            std::uint64_t seed,
                            const CdOptions& options = {})
{
    require_standardized(data);
    const auto fold = fold_assignment(data.n(), folds, seed);
    std::vector<std::vector<double>> fold_sse(static_cast<std::size_t>(folds));
    std::vector<Index> fold_sizes(static_cast<std::size_t>(folds));
    for (int k = 0; k < folds; ++k) {
        try {
            const auto split = detail::split_fold(data, fold, k);
            const auto path = fit_path(split.train, grid, tau, options);
            auto& sse = fold_sse[static_cast<std::size_t>(k)];
            sse.reserve(grid.size());
            for (const auto& coefs : path.coefs) {
                const Vector pred = predict(coefs, split.train.stats, split.X_held);
                sse.push_back((pred - split.y_held).squaredNorm());
            }
            fold_sizes[static_cast<std::size_t>(k)] = split.y_held.size();
        } catch (const Error& e) {
            rethrow_with_context(e, "fold " + std::to_string(k));
        }
    }
    return detail::summarize_cv(grid.values, fold_sse, fold_sizes);
}

/// Coefficients where ||beta||_1 equals `fraction` of the largest l1 norm
/// along the path. The l1 norm is linear in lambda within a segment, so
/// linear interpolation between knots is exact.
inline Vector coefs_at_fraction(const ExactPath& path, double fraction)
{
    const auto count = path.knots.size();
    std::vector<double> norms(count);
    for (std::size_t k = 0; k < count; ++k) norms[k] = path.knot_coefs[k].lpNorm<1>();
    const double max_norm = *std::max_element(norms.begin(), norms.end());
    if (max_norm == 0.0 || fraction <= 0.0) return Vector::Zero(path.p());
    const double target = std::min(fraction, 1.0) * max_norm;
    for (std::size_t k = 0; k + 1 < count; ++k) {
        const double lo = norms[k], hi = norms[k + 1];
        if (target >= std::min(lo, hi) && target <= std::max(lo, hi)) {
            if (hi == lo) return path.knot_coefs[k + 1];
            const double w = (target - lo) / (hi - lo);
            return (1.0 - w) * path.knot_coefs[k] + w * path.knot_coefs[k + 1];
        }
    }
    const auto argmax = static_cast<std::size_t>(std::max_element(norms.begin(), norms.end()) - norms.begin());
    return path.knot_coefs[argmax];
}

inline std::vector<double> fraction_grid(int n_fractions)
{
    if (n_fractions < 2) {
        throw Error(ErrorKind::InvalidConfig, "need at least two fractions");
    }
    std::vector<double> s(static_cast<std::size_t>(n_fractions));
    for (int i = 0; i < n_fractions; ++i) s[i] = static_cast<double>(i) / (n_fractions - 1);
    return s;
}

/// k-fold CV of the exact path over evenly spaced l1 fractions in [0, 1].
/// Ties go to the smaller fraction.
inline CvResult kfold_cv_lars(const Dataset& data,
                              int folds,
                              int n_fractions,
                              std::uint64_t seed,
                              const LarsOptions& options = {})
{
    require_standardized(data);
    const auto fractions = fraction_grid(n_fractions);
    const auto fold = fold_assignment(data.n(), folds, seed);
    std::vector<std::vector<double>> fold_sse(static_cast<std::size_t>(folds));
    std::vector<Index> fold_sizes(static_cast<std::size_t>(folds));
    for (int k = 0; k < folds; ++k) {
        try {
            const auto split = detail::split_fold(data, fold, k);
            const auto path = lars_path(split.train, options);
            auto& sse = fold_sse[static_cast<std::size_t>(k)];
            sse.reserve(fractions.size());
            for (const double s : fractions) {
                const Vector pred = predict(coefs_at_fraction(path, s), split.train.stats, split.X_held);
                sse.push_back((pred - split.y_held).squaredNorm());
            }
            fold_sizes[static_cast<std::size_t>(k)] = split.y_held.size();
        } catch (const Error& e) {
            rethrow_with_context(e, "fold " + std::to_string(k));
        }
    }
    return detail::summarize_cv(fractions, fold_sse, fold_sizes);
}

/// Full-data path plus CV selection; `coefs` is the selected solution on
/// the standardized scale of `data`.
struct CdCvFit
{
    SolutionPath path;
    CvResult cv;
    Vector coefs;
};

struct LarsCvFit
{
    ExactPath path;
    CvResult cv;
    Vector coefs;
};

inline CdCvFit fit_cd_with_cv(const Dataset& data,
                              const LambdaGrid& grid,
                              double tau,
                              int folds,
                              std::uint64_t seed,
                              const CdOptions& options = {})
{
    CdCvFit out;
    out.cv = kfold_cv_cd(data, grid, tau, folds, seed, options);
    out.path = fit_path(data, grid, tau, options);
    out.coefs = out.path.coefs[out.cv.selected_index];
    return out;
}

inline LarsCvFit fit_lars_with_cv(const Dataset& data,
                                  int folds,
                                  int n_fractions,
                                  std::uint64_t seed,
                                  const LarsOptions& options = {})
{
    LarsCvFit out;
    out.cv = kfold_cv_lars(data, folds, n_fractions, seed, options);
    out.path = lars_path(data, options);
    out.coefs = coefs_at_fraction(out.path, out.cv.selected);
    return out;
}

} // namespace autolasso
