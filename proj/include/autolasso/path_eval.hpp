#pragma once
#include <algorithm>
#include <cmath>
#include <functional>
#include <autolasso/solver_cd.hpp>
#include <autolasso/solver_lars.hpp>

namespace autolasso {

/// Reference points for the solution path error.
struct SpeSpec
{
    int k = 20;
    double lambda_start = 0.001;  // absolute, not relative to lambda_max

    void validate() const
    {
        if (k < 2 || !(lambda_start > 0.0)) {
            throw Error(ErrorKind::InvalidConfig, "SPE needs k >= 2 and lambda_start > 0");
        }
    }
};

/// Grid solution at `lam`: linear in lambda between bracketing grid points,
/// zero above the grid, the smallest-lambda solution below it.
inline Vector interpolate(const SolutionPath& path, double lam)
{
    const auto& v = path.grid.values;
    const Index p = path.coefs.front().size();
    if (lam > v.front()) return Vector::Zero(p);
    if (lam <= v.back()) return path.coefs.back();
    const auto it = std::upper_bound(v.begin(), v.end(), lam, std::greater<double>());
    const auto hi = static_cast<std::size_t>(it - v.begin());
    const auto lo = hi - 1;
    if (v[lo] == lam) return path.coefs[lo];
    const double w = (lam - v[hi]) / (v[lo] - v[hi]);
    return w * path.coefs[lo] + (1.0 - w) * path.coefs[hi];
}

/// The k reference lambdas, log-spaced from lambda_max to lambda_start inclusive.
inline std::vector<double> spe_reference_lambdas(double lambda_max, const SpeSpec& spec)
{
    spec.validate();
    if (!(lambda_max > spec.lambda_start)) {
        throw Error(ErrorKind::InvalidRange,
                    "lambda_max " + std::to_string(lambda_max) + " is not above lambda_start "
                    + std::to_string(spec.lambda_start));
    }
    return log_spaced(lambda_max, spec.lambda_start, spec.k);
}

/// Mean over the reference lambdas of ||beta_exact - beta_approx||_2 / sqrt(p).
inline double spe(const ExactPath& exact, const SolutionPath& approx, const SpeSpec& spec = {})
{
    const Index p = exact.p();
    if (approx.coefs.empty() || approx.coefs.front().size() != p) {
        throw Error(ErrorKind::MismatchedProblem, "paths have different numbers of predictors");
    }
    const double lmax = exact.lambda_max();
    if (std::abs(lmax - approx.grid.lambda_max) > 1e-10 * std::max(1.0, lmax)) {
        throw Error(ErrorKind::MismatchedProblem, "paths have different lambda_max");
    }
    const auto refs = spe_reference_lambdas(lmax, spec);
    double total = 0.0;
    for (const double lam : refs) {
        total += (eval_exact(exact, lam) - interpolate(approx, lam)).norm();
    }
    return total / (static_cast<double>(refs.size()) * std::sqrt(static_cast<double>(p)));
}

inline double rmse(const Vector& predictions, const Vector& truth)
{
    if (predictions.size() != truth.size()) {
        throw Error(ErrorKind::LengthMismatch, "rmse inputs differ in length");
    }
    if (truth.size() == 0) return 0.0;
    return std::sqrt((predictions - truth).squaredNorm() / static_cast<double>(truth.size()));
}

} // namespace autolasso
