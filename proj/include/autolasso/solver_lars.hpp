#pragma once
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>
#include <autolasso/dataset.hpp>
#include <autolasso/solver_cd.hpp>

namespace autolasso {

/// Knot representation of the exact lasso path. Coefficients are linear in
/// lambda between consecutive knots.
struct ExactPath
{
    std::vector<double> knots;                 // strictly decreasing, knots[0] = lambda_max
    std::vector<Vector> knot_coefs;
    std::vector<std::vector<Index>> active_sets;  // sorted, active set leaving each knot

    double lambda_max() const { return knots.front(); }
    Index p() const { return knot_coefs.front().size(); }
};

namespace detail {

/// Lower-triangular Cholesky factor of the active Gram matrix, updated in
/// place as variables enter and leave.
class ActiveCholesky
{
public:
    explicit ActiveCholesky(Index capacity) : L_(capacity, capacity) {}

    Index size() const { return m_; }

    /// Appends a variable given its cross products with the current active
    /// columns and its own squared norm.
    void add(const Vector& cross, double diag, double tol)
    {
        Vector w = cross;
        if (m_ > 0) {
            L_.topLeftCorner(m_, m_).triangularView<Eigen::Lower>().solveInPlace(w);
        }
        const double d2 = diag - (m_ > 0 ? w.squaredNorm() : 0.0);
        if (!(d2 > tol * diag)) {
            throw Error(ErrorKind::SingularGram,
                        "active Gram matrix not invertible (pivot " + std::to_string(d2) + ")");
        }
        if (m_ > 0) L_.row(m_).head(m_) = w.transpose();
        L_(m_, m_) = std::sqrt(d2);
        ++m_;
    }

    /// Removes position k and restores triangularity with Givens rotations.
    void remove(Index k)
    {
        for (Index i = k; i + 1 < m_; ++i) {
            L_.row(i).head(m_) = L_.row(i + 1).head(m_);
        }
        --m_;
        for (Index i = k; i < m_; ++i) {
            const double a = L_(i, i);
            const double b = L_(i, i + 1);
            const double r = std::hypot(a, b);
            const double c = a / r;
            const double s = b / r;
            for (Index t = i; t < m_; ++t) {
                const double x = L_(t, i);
                const double y = L_(t, i + 1);
                L_(t, i) = c * x + s * y;
                L_(t, i + 1) = -s * x + c * y;
            }
        }
        for (Index t = 0; t <= m_ && t < L_.rows(); ++t) {
            if (m_ < L_.cols()) L_(t, m_) = 0.0;
        }
    }

    /// Solves (L L^T) x = rhs.
    Vector solve(const Vector& rhs) const
    {
        Vector x = rhs;
        const auto L = L_.topLeftCorner(m_, m_);
        L.triangularView<Eigen::Lower>().solveInPlace(x);
        L.transpose().triangularView<Eigen::Upper>().solveInPlace(x);
        return x;
    }

private:
    Matrix L_;
    Index m_ = 0;
};

} // namespace detail

struct LarsOptions
{
    double gram_tolerance = 1e-12;
    double tie_tolerance = 1e-12;
};

/// Exact lasso path by least angle regression with the lasso modification.
/// Works on the (1/2N) objective: along the path every active variable has
/// |(1/N) X_j^T r| = lambda.
inline ExactPath lars_path(const Dataset& data, const LarsOptions& options = {})
{
    require_standardized(data);
    if (!all_finite(data.X, data.y)) {
        throw Error(ErrorKind::NonFiniteInput, "dataset contains NaN or Inf");
    }
    const auto& X = data.X;
    const Index N = data.n();
    const Index p = data.p();
    const double n = static_cast<double>(N);
    // centered data has rank at most N - 1
    const Index max_active = std::min<Index>(N - 1, p);

    Vector c0(p);
    for (Index j = 0; j < p; ++j) c0[j] = X.col(j).dot(data.y) / n;
    const double lmax = lambda_max(data);

    std::vector<Index> active;
    std::vector<double> signs;
    std::vector<char> is_active(static_cast<std::size_t>(p), 0);
    detail::ActiveCholesky chol(max_active);

    auto add_variable = [&](Index j, double sign) {
        Vector cross(static_cast<Index>(active.size()));
        for (std::size_t a = 0; a < active.size(); ++a) {
            cross[static_cast<Index>(a)] = X.col(active[a]).dot(X.col(j)) / n;
        }
        chol.add(cross, X.col(j).squaredNorm() / n, options.gram_tolerance);
        active.push_back(j);
        signs.push_back(sign);
        is_active[static_cast<std::size_t>(j)] = 1;
    };
    auto remove_variable = [&](std::size_t pos) {
        is_active[static_cast<std::size_t>(active[pos])] = 0;
        chol.remove(static_cast<Index>(pos));
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(pos));
        signs.erase(signs.begin() + static_cast<std::ptrdiff_t>(pos));
    };
    auto sign_vector = [&] {
        Vector s(static_cast<Index>(signs.size()));
        for (std::size_t a = 0; a < signs.size(); ++a) s[static_cast<Index>(a)] = signs[a];
        return s;
    };
    // beta_A(lambda) = G_A^{-1} (c0_A - lambda s_A) for fixed active set and signs
    auto solve_beta = [&](double lam) {
        Vector beta = Vector::Zero(p);
        if (active.empty()) return beta;
        Vector rhs(static_cast<Index>(active.size()));
        for (std::size_t a = 0; a < active.size(); ++a) {
            rhs[static_cast<Index>(a)] = c0[active[a]] - lam * signs[a];
        }
        const Vector b = chol.solve(rhs);
        for (std::size_t a = 0; a < active.size(); ++a) beta[active[a]] = b[static_cast<Index>(a)];
        return beta;
    };
    auto sorted_active = [&] {
        auto s = active;
        std::sort(s.begin(), s.end());
        return s;
    };

    ExactPath path;
    // every variable tied with the maximum enters at the first knot, lowest index first
    for (Index j = 0; j < p; ++j) {
        if (std::abs(c0[j]) >= lmax * (1.0 - options.tie_tolerance)
            && static_cast<Index>(active.size()) < max_active) {
            add_variable(j, c0[j] > 0 ? 1.0 : -1.0);
        }
    }
    double lam = lmax;
    Vector beta = Vector::Zero(p);
    path.knots.push_back(lam);
    path.knot_coefs.push_back(beta);
    path.active_sets.push_back(sorted_active());

    Index just_dropped = -1;
    Index just_added = -1;
    const long max_steps = 20 * (static_cast<long>(p) + static_cast<long>(N)) + 100;
    for (long step = 0; step < max_steps && lam > 0.0; ++step) {
        const Vector r = data.y - X * beta;
        const Vector c = X.transpose() * r / n;
        const Vector s = sign_vector();
        const Vector d_active = chol.solve(s);
        Vector u = Vector::Zero(N);
        for (std::size_t a = 0; a < active.size(); ++a) {
            u.noalias() += d_active[static_cast<Index>(a)] * X.col(active[a]);
        }
        const Vector a_all = X.transpose() * u / n;

        // candidate step lengths in lambda, measured downward
        const double noise = 1e-10 * lam;
        double delta = lam;
        enum class Event { End, Enter, Drop } event = Event::End;
        Index event_var = -1;
        std::size_t event_pos = 0;

        if (static_cast<Index>(active.size()) < max_active) {
            double best = std::numeric_limits<double>::infinity();
            for (Index j = 0; j < p; ++j) {
                if (is_active[static_cast<std::size_t>(j)]) continue;
                double cand = std::numeric_limits<double>::infinity();
                auto consider = [&](double v) {
                    // a variable dropped at this knot sits on the boundary; ignore its zero-length re-entry
                    if (j == just_dropped && v <= noise) return;
                    cand = std::min(cand, std::max(v, 0.0));
                };
                if (1.0 - a_all[j] > 0.0) consider((lam - c[j]) / (1.0 - a_all[j]));
                if (1.0 + a_all[j] > 0.0) consider((lam + c[j]) / (1.0 + a_all[j]));
                // strictly smaller wins, so ties go to the lower index
                if (cand < best * (1.0 - options.tie_tolerance)) {
                    best = cand;
                    event_var = j;
                }
            }
            if (event_var >= 0 && best < lam * (1.0 - 1e-10)) {
                delta = best;
                event = Event::Enter;
            } else {
                event_var = -1;
            }
        }
        for (std::size_t a = 0; a < active.size(); ++a) {
            const Index j = active[a];
            const double dj = d_active[static_cast<Index>(a)];
            // a variable entering at this knot starts from zero and cannot cross it within the segment
            if (j == just_added || beta[j] == 0.0 || dj == 0.0) continue;
            const double cand = -beta[j] / dj;
            if (cand > 0.0 && cand < delta) {
                delta = cand;
                event = Event::Drop;
                event_var = j;
                event_pos = a;
            }
        }

        const double lam_next = event == Event::End ? 0.0 : lam - delta;
        just_dropped = -1;
        just_added = -1;
        if (event == Event::Drop) {
            remove_variable(event_pos);
            just_dropped = event_var;
        } else if (event == Event::Enter) {
            const double corr = c[event_var] - delta * a_all[event_var];
            add_variable(event_var, corr > 0 ? 1.0 : -1.0);
            just_added = event_var;
        }
        lam = lam_next;
        beta = solve_beta(lam);
        if (!beta.allFinite()) {
            throw Error(ErrorKind::NumericalFailure, "non-finite coefficients at lambda " + std::to_string(lam));
        }

        // an entering variable is exactly zero at its entry knot; only the
        // stored copy is cleaned so the working solution is not perturbed
        Vector stored = beta;
        if (just_added >= 0) stored[just_added] = 0.0;

        // zero-length steps (ties) fold into the previous knot
        if (path.knots.back() - lam <= options.tie_tolerance * lmax && lam > 0.0) {
            path.knot_coefs.back() = std::move(stored);
            path.active_sets.back() = sorted_active();
            continue;
        }
        path.knots.push_back(lam);
        path.knot_coefs.push_back(std::move(stored));
        path.active_sets.push_back(sorted_active());
    }
    if (lam > 0.0) {
        throw Error(ErrorKind::NumericalFailure, "LARS did not reach lambda = 0");
    }
    return path;
}

/// Coefficients at `lam` by linear interpolation between bracketing knots;
/// zero above the first knot, constant below the last one.
inline Vector eval_exact(const ExactPath& path, double lam)
{
    const auto& k = path.knots;
    if (lam >= k.front()) return Vector::Zero(path.p());
    if (lam <= k.back()) return path.knot_coefs.back();
    // first knot strictly below lam
    const auto it = std::upper_bound(k.begin(), k.end(), lam, std::greater<double>());
    const auto hi = static_cast<std::size_t>(it - k.begin());
    const auto lo = hi - 1;
    if (k[lo] == lam) return path.knot_coefs[lo];
    const double w = (lam - k[hi]) / (k[lo] - k[hi]);
    return w * path.knot_coefs[lo] + (1.0 - w) * path.knot_coefs[hi];
}

} // namespace autolasso
