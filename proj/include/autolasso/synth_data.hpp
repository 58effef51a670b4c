#pragma once
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>
#include <Eigen/Eigenvalues>
#include <autolasso/dataset.hpp>

namespace autolasso {

/// splitmix64 finalizer; used to derive independent seed streams.
inline std::uint64_t mix_seed(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of stream `index` under `master`.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index)
{
    return mix_seed(mix_seed(master) ^ mix_seed(index + 0x632be59bd9b4e019ULL));
}

enum class CovFamily
{
    CompoundSymmetry,
    Ar1,
    RandomStructured,
    InverseRandomStructured,
};

inline std::string to_string(CovFamily f)
{
    switch (f) {
        case CovFamily::CompoundSymmetry: return "compound_symmetry";
        case CovFamily::Ar1: return "ar1";
        case CovFamily::RandomStructured: return "random_structured";
        case CovFamily::InverseRandomStructured: return "inverse_random_structured";
    }
    return "unknown";
}

inline CovFamily parse_cov_family(const std::string& s)
{
    if (s == "compound_symmetry") return CovFamily::CompoundSymmetry;
    if (s == "ar1") return CovFamily::Ar1;
    if (s == "random_structured") return CovFamily::RandomStructured;
    if (s == "inverse_random_structured") return CovFamily::InverseRandomStructured;
    throw Error(ErrorKind::InvalidConfig, "unknown covariance family '" + s + "'");
}

struct CovarianceSpec
{
    CovFamily family = CovFamily::CompoundSymmetry;
    Index p = 10;
    double rho = 0.5;          // compound symmetry and AR(1)
    std::uint64_t seed = 0;    // random structured families
};

/// Top five eigenvalues (descending) followed by the bottom five, stored in
/// the order g1..g5, gm5..gm1 (non-increasing overall once p >= 10).
using Gamma = std::array<double, 10>;

struct DataFeatures
{
    Index n = 0;
    Index p = 0;
    Gamma gamma{};
};

namespace detail {

inline void check_rho(double rho)
{
    if (!(rho > 0.0 && rho < 1.0)) {
        throw Error(ErrorKind::InvalidRho, "rho must lie in (0, 1), got " + std::to_string(rho));
    }
}

inline void check_spd(const Matrix& S, const char* what)
{
    Eigen::LLT<Matrix> llt(S);
    if (llt.info() != Eigen::Success) {
        throw Error(ErrorKind::NotPositiveDefinite, std::string(what) + " is not positive definite");
    }
}

/// Inverse of a symmetric positive definite matrix, refusing ill-conditioned input.
inline Matrix spd_inverse(const Matrix& S, const char* what)
{
    Eigen::SelfAdjointEigenSolver<Matrix> es(S);
    if (es.info() != Eigen::Success) {
        throw Error(ErrorKind::EigenFailure, std::string("eigendecomposition of ") + what);
    }
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > 1e12) {
        throw Error(ErrorKind::NumericalFailure, std::string(what) + " is ill-conditioned");
    }
    Matrix inv = es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal()
                 * es.eigenvectors().transpose();
    return 0.5 * (inv + inv.transpose());
}

} // namespace detail

inline Matrix cov_compound_symmetry(Index p, double rho)
{
    detail::check_rho(rho);
    Matrix S = Matrix::Constant(p, p, rho);
    S.diagonal().setOnes();
    return S;
}

inline Matrix cov_ar1(Index p, double rho)
{
    detail::check_rho(rho);
    Matrix S(p, p);
    for (Index i = 0; i < p; ++i) {
        for (Index j = 0; j < p; ++j) {
            S(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
        }
    }
    detail::check_spd(S, "AR(1) covariance");
    return S;
}

/// Shifted, rescaled random precision matrix (Omega) behind the random
/// structured family; its inverse is the covariance.
inline Matrix random_structured_precision(Index p, std::uint64_t seed)
{
    if (p < 2) {
        throw Error(ErrorKind::InvalidConfig, "random structured covariance needs p >= 2");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> magnitude(0.25, 0.75);
    std::bernoulli_distribution negative(0.5);
    Matrix E(p, p);
    for (Index i = 0; i < p; ++i) {
        for (Index j = 0; j < p; ++j) {
            const double v = magnitude(rng);
            E(i, j) = negative(rng) ? -v : v;
        }
    }
    // sparsify off-diagonal pairs; the zeroing probability is drawn once per matrix
    const double zero_prob = std::uniform_real_distribution<double>(0.3, 0.9)(rng);
    std::bernoulli_distribution zero(zero_prob);
    for (Index i = 0; i < p; ++i) {
        for (Index j = i + 1; j < p; ++j) {
            if (zero(rng)) {
                E(i, j) = 0.0;
                E(j, i) = 0.0;
            }
        }
    }
    Matrix Et = 0.5 * (E + E.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(Et, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        throw Error(ErrorKind::EigenFailure, "eigenvalues of symmetrized E");
    }
    Et.diagonal().array() += 0.1 - es.eigenvalues().minCoeff();
    const Matrix shifted_inv = detail::spd_inverse(Et, "shifted matrix");
    const Vector l_sqrt = shifted_inv.diagonal().cwiseSqrt();
    Matrix omega = l_sqrt.asDiagonal() * Et * l_sqrt.asDiagonal();
    return 0.5 * (omega + omega.transpose());
}

inline Matrix cov_random_structured(Index p, std::uint64_t seed)
{
    return detail::spd_inverse(random_structured_precision(p, seed), "precision matrix");
}

inline Matrix cov_inverse_random_structured(Index p, std::uint64_t seed)
{
    // inverse of the covariance above, i.e. the precision matrix itself
    Matrix omega = random_structured_precision(p, seed);
    detail::check_spd(omega, "inverse random structured covariance");
    return omega;
}

inline Matrix build_covariance(const CovarianceSpec& spec)
{
    switch (spec.family) {
        case CovFamily::CompoundSymmetry: return cov_compound_symmetry(spec.p, spec.rho);
        case CovFamily::Ar1: return cov_ar1(spec.p, spec.rho);
        case CovFamily::RandomStructured: return cov_random_structured(spec.p, spec.seed);
        case CovFamily::InverseRandomStructured: return cov_inverse_random_structured(spec.p, spec.seed);
    }
    throw Error(ErrorKind::InvalidConfig, "unknown covariance family");
}

inline Index beta_nonzero_count(Index p, int pattern)
{
    switch (pattern) {
        case 1:
        case 3: return p / 2;
        case 2:
        case 4: return p / 10;
        default:
            throw Error(ErrorKind::InvalidPattern, "beta pattern must be 1..4, got " + std::to_string(pattern));
    }
}

/// Patterns 1/2: floor(p/2) or floor(p/10) ones; 3/4: same counts of N(0,1)
/// values. Positions are a seeded random permutation.
inline Vector beta_pattern(Index p, int pattern, std::uint64_t seed)
{
    const Index count = beta_nonzero_count(p, pattern);
    if (count < 1) {
        throw Error(ErrorKind::InvalidPattern,
                    "pattern " + std::to_string(pattern) + " has no nonzeros for p = " + std::to_string(p));
    }
    std::mt19937_64 rng(seed);
    Vector values = Vector::Zero(p);
    if (pattern == 1 || pattern == 2) {
        values.head(count).setOnes();
    } else {
        std::normal_distribution<double> normal(0.0, 1.0);
        for (Index i = 0; i < count; ++i) {
            double v = 0.0;
            while (v == 0.0) v = normal(rng);
            values[i] = v;
        }
    }
    std::vector<Index> perm(static_cast<std::size_t>(p));
    std::iota(perm.begin(), perm.end(), Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    Vector beta(p);
    for (Index i = 0; i < p; ++i) beta[perm[static_cast<std::size_t>(i)]] = values[i];
    return beta;
}

struct SampledData
{
    Dataset train;     // raw, not standardized
    Matrix X_test;
    Vector y_test;
};

/// Rows x_i ~ N(0, cov), y = X beta + eps with eps ~ N(0, sigma^2 I). The
/// first `n` rows form the training set, the next `n_test` rows the test set.
inline SampledData sample_dataset(Index n,
                                  const Matrix& cov,
                                  const Vector& beta,
                                  double sigma,
                                  std::uint64_t seed,
                                  Index n_test = 0)
{
    if (beta.size() != cov.rows() || cov.rows() != cov.cols()) {
        throw Error(ErrorKind::DimensionMismatch, "beta and covariance dimensions differ");
    }
    if (!(sigma >= 0.0)) {
        throw Error(ErrorKind::InvalidConfig, "sigma must be nonnegative");
    }
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success) {
        throw Error(ErrorKind::NotPositiveDefinite, "covariance is not positive definite");
    }
    const Index p = cov.rows();
    const Index total = n + n_test;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix Z(total, p);
    for (Index i = 0; i < total; ++i) {
        for (Index j = 0; j < p; ++j) Z(i, j) = normal(rng);
    }
    const Matrix X = Z * llt.matrixL().transpose();
    Vector y = X * beta;
    for (Index i = 0; i < total; ++i) y[i] += sigma * normal(rng);

    SampledData out;
    out.train = make_raw(X.topRows(n), y.head(n));
    out.X_test = X.bottomRows(n_test);
    out.y_test = y.tail(n_test);
    return out;
}

/// Covariance with the 1/N divisor after column centering.
inline Matrix sample_covariance(const Matrix& X)
{
    const Matrix centered = X.rowwise() - X.colwise().mean();
    Matrix S = centered.transpose() * centered / static_cast<double>(X.rows());
    return 0.5 * (S + S.transpose());
}

/// Largest and smallest five eigenvalues of a symmetric matrix. For p < 10
/// the missing slots repeat the nearest available extreme eigenvalue.
inline Gamma eigen_features(const Matrix& cov)
{
    if (cov.rows() != cov.cols() || cov.rows() < 1) {
        throw Error(ErrorKind::DimensionMismatch, "eigen_features needs a square matrix");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(cov, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        throw Error(ErrorKind::EigenFailure, "symmetric eigendecomposition failed");
    }
    const Vector& asc = es.eigenvalues();  // ascending
    const Index p = asc.size();
    auto clamp0 = [](double v) { return std::max(v, 0.0); };
    Gamma g{};
    for (Index i = 0; i < 5; ++i) {
        g[static_cast<std::size_t>(i)] = clamp0(asc[p - 1 - std::min(i, p - 1)]);
        // gm(i+1) is the (i+1)-th smallest and sits at slot 9 - i
        g[static_cast<std::size_t>(9 - i)] = clamp0(asc[std::min(i, p - 1)]);
    }
    return g;
}

} // namespace autolasso
