#pragma once
#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <autolasso/error.hpp>

namespace autolasso {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Column means/scales and the response mean used to map between the raw
/// and the standardized problem. Scales use the 1/N variance convention.
struct Standardization
{
    Vector x_means;
    Vector x_scales;
    double y_mean = 0.0;
};

struct Dataset
{
    Matrix X;
    Vector y;
    bool standardized = false;
    Standardization stats;

    Index n() const { return X.rows(); }
    Index p() const { return X.cols(); }
};

inline bool all_finite(const Matrix& X, const Vector& y)
{
    return X.allFinite() && y.allFinite();
}

inline void check_shape(const Matrix& X, const Vector& y)
{
    if (X.rows() != y.size()) {
        throw Error(ErrorKind::DimensionMismatch,
                    "X has " + std::to_string(X.rows()) + " rows but y has "
                    + std::to_string(y.size()) + " entries");
    }
    if (X.rows() < 2 || X.cols() < 1) {
        throw Error(ErrorKind::InvalidConfig, "need N >= 2 and p >= 1");
    }
}

inline Dataset make_raw(Matrix X, Vector y)
{
    check_shape(X, y);
    if (!all_finite(X, y)) {
        throw Error(ErrorKind::NonFiniteInput, "dataset contains NaN or Inf");
    }
    Dataset d;
    d.X = std::move(X);
    d.y = std::move(y);
    d.stats.x_means = Vector::Zero(d.p());
    d.stats.x_scales = Vector::Ones(d.p());
    return d;
}

/// Centers and scales every column of X to mean 0 / variance 1 (1/N), and
/// centers y. The result carries the statistics of the input it was
/// computed from, so calling this on already standardized data is a no-op
/// up to rounding but reports identity statistics.
inline Dataset standardize(const Dataset& raw)
{
    check_shape(raw.X, raw.y);
    if (!all_finite(raw.X, raw.y)) {
        throw Error(ErrorKind::NonFiniteInput, "dataset contains NaN or Inf");
    }
    const auto n = static_cast<double>(raw.n());
    Dataset out;
    out.stats.x_means = raw.X.colwise().mean().transpose();
    out.stats.y_mean = raw.y.mean();
    out.X = raw.X.rowwise() - out.stats.x_means.transpose();
    out.stats.x_scales.resize(raw.p());
    for (Index j = 0; j < raw.p(); ++j) {
        const double var = out.X.col(j).squaredNorm() / n;
        const double mean_sq = out.stats.x_means[j] * out.stats.x_means[j];
        // a column whose spread is lost in rounding counts as constant
        if (!(var > 1e-24 * std::max(1.0, mean_sq))) {
            throw Error(ErrorKind::ZeroVarianceColumn, "column " + std::to_string(j));
        }
        const double sd = std::sqrt(var);
        out.stats.x_scales[j] = sd;
        out.X.col(j) /= sd;
    }
    out.y = raw.y.array() - out.stats.y_mean;
    out.standardized = true;
    return out;
}

/// Applies stored statistics to new raw rows.
inline Matrix apply_standardization(const Standardization& stats, const Matrix& raw_X)
{
    if (raw_X.cols() != stats.x_means.size()) {
        throw Error(ErrorKind::DimensionMismatch,
                    "expected " + std::to_string(stats.x_means.size()) + " columns, got "
                    + std::to_string(raw_X.cols()));
    }
    Matrix Z = raw_X.rowwise() - stats.x_means.transpose();
    Z.array().rowwise() /= stats.x_scales.transpose().array();
    return Z;
}

/// Coefficients on the original feature scale plus the intercept.
struct RawCoefficients
{
    Vector beta;
    double intercept = 0.0;
};

inline RawCoefficients back_transform(const Vector& std_beta, const Standardization& stats)
{
    RawCoefficients out;
    out.beta = std_beta.array() / stats.x_scales.array();
    out.intercept = stats.y_mean - stats.x_means.dot(out.beta);
    return out;
}

inline void require_standardized(const Dataset& d)
{
    if (!d.standardized) {
        throw Error(ErrorKind::InvalidConfig, "dataset must be standardized");
    }
}

} // namespace autolasso
