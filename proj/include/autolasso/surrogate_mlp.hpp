#pragma once
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>
#include <autolasso/dataset_io.hpp>
#include <autolasso/solver_cd.hpp>
#include <autolasso/summary_record.hpp>
#include <autolasso/synth_data.hpp>

namespace autolasso {

/// x / (1 + e^{-x}), evaluated without overflow in either tail.
inline double swish(double x)
{
    if (x >= 0.0) return x / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return x * e / (1.0 + e);
}

inline double swish_derivative(double x)
{
    const double s = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    return s + x * s * (1.0 - s);
}

enum class ModelKind
{
    Performance,  // (N, p, gamma, tau, n_lambda) -> (SPE, T_glmnet)
    LarsTime,     // (N, p, gamma) -> T_lars
};

inline std::string to_string(ModelKind k)
{
    return k == ModelKind::Performance ? "performance" : "lars_time";
}

inline constexpr double spe_log_offset = 1e-12;
inline constexpr double gamma_log_offset = 1e-12;

/// Offset added before the log transform of target `i`.
inline double target_offset(ModelKind kind, Index i)
{
    return kind == ModelKind::Performance && i == 0 ? spe_log_offset : 0.0;
}

inline Index input_count(ModelKind kind) { return kind == ModelKind::Performance ? 14 : 12; }
inline Index output_count(ModelKind kind) { return kind == ModelKind::Performance ? 2 : 1; }

/// Log-scale features before standardization: log N, log p, log(gamma_k),
/// then log10 tau and log n_lambda for the performance model.
inline Vector raw_inputs(const DataFeatures& f, const std::optional<SolverConfig>& config)
{
    Vector x(config ? 14 : 12);
    x[0] = std::log(static_cast<double>(f.n));
    x[1] = std::log(static_cast<double>(f.p));
    for (std::size_t g = 0; g < 10; ++g) x[2 + static_cast<Index>(g)] = std::log(f.gamma[g] + gamma_log_offset);
    if (config) {
        x[12] = std::log10(config->tau);
        x[13] = std::log(static_cast<double>(config->n_lambda));
    }
    return x;
}

/// Per-coordinate affine standardization.
struct AffineTransform
{
    Vector shift;
    Vector scale;

    static AffineTransform fit(const Matrix& columns_as_samples)
    {
        AffineTransform t;
        const double n = static_cast<double>(columns_as_samples.cols());
        t.shift = columns_as_samples.rowwise().mean();
        t.scale.resize(t.shift.size());
        for (Index i = 0; i < t.shift.size(); ++i) {
            const double var = (columns_as_samples.row(i).array() - t.shift[i]).square().sum() / n;
            const double sd = std::sqrt(var);
            t.scale[i] = sd > 1e-12 ? sd : 1.0;
        }
        return t;
    }

    Matrix apply(const Matrix& m) const
    {
        return (m.colwise() - shift).array().colwise() / scale.array();
    }

    Matrix invert(const Matrix& m) const
    {
        return (m.array().colwise() * scale.array()).matrix().colwise() + shift;
    }
};

struct MlpModel
{
    ModelKind kind = ModelKind::Performance;
    std::vector<Index> layers;      // input, hidden..., output
    std::vector<Matrix> weights;    // weights[l] is layers[l+1] x layers[l]
    std::vector<Vector> biases;
    AffineTransform input;          // applied after raw_inputs
    AffineTransform target;         // applied after the log transform
    std::optional<double> calibration_seconds;

    Index n_inputs() const { return layers.front(); }
    Index n_outputs() const { return layers.back(); }

    /// Standardized inputs (one sample per column) to transformed targets.
    Matrix forward(const Matrix& Z) const
    {
        Matrix A = Z;
        for (std::size_t l = 0; l < weights.size(); ++l) {
            Matrix pre = (weights[l] * A).colwise() + biases[l];
            if (l + 1 < weights.size()) pre = pre.unaryExpr([](double v) { return swish(v); });
            A = std::move(pre);
        }
        return A;
    }

    /// log(y + offset), then standardization.
    Matrix transform_targets(const Matrix& Y) const
    {
        Matrix L(Y.rows(), Y.cols());
        for (Index i = 0; i < Y.rows(); ++i) {
            const double off = target_offset(kind, i);
            L.row(i) = (Y.row(i).array() + off).log();
        }
        return target.apply(L);
    }

    Matrix inverse_targets(const Matrix& T) const
    {
        Matrix Y = target.invert(T).array().exp();
        for (Index i = 0; i < Y.rows(); ++i) Y.row(i).array() -= target_offset(kind, i);
        return Y;
    }

    friend bool operator==(const MlpModel& a, const MlpModel& b)
    {
        return a.kind == b.kind && a.layers == b.layers && a.weights == b.weights
               && a.biases == b.biases && a.input.shift == b.input.shift
               && a.input.scale == b.input.scale && a.target.shift == b.target.shift
               && a.target.scale == b.target.scale && a.calibration_seconds == b.calibration_seconds;
    }
};

/// Glorot-uniform weights, zero biases, identity transforms.
inline MlpModel init_model(ModelKind kind, const std::vector<Index>& layers, std::uint64_t seed)
{
    if (layers.size() < 2) {
        throw Error(ErrorKind::InvalidConfig, "a network needs at least input and output layers");
    }
    MlpModel m;
    m.kind = kind;
    m.layers = layers;
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
        const double limit = std::sqrt(6.0 / static_cast<double>(layers[l] + layers[l + 1]));
        std::uniform_real_distribution<double> u(-limit, limit);
        Matrix W(layers[l + 1], layers[l]);
        for (Index i = 0; i < W.rows(); ++i)
            for (Index j = 0; j < W.cols(); ++j) W(i, j) = u(rng);
        m.weights.push_back(std::move(W));
        m.biases.push_back(Vector::Zero(layers[l + 1]));
    }
    m.input.shift = Vector::Zero(layers.front());
    m.input.scale = Vector::Ones(layers.front());
    m.target.shift = Vector::Zero(layers.back());
    m.target.scale = Vector::Ones(layers.back());
    return m;
}

struct Gradients
{
    std::vector<Matrix> dW;
    std::vector<Vector> db;
};

/// Mean over samples of the summed squared output error, in transformed
/// space. Fills `grad` by backpropagation when given.
inline double loss_and_gradient(const MlpModel& m, const Matrix& Z, const Matrix& T, Gradients* grad)
{
    const std::size_t L = m.weights.size();
    const double batch = static_cast<double>(Z.cols());
    std::vector<Matrix> pre(L), act(L + 1);
    act[0] = Z;
    for (std::size_t l = 0; l < L; ++l) {
        pre[l] = (m.weights[l] * act[l]).colwise() + m.biases[l];
        act[l + 1] = l + 1 < L ? pre[l].unaryExpr([](double v) { return swish(v); }) : pre[l];
    }
    const Matrix err = act[L] - T;
    const double loss = err.squaredNorm() / batch;
    if (!grad) return loss;

    grad->dW.resize(L);
    grad->db.resize(L);
    Matrix delta = 2.0 * err / batch;
    for (std::size_t l = L; l-- > 0;) {
        grad->dW[l].noalias() = delta * act[l].transpose();
        grad->db[l] = delta.rowwise().sum();
        if (l > 0) {
            Matrix back = m.weights[l].transpose() * delta;
            delta = back.cwiseProduct(pre[l - 1].unaryExpr([](double v) { return swish_derivative(v); }));
        }
    }
    return loss;
}

namespace detail {

/// Single-sample loss in extended precision, for finite differences.
inline long double loss_extended(const MlpModel& m, const Vector& z, const Vector& t)
{
    std::vector<long double> a(z.data(), z.data() + z.size());
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        const Matrix& W = m.weights[l];
        std::vector<long double> next(static_cast<std::size_t>(W.rows()));
        for (Index i = 0; i < W.rows(); ++i) {
            long double v = m.biases[l][i];
            for (Index j = 0; j < W.cols(); ++j) v += static_cast<long double>(W(i, j)) * a[static_cast<std::size_t>(j)];
            if (l + 1 < m.weights.size()) v = v / (1.0L + std::exp(-v));
            next[static_cast<std::size_t>(i)] = v;
        }
        a = std::move(next);
    }
    long double loss = 0.0L;
    for (Index i = 0; i < t.size(); ++i) {
        const long double e = a[static_cast<std::size_t>(i)] - t[i];
        loss += e * e;
    }
    return loss;
}

} // namespace detail

/// Largest symmetric relative difference |ga - gn| / max(1e-12, |ga| + |gn|)
/// between backprop and central differences (step h) on one sample.
inline double gradient_check(const MlpModel& model, const Vector& z, const Vector& t, double h = 1e-5)
{
    Matrix Z = z;
    Matrix T = t;
    Gradients g;
    loss_and_gradient(model, Z, T, &g);
    MlpModel probe = model;
    double worst = 0.0;
    auto compare = [&](double& param, double analytic) {
        const double saved = param;
        param = saved + h;
        const long double up = detail::loss_extended(probe, z, t);
        param = saved - h;
        const long double down = detail::loss_extended(probe, z, t);
        param = saved;
        const double numeric = static_cast<double>((up - down) / (2.0L * h));
        const double rel = std::abs(analytic - numeric) / std::max(1e-12, std::abs(analytic) + std::abs(numeric));
        worst = std::max(worst, rel);
    };
    for (std::size_t l = 0; l < probe.weights.size(); ++l) {
        for (Index i = 0; i < probe.weights[l].rows(); ++i)
            for (Index j = 0; j < probe.weights[l].cols(); ++j) compare(probe.weights[l](i, j), g.dW[l](i, j));
        for (Index i = 0; i < probe.biases[l].size(); ++i) compare(probe.biases[l][i], g.db[l][i]);
    }
    return worst;
}

struct TrainSpec
{
    std::vector<Index> hidden;
    double learning_rate = 1e-3;
    int epochs = 500;
    Index batch_size = 256;
    std::uint64_t seed = 0;
    double validation_fraction = 0.1;
    double test_fraction = 0.1;

    void validate() const
    {
        if (!(learning_rate > 0.0) || epochs < 1 || batch_size < 1) {
            throw Error(ErrorKind::InvalidConfig, "need learning_rate > 0, epochs >= 1, batch_size >= 1");
        }
        if (!(validation_fraction > 0.0 && validation_fraction < 1.0)
            || !(test_fraction >= 0.0 && validation_fraction + test_fraction < 1.0)) {
            throw Error(ErrorKind::InvalidConfig, "validation/test fractions must leave a training split");
        }
    }
};

/// Final architecture and rate of the (SPE, time) network.
inline TrainSpec default_performance_spec()
{
    TrainSpec s;
    s.hidden = {64, 61, 57};
    s.learning_rate = 7.6e-4;
    s.batch_size = 20263;
    return s;
}

/// Final architecture and rate of the LARS runtime network.
inline TrainSpec default_lars_spec()
{
    TrainSpec s;
    s.hidden = {45, 44, 37};
    s.learning_rate = 1.08e-3;
    s.batch_size = 1700;
    return s;
}

struct AdamParams
{
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct TrainReport
{
    std::vector<double> train_loss;  // full training-split loss after each epoch
    std::vector<double> val_loss;
    std::vector<std::size_t> train_rows, val_rows, test_rows;  // indices into the usable rows
};

struct TrainedModel
{
    MlpModel model;
    TrainReport report;
};

/// Inputs (one column per sample) and untransformed targets of the rows a
/// model of `kind` learns from; failed or unmeasured rows are skipped.
struct TrainingTable
{
    Matrix inputs;
    Matrix targets;
};

inline DataFeatures record_features(const SummaryRecord& r)
{
    return DataFeatures{r.n, r.p, r.gamma};
}

inline TrainingTable training_table(const std::vector<SummaryRecord>& records, ModelKind kind)
{
    std::vector<const SummaryRecord*> rows;
    for (const auto& r : records) {
        if (kind == ModelKind::Performance ? !r.failed() : r.t_lars.has_value()) rows.push_back(&r);
    }
    TrainingTable t;
    t.inputs.resize(input_count(kind), static_cast<Index>(rows.size()));
    t.targets.resize(output_count(kind), static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = *rows[i];
        const auto col = static_cast<Index>(i);
        if (kind == ModelKind::Performance) {
            t.inputs.col(col) = raw_inputs(record_features(r), SolverConfig{r.tau, r.n_lambda});
            t.targets(0, col) = *r.spe;
            t.targets(1, col) = *r.t_glmnet;
        } else {
            t.inputs.col(col) = raw_inputs(record_features(r), std::nullopt);
            t.targets(0, col) = *r.t_lars;
        }
    }
    return t;
}

namespace detail {

inline Matrix select_columns(const Matrix& m, const std::vector<std::size_t>& cols)
{
    Matrix out(m.rows(), static_cast<Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) out.col(static_cast<Index>(i)) = m.col(static_cast<Index>(cols[i]));
    return out;
}

} // namespace detail

/// Adam on the transformed targets. Transforms are fitted on the training
/// split only; the returned report carries the split so held-out metrics
/// can be recomputed from the saved model.
inline TrainedModel train(const std::vector<SummaryRecord>& records,
                          const TrainSpec& spec,
                          ModelKind kind,
                          const AdamParams& adam = {})
{
    spec.validate();
    const auto table = training_table(records, kind);
    const auto rows = static_cast<std::size_t>(table.inputs.cols());
    if (rows < 100) {
        throw Error(ErrorKind::InvalidConfig,
                    "need at least 100 usable records, got " + std::to_string(rows));
    }

    std::mt19937_64 rng(spec.seed);
    std::vector<std::size_t> order(rows);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    const auto n_val = std::max<std::size_t>(1, static_cast<std::size_t>(std::round(spec.validation_fraction * rows)));
    const auto n_test = static_cast<std::size_t>(std::round(spec.test_fraction * rows));
    TrainedModel out;
    auto& rep = out.report;
    rep.val_rows.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
    rep.test_rows.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val),
                         order.begin() + static_cast<std::ptrdiff_t>(n_val + n_test));
    rep.train_rows.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val + n_test), order.end());

    std::vector<Index> layers{input_count(kind)};
    layers.insert(layers.end(), spec.hidden.begin(), spec.hidden.end());
    layers.push_back(output_count(kind));
    auto& model = out.model;
    model = init_model(kind, layers, rng());

    const Matrix raw_train = detail::select_columns(table.inputs, rep.train_rows);
    model.input = AffineTransform::fit(raw_train);
    Matrix log_train = detail::select_columns(table.targets, rep.train_rows);
    for (Index i = 0; i < log_train.rows(); ++i) {
        log_train.row(i) = (log_train.row(i).array() + target_offset(kind, i)).log();
    }
    model.target = AffineTransform::fit(log_train);

    const Matrix Z_train = model.input.apply(raw_train);
    const Matrix T_train = model.target.apply(log_train);
    const Matrix Z_val = model.input.apply(detail::select_columns(table.inputs, rep.val_rows));
    const Matrix T_val = model.transform_targets(detail::select_columns(table.targets, rep.val_rows));

    const std::size_t L = model.weights.size();
    std::vector<Matrix> mW(L), vW(L);
    std::vector<Vector> mb(L), vb(L);
    for (std::size_t l = 0; l < L; ++l) {
        mW[l] = vW[l] = Matrix::Zero(model.weights[l].rows(), model.weights[l].cols());
        mb[l] = vb[l] = Vector::Zero(model.biases[l].size());
    }
    const auto n_train = static_cast<std::size_t>(Z_train.cols());
    const auto batch = std::min<std::size_t>(static_cast<std::size_t>(spec.batch_size), n_train);
    std::vector<std::size_t> perm(n_train);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    long step = 0;
    Gradients g;
    Matrix Zb, Tb;
    for (int epoch = 1; epoch <= spec.epochs; ++epoch) {
        std::shuffle(perm.begin(), perm.end(), rng);
        for (std::size_t start = 0; start < n_train; start += batch) {
            const auto count = std::min(batch, n_train - start);
            Zb.resize(Z_train.rows(), static_cast<Index>(count));
            Tb.resize(T_train.rows(), static_cast<Index>(count));
            for (std::size_t i = 0; i < count; ++i) {
                Zb.col(static_cast<Index>(i)) = Z_train.col(static_cast<Index>(perm[start + i]));
                Tb.col(static_cast<Index>(i)) = T_train.col(static_cast<Index>(perm[start + i]));
            }
            const double loss = loss_and_gradient(model, Zb, Tb, &g);
            if (!std::isfinite(loss)) {
                throw Error(ErrorKind::NonFiniteLoss, "loss diverged at epoch " + std::to_string(epoch));
            }
            ++step;
            const double c1 = 1.0 - std::pow(adam.beta1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(adam.beta2, static_cast<double>(step));
            const double lr = spec.learning_rate;
            auto update = [&](auto& param, auto& m, auto& v, const auto& grad) {
                m = adam.beta1 * m + (1.0 - adam.beta1) * grad;
                v = adam.beta2 * v + (1.0 - adam.beta2) * grad.cwiseProduct(grad);
                param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + adam.eps);
            };
            for (std::size_t l = 0; l < L; ++l) {
                update(model.weights[l], mW[l], vW[l], g.dW[l]);
                update(model.biases[l], mb[l], vb[l], g.db[l]);
            }
        }
        const double train_loss = loss_and_gradient(model, Z_train, T_train, nullptr);
        if (!std::isfinite(train_loss)) {
            throw Error(ErrorKind::NonFiniteLoss, "loss diverged at epoch " + std::to_string(epoch));
        }
        rep.train_loss.push_back(train_loss);
        rep.val_loss.push_back(loss_and_gradient(model, Z_val, T_val, nullptr));
    }
    return out;
}

struct PerfPrediction
{
    double spe = 0.0;
    double t_seconds = 0.0;
};

namespace detail {

inline double positive(double v)
{
    return std::max(v, std::numeric_limits<double>::min());
}

inline void require_kind(const MlpModel& m, ModelKind kind)
{
    if (m.kind != kind) {
        throw Error(ErrorKind::WrongModelKind,
                    "expected a " + to_string(kind) + " model, got " + to_string(m.kind));
    }
}

} // namespace detail

inline std::vector<PerfPrediction> predict_performance_batch(const MlpModel& model,
                                                             const DataFeatures& features,
                                                             const std::vector<SolverConfig>& configs)
{
    detail::require_kind(model, ModelKind::Performance);
    Matrix raw(model.n_inputs(), static_cast<Index>(configs.size()));
    for (std::size_t k = 0; k < configs.size(); ++k) {
        raw.col(static_cast<Index>(k)) = raw_inputs(features, configs[k]);
    }
    const Matrix Y = model.inverse_targets(model.forward(model.input.apply(raw)));
    std::vector<PerfPrediction> out(configs.size());
    for (std::size_t k = 0; k < configs.size(); ++k) {
        out[k].spe = detail::positive(Y(0, static_cast<Index>(k)));
        out[k].t_seconds = detail::positive(Y(1, static_cast<Index>(k)));
    }
    return out;
}

inline PerfPrediction predict_performance(const MlpModel& model,
                                          const DataFeatures& features,
                                          const SolverConfig& config)
{
    return predict_performance_batch(model, features, {config}).front();
}

inline double predict_lars_time(const MlpModel& model, const DataFeatures& features)
{
    detail::require_kind(model, ModelKind::LarsTime);
    const Matrix raw = raw_inputs(features, std::nullopt);
    const Matrix Y = model.inverse_targets(model.forward(model.input.apply(raw)));
    return detail::positive(Y(0, 0));
}

/// Spearman rank correlation (average ranks for ties).
inline double rank_correlation(const std::vector<double>& a, const std::vector<double>& b)
{
    if (a.size() != b.size() || a.size() < 2) {
        throw Error(ErrorKind::LengthMismatch, "rank correlation needs two equal-length series");
    }
    auto ranks = [](const std::vector<double>& v) {
        std::vector<std::size_t> idx(v.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::stable_sort(idx.begin(), idx.end(), [&](auto i, auto j) { return v[i] < v[j]; });
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < idx.size();) {
            std::size_t j = i;
            while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
            const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
            for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    const auto ra = ranks(a), rb = ranks(b);
    const Eigen::Map<const Vector> x(ra.data(), static_cast<Index>(ra.size()));
    const Eigen::Map<const Vector> y(rb.data(), static_cast<Index>(rb.size()));
    const Vector xc = x.array() - x.mean();
    const Vector yc = y.array() - y.mean();
    const double denom = std::sqrt(xc.squaredNorm() * yc.squaredNorm());
    return denom > 0.0 ? xc.dot(yc) / denom : 0.0;
}

/// Held-out quality on a subset of rows: per-target MSE in transformed
/// space and rank correlation of the log-scale targets.
struct HeldOutMetrics
{
    std::vector<double> mse;
    std::vector<double> rank_corr;
    std::size_t rows = 0;
};

inline HeldOutMetrics evaluate(const MlpModel& model,
                               const std::vector<SummaryRecord>& records,
                               const std::vector<std::size_t>& rows)
{
    const auto table = training_table(records, model.kind);
    const Matrix raw = detail::select_columns(table.inputs, rows);
    const Matrix truth = model.transform_targets(detail::select_columns(table.targets, rows));
    const Matrix pred = model.forward(model.input.apply(raw));
    HeldOutMetrics m;
    m.rows = rows.size();
    for (Index i = 0; i < truth.rows(); ++i) {
        m.mse.push_back((pred.row(i) - truth.row(i)).squaredNorm() / static_cast<double>(rows.size()));
        std::vector<double> a(rows.size()), b(rows.size());
        for (std::size_t k = 0; k < rows.size(); ++k) {
            a[k] = pred(i, static_cast<Index>(k));
            b[k] = truth(i, static_cast<Index>(k));
        }
        m.rank_corr.push_back(rank_correlation(a, b));
    }
    return m;
}

/// Random search over 1-3 hidden layers of 1-64 units and a log-uniform
/// learning rate in [1e-5, 1e-1]; returns the spec with the lowest final
/// validation loss. Other fields are copied from `base`.
struct SearchResult
{
    TrainSpec spec;
    double val_loss = std::numeric_limits<double>::infinity();
};

inline SearchResult random_search(const std::vector<SummaryRecord>& records,
                                  ModelKind kind,
                                  const TrainSpec& base,
                                  int trials,
                                  std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> depth(1, 3);
    std::uniform_int_distribution<Index> units(1, 64);
    std::uniform_real_distribution<double> log_lr(std::log(1e-5), std::log(1e-1));
    SearchResult best;
    for (int t = 0; t < trials; ++t) {
        TrainSpec s = base;
        s.hidden.assign(static_cast<std::size_t>(depth(rng)), 0);
        for (auto& h : s.hidden) h = units(rng);
        s.learning_rate = std::exp(log_lr(rng));
        double val = std::numeric_limits<double>::infinity();
        try {
            val = train(records, s, kind).report.val_loss.back();
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::NonFiniteLoss) throw;
        }
        if (val < best.val_loss) {
            best.val_loss = val;
            best.spec = s;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Model files: line-oriented text, every number written with 17 significant
// digits so reading back reproduces the stored doubles exactly.

inline constexpr int model_format_version = 1;

namespace detail {

inline void write_vector(std::ostream& out, const char* tag, const Vector& v)
{
    out << tag << ' ' << v.size();
    for (Index i = 0; i < v.size(); ++i) out << ' ' << csv::format_double(v[i]);
    out << '\n';
}

class ModelParser
{
public:
    ModelParser(std::istream& in, std::string path) : in_(in), path_(std::move(path)) {}

    std::string word()
    {
        std::string w;
        if (!(in_ >> w)) corrupt("unexpected end of file");
        return w;
    }

    void expect(const std::string& tag)
    {
        const auto w = word();
        if (w != tag) corrupt("expected '" + tag + "', found '" + w + "'");
    }

    double number()
    {
        const auto w = word();
        double v;
        if (!csv::parse_double(w, v)) corrupt("bad number '" + w + "'");
        return v;
    }

    Index count()
    {
        const double v = number();
        if (v < 0 || v != std::floor(v) || v > 1e7) corrupt("bad count");
        return static_cast<Index>(v);
    }

    Vector vector(const std::string& tag)
    {
        expect(tag);
        Vector v(count());
        for (Index i = 0; i < v.size(); ++i) v[i] = number();
        return v;
    }

    [[noreturn]] void corrupt(const std::string& what) const
    {
        throw Error(ErrorKind::CorruptFile, path_ + ": " + what);
    }

private:
    std::istream& in_;
    std::string path_;
};

} // namespace detail

inline void save_model(const MlpModel& m, const std::string& path)
{
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorKind::Io, "cannot write " + path);
    }
    out << "autolasso-mlp " << model_format_version << '\n';
    out << "kind " << to_string(m.kind) << '\n';
    out << "layers " << m.layers.size();
    for (const auto s : m.layers) out << ' ' << s;
    out << '\n';
    detail::write_vector(out, "input_shift", m.input.shift);
    detail::write_vector(out, "input_scale", m.input.scale);
    detail::write_vector(out, "target_shift", m.target.shift);
    detail::write_vector(out, "target_scale", m.target.scale);
    out << "calibration " << (m.calibration_seconds ? csv::format_double(*m.calibration_seconds) : "none") << '\n';
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        const auto& W = m.weights[l];
        out << "weights " << W.rows() << ' ' << W.cols() << '\n';
        for (Index i = 0; i < W.rows(); ++i) {
            for (Index j = 0; j < W.cols(); ++j) out << (j ? " " : "") << csv::format_double(W(i, j));
            out << '\n';
        }
        detail::write_vector(out, "bias", m.biases[l]);
    }
    out << "end\n";
    if (!out) {
        throw Error(ErrorKind::Io, "write failed for " + path);
    }
}

inline MlpModel load_model(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::Io, "cannot open " + path);
    }
    detail::ModelParser parse(in, path);
    parse.expect("autolasso-mlp");
    const auto version = parse.number();
    if (version != model_format_version) {
        throw Error(ErrorKind::VersionMismatch,
                    path + ": format version " + csv::format_double(version) + ", expected "
                    + std::to_string(model_format_version));
    }
    MlpModel m;
    parse.expect("kind");
    const auto kind = parse.word();
    if (kind == "performance") m.kind = ModelKind::Performance;
    else if (kind == "lars_time") m.kind = ModelKind::LarsTime;
    else parse.corrupt("unknown model kind '" + kind + "'");

    parse.expect("layers");
    const Index depth = parse.count();
    if (depth < 2) parse.corrupt("need at least two layers");
    for (Index l = 0; l < depth; ++l) m.layers.push_back(parse.count());
    if (m.layers.front() != input_count(m.kind) || m.layers.back() != output_count(m.kind)) {
        parse.corrupt("layer sizes do not match the model kind");
    }
    m.input.shift = parse.vector("input_shift");
    m.input.scale = parse.vector("input_scale");
    m.target.shift = parse.vector("target_shift");
    m.target.scale = parse.vector("target_scale");
    if (m.input.shift.size() != m.layers.front() || m.input.scale.size() != m.layers.front()
        || m.target.shift.size() != m.layers.back() || m.target.scale.size() != m.layers.back()) {
        parse.corrupt("transform sizes do not match the layers");
    }
    if ((m.input.scale.array() <= 0.0).any() || (m.target.scale.array() <= 0.0).any()) {
        parse.corrupt("transform scales must be positive");
    }
    parse.expect("calibration");
    const auto cal = parse.word();
    if (cal != "none") {
        double v;
        if (!csv::parse_double(cal, v)) parse.corrupt("bad calibration value");
        m.calibration_seconds = v;
    }
    for (std::size_t l = 0; l + 1 < m.layers.size(); ++l) {
        parse.expect("weights");
        const Index rows = parse.count();
        const Index cols = parse.count();
        if (rows != m.layers[l + 1] || cols != m.layers[l]) parse.corrupt("weight shape mismatch");
        Matrix W(rows, cols);
        for (Index i = 0; i < rows; ++i)
            for (Index j = 0; j < cols; ++j) W(i, j) = parse.number();
        Vector b = parse.vector("bias");
        if (b.size() != rows) parse.corrupt("bias length mismatch");
        if (!W.allFinite() || !b.allFinite()) parse.corrupt("non-finite parameters");
        m.weights.push_back(std::move(W));
        m.biases.push_back(std::move(b));
    }
    parse.expect("end");
    return m;
}

} // namespace autolasso
