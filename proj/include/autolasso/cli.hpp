#pragma once
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>
#include <CLI11.hpp>
#include <autolasso/dataset_io.hpp>
#include <autolasso/pareto_tuner.hpp>
#include <autolasso/summary_pipeline.hpp>
#include <autolasso/surrogate_mlp.hpp>

namespace autolasso::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_failure = 1;
inline constexpr int exit_usage = 2;

/// Bad user input; reported with exit code 2.
struct UsageError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

inline void require_file(const std::string& path, const char* what)
{
    if (path.empty()) throw UsageError(std::string("missing --") + what);
    if (!std::filesystem::is_regular_file(path)) {
        throw UsageError(std::string(what) + " file not found: " + path);
    }
}

inline std::string in_dir(const std::string& dir, const std::string& name)
{
    return (std::filesystem::path(dir) / name).string();
}

inline void ensure_dir(const std::string& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create directory " + dir + ": " + ec.message());
}

struct Streams
{
    std::ostream& out = std::cout;
    std::ostream& err = std::cerr;
};

// ---------------------------------------------------------------------------

struct SummaryArgs
{
    std::string scenario;
    std::string preset = "desk";
    std::size_t records = 5000;
    std::string summary;
    std::string out = ".";
    std::uint64_t seed = 1;
    bool quiet = false;
};

inline int cmd_generate_summary(const SummaryArgs& a, Streams io)
{
    std::vector<Scenario> scenarios;
    if (!a.scenario.empty()) {
        require_file(a.scenario, "scenario");
        scenarios = load_scenarios(a.scenario);
    } else {
        if (a.preset != "desk" && a.preset != "full") throw UsageError("--preset must be desk or full");
        const auto ranges = a.preset == "desk" ? desk_ranges() : full_ranges();
        scenarios = preset_scenarios(ranges, a.records, a.seed);
    }
    ensure_dir(a.out);
    const auto output = a.summary.empty() ? in_dir(a.out, "summary.csv") : a.summary;
    const auto written = build_summary(scenarios, default_config_sampler(), a.seed, output, {},
                                       [&](const BuildProgress& p) {
                                           for (const auto& e : p.errors) {
                                               io.err << "scenario " << p.scenario << ": " << e << '\n';
                                           }
                                           if (!a.quiet) {
                                               io.err << "scenario " << p.scenario + 1 << "/" << p.total << ", "
                                                      << p.records << " records\n";
                                           }
                                       });
    io.out << written << " records appended to " << output << '\n';
    return exit_ok;
}

struct ScenarioFileArgs
{
    std::string preset = "desk";
    std::size_t records = 5000;
    std::uint64_t seed = 1;
    std::string out;
};

inline int cmd_make_scenarios(const ScenarioFileArgs& a, Streams io)
{
    if (a.preset != "desk" && a.preset != "full") throw UsageError("--preset must be desk or full");
    if (a.out.empty()) throw UsageError("missing --out");
    const auto s = preset_scenarios(a.preset == "desk" ? desk_ranges() : full_ranges(), a.records, a.seed);
    save_scenarios(s, a.out);
    io.out << s.size() << " scenarios written to " << a.out << '\n';
    return exit_ok;
}

// ---------------------------------------------------------------------------

struct TrainArgs
{
    std::string summary;
    std::string out = ".";
    std::string perf_model;
    std::string lars_model;
    std::uint64_t seed = 1;
    int epochs = 500;
    Index perf_batch = 0;  // 0 keeps the default
    Index lars_batch = 0;
    bool calibrate = false;
};

inline void print_metrics(std::ostream& out, const char* name, const HeldOutMetrics& m,
                          const std::vector<std::string>& targets)
{
    out << name << " held-out (" << m.rows << " rows):";
    for (std::size_t i = 0; i < targets.size(); ++i) {
        out << ' ' << targets[i] << " mse=" << csv::format_double(m.mse[i])
            << " rank_corr=" << csv::format_double(m.rank_corr[i]);
    }
    out << '\n';
}

inline int cmd_train_surrogate(const TrainArgs& a, Streams io)
{
    require_file(a.summary, "summary");
    const auto records = read_records(a.summary);
    ensure_dir(a.out);
    const auto perf_path = a.perf_model.empty() ? in_dir(a.out, "perf.model") : a.perf_model;
    const auto lars_path = a.lars_model.empty() ? in_dir(a.out, "lars.model") : a.lars_model;
    std::optional<double> reference;
    if (a.calibrate) reference = calibration_benchmark();

    auto perf_spec = default_performance_spec();
    perf_spec.seed = derive_seed(a.seed, 0);
    perf_spec.epochs = a.epochs;
    if (a.perf_batch > 0) perf_spec.batch_size = a.perf_batch;
    auto perf = train(records, perf_spec, ModelKind::Performance);
    perf.model.calibration_seconds = reference;
    save_model(perf.model, perf_path);
    print_metrics(io.out, "performance", evaluate(perf.model, records, perf.report.test_rows),
                  {"log_spe", "log_time"});

    auto lars_spec = default_lars_spec();
    lars_spec.seed = derive_seed(a.seed, 1);
    lars_spec.epochs = a.epochs;
    if (a.lars_batch > 0) lars_spec.batch_size = a.lars_batch;
    auto lars = train(records, lars_spec, ModelKind::LarsTime);
    lars.model.calibration_seconds = reference;
    save_model(lars.model, lars_path);
    print_metrics(io.out, "lars", evaluate(lars.model, records, lars.report.test_rows), {"log_time"});
    io.out << "models written to " << perf_path << " and " << lars_path << '\n';
    return exit_ok;
}

// ---------------------------------------------------------------------------

struct TuneArgs
{
    std::string data;
    std::string new_data;
    std::string perf_model;
    std::string lars_model;
    double t_hope = 20.0;
    std::uint64_t seed = 1;
    std::string out = ".";
    bool calibrate = false;
};

inline void write_vector_csv(const std::string& path, const char* column, const Vector& v)
{
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
    out << column << '\n';
    for (Index i = 0; i < v.size(); ++i) out << csv::format_double(v[i]) << '\n';
}

/// Predictor matrix of a CSV in the dataset layout; a trailing `y` column,
/// when present, is ignored.
inline Matrix read_predictors_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
    std::string header;
    std::getline(in, header);
    const auto names = csv::split(csv::trim(header));
    std::size_t cols = names.size();
    if (cols > 0 && csv::trim(names.back()) == "y") --cols;
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        const auto f = csv::split(csv::trim(line));
        if (f.size() != names.size()) {
            throw Error(ErrorKind::MalformedRow, path + ":" + std::to_string(line_no) + ": wrong field count");
        }
        std::vector<double> row(cols);
        for (std::size_t j = 0; j < cols; ++j) {
            if (!csv::parse_double(f[j], row[j])) {
                throw Error(ErrorKind::MalformedRow, path + ":" + std::to_string(line_no) + ": bad number");
            }
        }
        rows.push_back(std::move(row));
    }
    Matrix X(static_cast<Index>(rows.size()), static_cast<Index>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols; ++j) X(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    return X;
}

inline int cmd_tune(const TuneArgs& a, Streams io)
{
    require_file(a.data, "data");
    require_file(a.perf_model, "perf-model");
    require_file(a.lars_model, "lars-model");
    if (!a.new_data.empty()) require_file(a.new_data, "new-data");
    if (!(a.t_hope > 0.0)) throw UsageError("--t-hope must be positive");

    const auto raw = read_dataset_csv(a.data);
    const auto perf = load_model(a.perf_model);
    const auto lars = load_model(a.lars_model);
    std::optional<Matrix> new_x;
    if (!a.new_data.empty()) new_x = read_predictors_csv(a.new_data);

    TuneOptions opt;
    opt.seed = a.seed;
    opt.calibrate = a.calibrate;
    const auto res = auto_lasso(raw, a.t_hope, perf, lars, opt, new_x ? &*new_x : nullptr);
    for (const auto& w : res.warnings) io.err << "warning: " << w << '\n';

    ensure_dir(a.out);
    io.out << "branch: " << to_string(res.choice) << '\n';
    io.out << "predicted lars time: " << csv::format_double(res.t_lars_hat) << " s\n";
    if (res.selected) {
        io.out << "configuration: tau=" << csv::format_double(res.selected->config.tau)
               << " n_lambda=" << res.selected->config.n_lambda << '\n';
        io.out << "predicted: spe=" << csv::format_double(res.selected->spe_hat)
               << " time=" << csv::format_double(res.selected->t_hat) << " s\n";
        io.out << "cv-selected lambda: " << csv::format_double(res.cv.selected) << '\n';
        const auto pareto = in_dir(a.out, "pareto.csv");
        write_pareto_csv(res, pareto);
        io.out << "pareto front: " << res.front.size() << " of " << res.candidates.size() << " configurations, "
               << pareto << '\n';
    } else {
        io.out << "cv-selected fraction: " << csv::format_double(res.cv.selected) << '\n';
    }
    io.out << "measured fit time: " << csv::format_double(res.fit_seconds) << " s\n";
    const auto raw_coefs = back_transform(res.coefs, res.stats);
    write_vector_csv(in_dir(a.out, "coefficients.csv"), "beta", raw_coefs.beta);
    if (res.predictions) {
        const auto path = in_dir(a.out, "predictions.csv");
        write_vector_csv(path, "y_hat", *res.predictions);
        io.out << "predictions: " << path << '\n';
    }
    return exit_ok;
}

// ---------------------------------------------------------------------------

struct MakeDataArgs
{
    Index n = 300;
    Index p = 200;
    std::string family = "compound_symmetry";
    double rho = 0.5;
    int pattern = 1;
    double sigma = 1.0;
    Index test_rows = 0;
    std::uint64_t seed = 1;
    std::string out;
    std::string test_out;
};

inline int cmd_make_data(const MakeDataArgs& a, Streams io)
{
    if (a.out.empty()) throw UsageError("missing --out");
    Scenario s;
    s.n = a.n;
    s.p = a.p;
    s.family = parse_cov_family(a.family);
    s.rho = a.rho;
    s.beta_pattern = a.pattern;
    s.sigma = a.sigma;
    s.validate();
    const Matrix cov = build_covariance(CovarianceSpec{s.family, s.p, s.rho, derive_seed(a.seed, 0)});
    const Vector beta = beta_pattern(s.p, s.beta_pattern, derive_seed(a.seed, 1));
    const auto sample = sample_dataset(s.n, cov, beta, s.sigma, derive_seed(a.seed, 2), a.test_rows);
    write_dataset_csv(a.out, sample.train.X, sample.train.y);
    io.out << "training data: " << a.out << '\n';
    if (a.test_rows > 0) {
        const auto test = a.test_out.empty() ? a.out + ".test.csv" : a.test_out;
        write_dataset_csv(test, sample.X_test, sample.y_test);
        io.out << "test data: " << test << '\n';
    }
    return exit_ok;
}

// ---------------------------------------------------------------------------

struct DemoArgs
{
    Index length = 1024;
    double sparsity = 0.05;
    Index measurements = 700;
    double noise = 0.1;
    double t_hope = 20.0;
    std::uint64_t seed = 1;
    std::string perf_model;
    std::string lars_model;
};

struct DemoResult
{
    double rmse_default = 0.0;
    double rmse_tuned = 0.0;
    double rmse_lars = 0.0;
    double signal_rms = 0.0;
    SolverChoice tuned_choice = SolverChoice::CdTuned;
    std::optional<SolverConfig> tuned_config;
};

/// Sparse signal theta, Gaussian projection Z, y = Z theta (+ noise), then
/// reconstruction by the default solver, the tuned solver and LARS.
inline DemoResult run_demo(const DemoArgs& a, const MlpModel& perf, const MlpModel& lars_model)
{
    if (a.measurements >= a.length || a.measurements < 10) {
        throw UsageError("compressed dimension must be in [10, signal length)");
    }
    if (!(a.sparsity > 0.0 && a.sparsity < 1.0)) throw UsageError("sparsity must lie in (0, 1)");
    std::mt19937_64 rng(derive_seed(a.seed, 0));
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto k = std::max<Index>(1, static_cast<Index>(std::floor(a.sparsity * static_cast<double>(a.length))));
    std::vector<Index> pos(static_cast<std::size_t>(a.length));
    std::iota(pos.begin(), pos.end(), Index{0});
    std::shuffle(pos.begin(), pos.end(), rng);
    Vector theta = Vector::Zero(a.length);
    for (Index i = 0; i < k; ++i) theta[pos[static_cast<std::size_t>(i)]] = normal(rng);
    Matrix Z(a.measurements, a.length);
    for (Index i = 0; i < Z.rows(); ++i)
        for (Index j = 0; j < Z.cols(); ++j) Z(i, j) = normal(rng);
    Vector y = Z * theta;
    for (Index i = 0; i < y.size(); ++i) y[i] += a.noise * normal(rng);
    const Dataset raw = make_raw(Z, y);

    const double scale = std::sqrt(static_cast<double>(a.length));
    auto error = [&](const Vector& std_coefs, const Standardization& stats) {
        return (back_transform(std_coefs, stats).beta - theta).norm() / scale;
    };
    const auto cv_seed = derive_seed(a.seed, 1);
    DemoResult r;
    r.signal_rms = theta.norm() / scale;

    const auto def = fit_fixed(raw, SolverConfig{}, 10, cv_seed);
    r.rmse_default = error(def.fit.coefs, def.data.stats);

    TuneOptions opt;
    opt.seed = a.seed;
    opt.allow_lars = false;
    const auto tuned = auto_lasso(raw, a.t_hope, perf, lars_model, opt);
    r.rmse_tuned = error(tuned.coefs, tuned.stats);
    r.tuned_choice = tuned.choice;
    if (tuned.selected) r.tuned_config = tuned.selected->config;

    const auto data = standardize(raw);
    const auto exact = fit_lars_with_cv(data, 10, 100, cv_seed);
    r.rmse_lars = error(exact.coefs, data.stats);
    return r;
}

inline int cmd_demo_cs(const DemoArgs& a, Streams io)
{
    if (a.measurements >= a.length) throw UsageError("compressed dimension must be below the signal length");
    require_file(a.perf_model, "perf-model");
    require_file(a.lars_model, "lars-model");
    const auto perf = load_model(a.perf_model);
    const auto lars = load_model(a.lars_model);
    const auto r = run_demo(a, perf, lars);
    io.out << "signal rms: " << csv::format_double(r.signal_rms) << '\n';
    io.out << "rmse default: " << csv::format_double(r.rmse_default) << '\n';
    io.out << "rmse tuned: " << csv::format_double(r.rmse_tuned) << " (" << to_string(r.tuned_choice);
    if (r.tuned_config) {
        io.out << ", tau=" << csv::format_double(r.tuned_config->tau) << ", n_lambda=" << r.tuned_config->n_lambda;
    }
    io.out << ")\n";
    io.out << "rmse lars: " << csv::format_double(r.rmse_lars) << '\n';
    return exit_ok;
}

// ---------------------------------------------------------------------------

/// Parses `args` (without the program name) and runs one subcommand.
inline int run(const std::vector<std::string>& args, Streams io = {})
{
    CLI::App app{"Lasso path solvers with surrogate-tuned configuration"};
    app.require_subcommand(1);

    SummaryArgs sum;
    auto* gen = app.add_subcommand("generate-summary", "run simulations and append summary records");
    gen->add_option("--scenario", sum.scenario, "scenario JSON file (default: generated preset)");
    gen->add_option("--preset", sum.preset, "desk or full ranges for generated scenarios");
    gen->add_option("--records", sum.records, "approximate record count of a generated preset");
    gen->add_option("--summary", sum.summary, "output CSV (default: OUT/summary.csv)");
    gen->add_option("--out", sum.out, "output directory");
    gen->add_option("--seed", sum.seed, "master seed");
    gen->add_flag("--quiet", sum.quiet, "no progress lines");

    ScenarioFileArgs scen;
    auto* mk_scen = app.add_subcommand("make-scenarios", "write a preset scenario file");
    mk_scen->add_option("--preset", scen.preset, "desk or full");
    mk_scen->add_option("--records", scen.records, "approximate record count");
    mk_scen->add_option("--seed", scen.seed, "seed");
    mk_scen->add_option("--out", scen.out, "output JSON file")->required();

    TrainArgs tr;
    auto* train_cmd = app.add_subcommand("train-surrogate", "train the performance and LARS-time models");
    train_cmd->add_option("--summary", tr.summary, "summary CSV")->required();
    train_cmd->add_option("--out", tr.out, "output directory");
    train_cmd->add_option("--perf-model", tr.perf_model, "performance model path (default: OUT/perf.model)");
    train_cmd->add_option("--lars-model", tr.lars_model, "LARS model path (default: OUT/lars.model)");
    train_cmd->add_option("--seed", tr.seed, "seed");
    train_cmd->add_option("--epochs", tr.epochs, "training epochs");
    train_cmd->add_option("--perf-batch", tr.perf_batch, "performance model batch size");
    train_cmd->add_option("--lars-batch", tr.lars_batch, "LARS model batch size");
    train_cmd->add_flag("--calibrate", tr.calibrate, "store a reference benchmark time in the models");

    TuneArgs tu;
    auto* tune = app.add_subcommand("tune", "fit with the configuration chosen for a time budget");
    tune->add_option("--data", tu.data, "training CSV (x1..xp,y)")->required();
    tune->add_option("--new-data", tu.new_data, "CSV of rows to predict");
    tune->add_option("--perf-model", tu.perf_model, "performance model")->required();
    tune->add_option("--lars-model", tu.lars_model, "LARS model")->required();
    tune->add_option("--t-hope", tu.t_hope, "time budget in seconds");
    tune->add_option("--seed", tu.seed, "seed");
    tune->add_option("--out", tu.out, "output directory");
    tune->add_flag("--calibrate", tu.calibrate, "rescale predicted times by a benchmark");

    MakeDataArgs md;
    auto* make_data = app.add_subcommand("make-data", "write a synthetic dataset CSV");
    make_data->add_option("--n", md.n, "rows");
    make_data->add_option("--p", md.p, "predictors");
    make_data->add_option("--family", md.family, "covariance family");
    make_data->add_option("--rho", md.rho, "correlation parameter");
    make_data->add_option("--pattern", md.pattern, "beta pattern 1..4");
    make_data->add_option("--sigma", md.sigma, "noise standard deviation");
    make_data->add_option("--test-rows", md.test_rows, "extra rows written as a test set");
    make_data->add_option("--seed", md.seed, "seed");
    make_data->add_option("--out", md.out, "output CSV")->required();
    make_data->add_option("--test-out", md.test_out, "test CSV (default: OUT.test.csv)");

    DemoArgs dm;
    auto* demo = app.add_subcommand("demo-cs", "sparse signal recovery from random projections");
    demo->add_option("--length", dm.length, "signal length");
    demo->add_option("--sparsity", dm.sparsity, "fraction of nonzero entries");
    demo->add_option("--measurements", dm.measurements, "compressed dimension");
    demo->add_option("--noise", dm.noise, "measurement noise standard deviation");
    demo->add_option("--t-hope", dm.t_hope, "time budget in seconds");
    demo->add_option("--seed", dm.seed, "seed");
    demo->add_option("--perf-model", dm.perf_model, "performance model")->required();
    demo->add_option("--lars-model", dm.lars_model, "LARS model")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        io.out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        io.out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        io.err << e.what() << '\n';
        return exit_usage;
    }

    try {
        if (gen->parsed()) return cmd_generate_summary(sum, io);
        if (mk_scen->parsed()) return cmd_make_scenarios(scen, io);
        if (train_cmd->parsed()) return cmd_train_surrogate(tr, io);
        if (tune->parsed()) return cmd_tune(tu, io);
        if (make_data->parsed()) return cmd_make_data(md, io);
        if (demo->parsed()) return cmd_demo_cs(dm, io);
    } catch (const UsageError& e) {
        io.err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const Error& e) {
        io.err << "error: " << e.what() << '\n';
        return e.kind() == ErrorKind::InvalidConfig || e.kind() == ErrorKind::InvalidRho
                       || e.kind() == ErrorKind::InvalidPattern
                   ? exit_usage
                   : exit_failure;
    } catch (const std::exception& e) {
        io.err << "error: " << e.what() << '\n';
        return exit_failure;
    }
    return exit_usage;
}

} // namespace autolasso::cli
