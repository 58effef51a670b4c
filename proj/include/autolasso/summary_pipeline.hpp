#pragma once
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>
#include <json.hpp>
#include <autolasso/model_selection.hpp>
#include <autolasso/path_eval.hpp>
#include <autolasso/summary_record.hpp>
#include <autolasso/synth_data.hpp>

namespace autolasso {

/// One simulation setting. Each replication draws a fresh covariance (for
/// the random families), beta and sample from its own seed stream.
struct Scenario
{
    Index n = 100;
    Index p = 50;
    CovFamily family = CovFamily::CompoundSymmetry;
    double rho = 0.5;
    int beta_pattern = 1;
    double sigma = 1.0;
    bool sigma_scales_with_p = false;  // sigma = p / 10
    int replications = 1;

    double noise_sd() const { return sigma_scales_with_p ? static_cast<double>(p) / 10.0 : sigma; }

    void validate() const
    {
        if (n < 10 || p < 1) {
            throw Error(ErrorKind::InvalidConfig, "scenario needs N >= 10 and p >= 1");
        }
        if (replications < 1) {
            throw Error(ErrorKind::InvalidConfig, "replications must be >= 1");
        }
        if (family == CovFamily::CompoundSymmetry || family == CovFamily::Ar1) detail::check_rho(rho);
        else if (p < 2) throw Error(ErrorKind::InvalidConfig, "random structured families need p >= 2");
        if (beta_nonzero_count(p, beta_pattern) < 1) {
            throw Error(ErrorKind::InvalidPattern,
                        "pattern " + std::to_string(beta_pattern) + " has no nonzeros for p = " + std::to_string(p));
        }
        if (!sigma_scales_with_p && !(sigma >= 0.0)) {
            throw Error(ErrorKind::InvalidConfig, "sigma must be nonnegative");
        }
    }

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

inline nlohmann::json scenario_to_json(const Scenario& s)
{
    nlohmann::json j;
    j["n"] = s.n;
    j["p"] = s.p;
    j["covariance"] = to_string(s.family);
    if (s.family == CovFamily::CompoundSymmetry || s.family == CovFamily::Ar1) j["rho"] = s.rho;
    j["beta_pattern"] = s.beta_pattern;
    if (s.sigma_scales_with_p) j["sigma"] = "p/10";
    else j["sigma"] = s.sigma;
    j["replications"] = s.replications;
    return j;
}

inline Scenario scenario_from_json(const nlohmann::json& j)
{
    Scenario s;
    s.n = j.at("n").get<Index>();
    s.p = j.at("p").get<Index>();
    s.family = parse_cov_family(j.at("covariance").get<std::string>());
    s.rho = j.value("rho", 0.5);
    s.beta_pattern = j.value("beta_pattern", 1);
    const auto& sigma = j.contains("sigma") ? j.at("sigma") : nlohmann::json(1.0);
    if (sigma.is_string()) {
        if (sigma.get<std::string>() != "p/10") {
            throw Error(ErrorKind::InvalidConfig, "sigma must be a number or \"p/10\"");
        }
        s.sigma_scales_with_p = true;
    } else {
        s.sigma = sigma.get<double>();
    }
    s.replications = j.value("replications", 1);
    s.validate();
    return s;
}

/// Scenario file: {"scenarios": [{"n": .., "p": .., "covariance": ..,
/// "rho": .., "beta_pattern": .., "sigma": number or "p/10",
/// "replications": ..}, ...]}
inline std::vector<Scenario> load_scenarios(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::Io, "cannot open scenario file " + path);
    }
    std::vector<Scenario> out;
    try {
        const auto doc = nlohmann::json::parse(in);
        std::size_t i = 0;
        for (const auto& entry : doc.at("scenarios")) {
            try {
                out.push_back(scenario_from_json(entry));
            } catch (const Error& e) {
                rethrow_with_context(e, path + ": scenario " + std::to_string(i));
            }
            ++i;
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidConfig, path + ": " + e.what());
    }
    return out;
}

inline void save_scenarios(const std::vector<Scenario>& scenarios, const std::string& path)
{
    nlohmann::json doc;
    doc["scenarios"] = nlohmann::json::array();
    for (const auto& s : scenarios) doc["scenarios"].push_back(scenario_to_json(s));
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorKind::Io, "cannot write " + path);
    }
    out << doc.dump(1) << '\n';
}

/// {1e-7, 1e-8, 1e-9} x {100, p/2, p, 2p}, with n_lambda clamped to >= 100
/// and duplicates removed.
inline std::vector<SolverConfig> summary_config_grid(Index p)
{
    std::vector<SolverConfig> out;
    for (const double tau : {1e-7, 1e-8, 1e-9}) {
        std::set<int> seen;
        for (const Index n_lambda : {Index{100}, p / 2, p, 2 * p}) {
            const int clamped = static_cast<int>(std::max<Index>(n_lambda, default_n_lambda));
            if (seen.insert(clamped).second) out.push_back(SolverConfig{tau, clamped});
        }
    }
    return out;
}

struct PresetRanges
{
    Index n_min = 30, n_max = 300;
    Index p_min = 10, p_max = 200;
};

inline PresetRanges desk_ranges() { return {}; }
inline PresetRanges full_ranges() { return {30, 3000, 10, 2980}; }

/// Random scenarios until the config grid yields at least `target_records`
/// records. N and p are log-uniform, so small problems are sampled more
/// densely; family, pattern and noise setting are uniform.
inline std::vector<Scenario> preset_scenarios(const PresetRanges& r, std::size_t target_records, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    auto log_uniform = [&](Index lo, Index hi) {
        std::uniform_real_distribution<double> u(std::log(static_cast<double>(lo)),
                                                 std::log(static_cast<double>(hi) + 1.0));
        return std::min(hi, static_cast<Index>(std::floor(std::exp(u(rng)))));
    };
    std::uniform_int_distribution<int> family(0, 3), pattern(1, 4);
    std::uniform_real_distribution<double> rho(0.1, 0.9);
    std::bernoulli_distribution scaled_sigma(0.5);
    std::vector<Scenario> out;
    std::size_t records = 0;
    while (records < target_records) {
        Scenario s;
        s.n = log_uniform(r.n_min, r.n_max);
        s.p = log_uniform(r.p_min, r.p_max);
        s.family = static_cast<CovFamily>(family(rng));
        const double r = rho(rng);
        if (s.family == CovFamily::CompoundSymmetry || s.family == CovFamily::Ar1) s.rho = r;
        s.beta_pattern = pattern(rng);
        s.sigma_scales_with_p = scaled_sigma(rng);
        s.validate();
        records += summary_config_grid(s.p).size();
        out.push_back(s);
    }
    return out;
}

inline std::vector<Scenario> desk_preset(std::size_t target_records = 5000, std::uint64_t seed = 1)
{
    return preset_scenarios(desk_ranges(), target_records, seed);
}

/// Realized replication: the true covariance and coefficients and the
/// raw training sample.
struct ScenarioInstance
{
    Matrix cov;
    Vector beta;
    Dataset raw;
    Gamma gamma{};
};

inline ScenarioInstance instantiate(const Scenario& s, std::uint64_t seed)
{
    s.validate();
    ScenarioInstance inst;
    inst.cov = build_covariance(CovarianceSpec{s.family, s.p, s.rho, derive_seed(seed, 0)});
    inst.beta = beta_pattern(s.p, s.beta_pattern, derive_seed(seed, 1));
    inst.raw = sample_dataset(s.n, inst.cov, inst.beta, s.noise_sd(), derive_seed(seed, 2)).train;
    inst.gamma = eigen_features(inst.cov);
    return inst;
}

struct RunOptions
{
    int folds = 10;
    int lars_fractions = 100;
    SpeSpec spe;
    CdOptions cd;
    LarsOptions lars;
};

namespace detail {

template <class F>
double seconds(F&& f)
{
    const auto start = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

} // namespace detail

/// Records of one replication: one per configuration. SPE is measured
/// against the exact path of the same data, t_glmnet around the CD path
/// plus its cross-validation, and t_lars (exact path plus CV) on the first
/// record only. Failures leave fields empty and are reported to `errors`.
inline std::vector<SummaryRecord> run_replication(const ScenarioInstance& inst,
                                                  const std::vector<SolverConfig>& configs,
                                                  std::uint64_t seed,
                                                  const RunOptions& options = {},
                                                  std::vector<std::string>* errors = nullptr)
{
    if (configs.empty()) {
        throw Error(ErrorKind::InvalidConfig, "config grid is empty");
    }
    auto note = [&](const std::string& what) {
        if (errors) errors->push_back(what);
    };
    const Index n = inst.raw.n(), p = inst.raw.p();
    std::vector<SummaryRecord> out;
    for (const auto& c : configs) {
        SummaryRecord r;
        r.n = n;
        r.p = p;
        r.gamma = inst.gamma;
        r.tau = c.tau;
        r.n_lambda = c.n_lambda;
        out.push_back(r);
    }

    Dataset data;
    try {
        data = standardize(inst.raw);
    } catch (const Error& e) {
        note(std::string("standardize: ") + e.what());
        return out;
    }
    const auto cv_seed = derive_seed(seed, 3);

    std::optional<ExactPath> exact;
    try {
        LarsCvFit fit;
        const double t = detail::seconds([&] {
            fit = fit_lars_with_cv(data, options.folds, options.lars_fractions, cv_seed, options.lars);
        });
        exact = std::move(fit.path);
        out.front().t_lars = t;
    } catch (const Error& e) {
        note(std::string("lars: ") + e.what());
    }

    for (auto& r : out) {
        try {
            const SolverConfig config{r.tau, r.n_lambda};
            config.validate();
            CdCvFit fit;
            const double t = detail::seconds([&] {
                const auto grid = extended_lambda_grid(data, config.n_lambda);
                fit = fit_cd_with_cv(data, grid, config.tau, options.folds, cv_seed, options.cd);
            });
            r.t_glmnet = t;
            if (exact) r.spe = spe(*exact, fit.path, options.spe);
        } catch (const Error& e) {
            note("config (tau=" + csv::format_double(r.tau) + ", n_lambda=" + std::to_string(r.n_lambda)
                 + "): " + e.what());
        }
    }
    return out;
}

/// All replications of a scenario; replication r uses derive_seed(seed, r).
inline std::vector<SummaryRecord> run_scenario(const Scenario& s,
                                               const std::vector<SolverConfig>& configs,
                                               std::uint64_t seed,
                                               const RunOptions& options = {},
                                               std::vector<std::string>* errors = nullptr)
{
    s.validate();
    std::vector<SummaryRecord> out;
    for (int rep = 0; rep < s.replications; ++rep) {
        const auto rep_seed = derive_seed(seed, static_cast<std::uint64_t>(rep));
        ScenarioInstance inst;
        try {
            inst = instantiate(s, rep_seed);
        } catch (const Error& e) {
            if (errors) errors->push_back(std::string("instantiate: ") + e.what());
            continue;
        }
        auto records = run_replication(inst, configs, rep_seed, options, errors);
        out.insert(out.end(), records.begin(), records.end());
    }
    return out;
}

using ConfigSampler = std::function<std::vector<SolverConfig>(const Scenario&)>;

inline ConfigSampler default_config_sampler()
{
    return [](const Scenario& s) { return summary_config_grid(s.p); };
}

inline std::string journal_path(const std::string& output) { return output + ".journal"; }

inline std::set<std::size_t> read_journal(const std::string& path)
{
    std::set<std::size_t> done;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
        const auto t = csv::trim(line);
        if (t.empty()) continue;
        double v;
        if (!csv::parse_double(t, v) || v < 0 || v != std::floor(v)) {
            throw Error(ErrorKind::CorruptFile, path + ": bad journal line '" + std::string(t) + "'");
        }
        done.insert(static_cast<std::size_t>(v));
    }
    return done;
}

struct BuildProgress
{
    std::size_t scenario = 0;
    std::size_t total = 0;
    std::size_t records = 0;
    std::vector<std::string> errors;
};

/// Runs every scenario not yet listed in the journal, appending its records
/// to `output` and then its index to the journal. Scenario i is seeded with
/// derive_seed(master_seed, i). Returns the number of records appended.
inline std::size_t build_summary(const std::vector<Scenario>& scenarios,
                                 const ConfigSampler& sampler,
                                 std::uint64_t master_seed,
                                 const std::string& output,
                                 const RunOptions& options = {},
                                 const std::function<void(const BuildProgress&)>& progress = {})
{
    const auto journal_file = journal_path(output);
    const auto done = read_journal(journal_file);
    RecordWriter writer(output);
    std::ofstream journal(journal_file, std::ios::app);
    if (!journal) {
        throw Error(ErrorKind::Io, "cannot open journal " + journal_file);
    }
    std::size_t written = 0;
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        if (done.count(i)) continue;
        BuildProgress step;
        step.scenario = i;
        step.total = scenarios.size();
        const auto records = run_scenario(scenarios[i], sampler(scenarios[i]), derive_seed(master_seed, i),
                                          options, &step.errors);
        for (const auto& r : records) writer.write(r);
        writer.flush();
        journal << i << '\n';
        journal.flush();
        if (!journal) {
            throw Error(ErrorKind::Io, "write failed for " + journal_file);
        }
        written += records.size();
        step.records = written;
        if (progress) progress(step);
    }
    return written;
}

inline std::size_t build_summary(const std::string& scenario_file,
                                 const ConfigSampler& sampler,
                                 std::uint64_t master_seed,
                                 const std::string& output,
                                 const RunOptions& options = {},
                                 const std::function<void(const BuildProgress&)>& progress = {})
{
    return build_summary(load_scenarios(scenario_file), sampler, master_seed, output, options, progress);
}

} // namespace autolasso
