#pragma once
#include <array>
#include <fstream>
#include <optional>
#include <string>
#include <vector>
#include <autolasso/dataset_io.hpp>
#include <autolasso/synth_data.hpp>

namespace autolasso {

/// One row of the summary dataset: data characteristics, configuration and
/// measured performance. A failed configuration keeps its inputs and leaves
/// `spe`/`t_glmnet` empty.
struct SummaryRecord
{
    Index n = 0;
    Index p = 0;
    Gamma gamma{};
    double tau = 0.0;
    int n_lambda = 0;
    std::optional<double> spe;
    std::optional<double> t_glmnet;
    std::optional<double> t_lars;

    bool failed() const { return !spe || !t_glmnet; }

    friend bool operator==(const SummaryRecord&, const SummaryRecord&) = default;
};

inline constexpr std::array<const char*, 17> summary_columns = {
    "n", "p", "g1", "g2", "g3", "g4", "g5", "gm5", "gm4", "gm3", "gm2", "gm1",
    "tau", "n_lambda", "spe", "t_glmnet", "t_lars",
};

inline std::string summary_header()
{
    std::string h;
    for (std::size_t i = 0; i < summary_columns.size(); ++i) {
        if (i) h += ',';
        h += summary_columns[i];
    }
    return h;
}

inline std::string format_record(const SummaryRecord& r)
{
    auto opt = [](const std::optional<double>& v) { return v ? csv::format_double(*v) : std::string(); };
    std::string line = std::to_string(r.n) + ',' + std::to_string(r.p);
    for (const double g : r.gamma) line += ',' + csv::format_double(g);
    line += ',' + csv::format_double(r.tau) + ',' + std::to_string(r.n_lambda);
    line += ',' + opt(r.spe) + ',' + opt(r.t_glmnet) + ',' + opt(r.t_lars);
    return line;
}

/// Appends records to a summary CSV, writing the header when the file is new.
class RecordWriter
{
public:
    explicit RecordWriter(const std::string& path)
    {
        bool fresh = true;
        {
            std::ifstream probe(path, std::ios::ate);
            fresh = !probe || probe.tellg() == 0;
        }
        out_.open(path, std::ios::app);
        if (!out_) {
            throw Error(ErrorKind::Io, "cannot open " + path + " for writing");
        }
        if (fresh) out_ << summary_header() << '\n';
        path_ = path;
    }

    void write(const SummaryRecord& r)
    {
        out_ << format_record(r) << '\n';
        if (!out_) {
            throw Error(ErrorKind::Io, "write failed for " + path_);
        }
    }

    void flush() { out_.flush(); }

private:
    std::ofstream out_;
    std::string path_;
};

/// Streams records one at a time; only the current line is held in memory.
class RecordReader
{
public:
    explicit RecordReader(const std::string& path) : in_(path), path_(path)
    {
        if (!in_) {
            throw Error(ErrorKind::Io, "cannot open " + path);
        }
        std::string header;
        if (!std::getline(in_, header)) {
            throw Error(ErrorKind::MalformedRow, path + ":1: missing header");
        }
        line_no_ = 1;
        const auto fields = csv::split(csv::trim(header));
        for (std::size_t i = 0; i < summary_columns.size(); ++i) {
            if (i >= fields.size() || csv::trim(fields[i]) != summary_columns[i]) {
                throw Error(ErrorKind::MalformedRow,
                            path + ":1: header is missing column '" + summary_columns[i] + "'");
            }
        }
        if (fields.size() != summary_columns.size()) {
            throw Error(ErrorKind::MalformedRow, path + ":1: unexpected extra columns");
        }
    }

    bool next(SummaryRecord& r)
    {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            if (csv::trim(line).empty()) continue;
            parse(line, r);
            return true;
        }
        return false;
    }

    std::size_t line_number() const { return line_no_; }

private:
    [[noreturn]] void fail(const std::string& what) const
    {
        throw Error(ErrorKind::MalformedRow, path_ + ":" + std::to_string(line_no_) + ": " + what);
    }

    double number(std::string_view f, const char* column) const
    {
        double v;
        if (!csv::parse_double(f, v)) fail(std::string("bad value in column ") + column);
        return v;
    }

    std::optional<double> optional_number(std::string_view f, const char* column) const
    {
        if (csv::trim(f).empty()) return std::nullopt;
        return number(f, column);
    }

    void parse(const std::string& line, SummaryRecord& r) const
    {
        const auto f = csv::split(csv::trim(line));
        if (f.size() != summary_columns.size()) {
            fail("expected " + std::to_string(summary_columns.size()) + " fields, got "
                 + std::to_string(f.size()));
        }
        auto integer = [&](std::size_t i) {
            const double v = number(f[i], summary_columns[i]);
            if (v != std::floor(v) || v < 1) fail(std::string("column ") + summary_columns[i] + " must be a positive integer");
            return v;
        };
        r.n = static_cast<Index>(integer(0));
        r.p = static_cast<Index>(integer(1));
        for (std::size_t g = 0; g < 10; ++g) r.gamma[g] = number(f[2 + g], summary_columns[2 + g]);
        r.tau = number(f[12], "tau");
        r.n_lambda = static_cast<int>(integer(13));
        r.spe = optional_number(f[14], "spe");
        r.t_glmnet = optional_number(f[15], "t_glmnet");
        r.t_lars = optional_number(f[16], "t_lars");
    }

    std::ifstream in_;
    std::string path_;
    std::size_t line_no_ = 0;
};

inline void write_records(const std::vector<SummaryRecord>& records, const std::string& path)
{
    RecordWriter w(path);
    for (const auto& r : records) w.write(r);
    w.flush();
}

inline std::vector<SummaryRecord> read_records(const std::string& path)
{
    RecordReader reader(path);
    std::vector<SummaryRecord> out;
    SummaryRecord r;
    while (reader.next(r)) out.push_back(r);
    return out;
}

} // namespace autolasso
