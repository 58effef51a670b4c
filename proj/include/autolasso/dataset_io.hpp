#pragma once
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>
#include <autolasso/dataset.hpp>

namespace autolasso {
namespace csv {

inline std::vector<std::string_view> split(std::string_view line, char sep = ',')
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

/// Strict decimal parse; the whole field must be consumed.
inline bool parse_double(std::string_view s, double& out)
{
    s = trim(s);
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end;
}

/// Shortest text that parses back to the same double (17 significant digits).
inline std::string format_double(double v)
{
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

} // namespace csv

/// Reads a dataset with header `x1,...,xp,y`. Missing or non-numeric
/// fields are rejected with the offending line number.
inline Dataset read_dataset_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::Io, "cannot open " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw Error(ErrorKind::MalformedRow, path + ":1: missing header");
    }
    const auto header = csv::split(line);
    const auto p = static_cast<Index>(header.size()) - 1;
    if (p < 1) {
        throw Error(ErrorKind::MalformedRow, path + ":1: need at least one feature column and y");
    }
    for (Index j = 0; j < p; ++j) {
        if (csv::trim(header[j]) != "x" + std::to_string(j + 1)) {
            throw Error(ErrorKind::MalformedRow,
                        path + ":1: expected column x" + std::to_string(j + 1));
        }
    }
    if (csv::trim(header.back()) != "y") {
        throw Error(ErrorKind::MalformedRow, path + ":1: last column must be y");
    }

    std::vector<double> values;
    std::size_t line_no = 1;
    Index rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        const auto fields = csv::split(line);
        if (static_cast<Index>(fields.size()) != p + 1) {
            throw Error(ErrorKind::MalformedRow,
                        path + ":" + std::to_string(line_no) + ": expected "
                        + std::to_string(p + 1) + " fields");
        }
        for (const auto f : fields) {
            double v;
            if (!csv::parse_double(f, v)) {
                throw Error(ErrorKind::MalformedRow,
                            path + ":" + std::to_string(line_no) + ": bad value '"
                            + std::string(f) + "'");
            }
            values.push_back(v);
        }
        ++rows;
    }
    Matrix X(rows, p);
    Vector y(rows);
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < p; ++j) X(i, j) = values[i * (p + 1) + j];
        y[i] = values[i * (p + 1) + p];
    }
    return make_raw(std::move(X), std::move(y));
}

inline void write_dataset_csv(const std::string& path, const Matrix& X, const Vector& y)
{
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorKind::Io, "cannot write " + path);
    }
    for (Index j = 0; j < X.cols(); ++j) out << 'x' << (j + 1) << ',';
    out << "y\n";
    for (Index i = 0; i < X.rows(); ++i) {
        for (Index j = 0; j < X.cols(); ++j) out << csv::format_double(X(i, j)) << ',';
        out << csv::format_double(y[i]) << '\n';
    }
    if (!out) {
        throw Error(ErrorKind::Io, "write failed for " + path);
    }
}

} // namespace autolasso
