#pragma once

#include <charconv>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "scope/error.hpp"

namespace scope::csv {

/// Formats a real with `digits` significant digits; infinities are written
/// as "inf" / "-inf" so that they survive a round trip.
inline std::string format_number(double x, int digits = 6) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (std::isnan(x)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

/// Shortest text that parses back to the same double.
inline std::string format_exact(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (std::isnan(x)) return "nan";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

/// Fixed-point with `decimals` decimals (used for percentages).
inline std::string format_fixed(double x, int decimals = 1) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
    return buf;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

/// Parses a real, accepting "inf", "+inf", "-inf" (any case). Returns false
/// on anything else, including NaN literals.
inline bool try_parse_number(std::string_view text, double& out) {
    auto s = std::string(trim(text));
    if (s.empty()) return false;
    std::string lower;
    for (char c : s) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (lower == "inf" || lower == "+inf" || lower == "infinity") {
        out = std::numeric_limits<double>::infinity();
        return true;
    }
    if (lower == "-inf" || lower == "-infinity") {
        out = -std::numeric_limits<double>::infinity();
        return true;
    }
    char* end = nullptr;
    errno = 0;
    double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || std::isnan(v)) return false;
    out = v;
    return true;
}

inline std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            cells.emplace_back(trim(line.substr(start, i - start)));
            start = i + 1;
        }
    }
    return cells;
}

struct Table {
    std::vector<std::string> header; // empty when the file had no header row
    std::vector<std::vector<double>> rows;
};

/// Reads a rectangular numeric CSV. The first row is treated as a header if
/// any of its cells fails to parse as a number. Blank lines and lines
/// starting with '#' are ignored.
inline Table read_numeric(std::istream& in, const std::string& source) {
    Table t;
    std::string line;
    std::size_t lineno = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        auto view = trim(line);
        if (view.empty() || view.front() == '#') continue;
        auto cells = split_line(view);
        std::vector<double> row;
        row.reserve(cells.size());
        bool numeric = true;
        std::size_t bad_col = 0;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            double v;
            if (!try_parse_number(cells[c], v)) {
                numeric = false;
                bad_col = c;
                break;
            }
            row.push_back(v);
        }
        if (!numeric) {
            if (first) {
                t.header = cells;
                first = false;
                continue;
            }
            throw ParseError(source, lineno, bad_col + 1, "not a number: '" + cells[bad_col] + "'");
        }
        first = false;
        std::size_t width = !t.rows.empty() ? t.rows.front().size() : (t.header.empty() ? row.size() : t.header.size());
        if (row.size() != width)
            throw ParseError(source, lineno, 1,
                             "expected " + std::to_string(width) + " columns, found " + std::to_string(row.size()));
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline Table read_numeric_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    return read_numeric(in, path);
}

inline Eigen::MatrixXd to_matrix(const Table& t) {
    const auto n = static_cast<Eigen::Index>(t.rows.size());
    const auto k = n == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(t.rows.front().size());
    Eigen::MatrixXd m(n, k);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < k; ++j) m(i, j) = t.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return m;
}

inline void write_matrix(std::ostream& out, const Eigen::MatrixXd& m, int digits = 17) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << format_number(m(i, j), digits);
        }
        out << '\n';
    }
}

} // namespace scope::csv
