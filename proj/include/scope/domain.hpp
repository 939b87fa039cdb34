#pragma once

// Finite metric domains, extended-real fields on them, and index sets.
//
// On a finite domain every subset is closed, so topological closure is the
// identity and all "cl" operations of the continuous theory are no-ops.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <initializer_list>
#include <iterator>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "scope/csv.hpp"
#include "scope/error.hpp"

namespace scope {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Finite set {0, ..., J-1} with an optional metric. Without a metric the
/// discrete metric is used: d(i,j) = 1 for i != j.
class Domain {
public:
    explicit Domain(std::size_t size) : size_(size) {
        if (size == 0) throw ParameterError("Domain: size must be positive");
    }

    /// `metric` is row-major J x J. Symmetry, zero diagonal and
    /// nonnegativity are always checked; the triangle inequality is checked
    /// exhaustively when J <= 64.
    Domain(std::size_t size, std::vector<double> metric) : size_(size), metric_(std::move(metric)) {
        if (size == 0) throw ParameterError("Domain: size must be positive");
        if (metric_->size() != size * size) throw ParameterError("Domain: metric must be J x J");
        for (std::size_t i = 0; i < size; ++i) {
            if (at(i, i) != 0.0) throw ParameterError("Domain: metric diagonal must be zero");
            for (std::size_t j = 0; j < size; ++j) {
                double d = at(i, j);
                if (!(d >= 0.0)) throw ParameterError("Domain: metric must be nonnegative");
                if (d != at(j, i)) throw ParameterError("Domain: metric must be symmetric");
            }
        }
        if (size <= 64 && !satisfies_triangle_inequality())
            throw ParameterError("Domain: metric violates the triangle inequality");
    }

    /// Points on a line with d(i,j) = |i - j|.
    static Domain line(std::size_t size) {
        std::vector<double> m(size * size);
        for (std::size_t i = 0; i < size; ++i)
            for (std::size_t j = 0; j < size; ++j)
                m[i * size + j] = std::abs(static_cast<double>(i) - static_cast<double>(j));
        return Domain(size, std::move(m));
    }

    std::size_t size() const noexcept { return size_; }
    bool has_metric() const noexcept { return metric_.has_value(); }

    double distance(std::size_t i, std::size_t j) const {
        if (i >= size_ || j >= size_) throw DomainMismatch("Domain::distance: index out of range");
        if (!metric_) return i == j ? 0.0 : 1.0;
        return at(i, j);
    }

    bool satisfies_triangle_inequality() const {
        if (!metric_) return true;
        for (std::size_t i = 0; i < size_; ++i)
            for (std::size_t j = 0; j < size_; ++j)
                for (std::size_t k = 0; k < size_; ++k)
                    if (at(i, j) > at(i, k) + at(k, j) * (1.0 + 1e-12)) return false;
        return true;
    }

private:
    double at(std::size_t i, std::size_t j) const { return (*metric_)[i * size_ + j]; }

    std::size_t size_;
    std::optional<std::vector<double>> metric_;
};

/// Extended-real valued function on a finite domain. Values may be +-inf,
/// never NaN.
class Field {
public:
    Field() = default;

    explicit Field(std::vector<double> values) : values_(std::move(values)) { check(); }
    Field(std::initializer_list<double> values) : values_(values) { check(); }

    static Field constant(std::size_t size, double value) { return Field(std::vector<double>(size, value)); }

    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    const std::vector<double>& values() const noexcept { return values_; }
    std::span<const double> span() const noexcept { return values_; }

    auto begin() const noexcept { return values_.begin(); }
    auto end() const noexcept { return values_.end(); }

    bool operator==(const Field&) const = default;

private:
    void check() const {
        for (double v : values_)
            if (std::isnan(v)) throw ParameterError("Field: NaN value");
    }

    std::vector<double> values_;
};

inline void require_same_size(const Field& a, const Field& b, const char* where) {
    if (a.size() != b.size())
        throw DomainMismatch(std::string(where) + ": fields live on different domains (" + std::to_string(a.size()) +
                             " vs " + std::to_string(b.size()) + ")");
}

inline void require_domain(const Field& f, const Domain& dom, const char* where) {
    if (f.size() != dom.size()) throw DomainMismatch(std::string(where) + ": field size differs from domain size");
}

/// Sorted, duplicate-free set of indices.
class IndexSet {
public:
    IndexSet() = default;

    IndexSet(std::initializer_list<std::size_t> members) : members_(members) { normalize(); }
    explicit IndexSet(std::vector<std::size_t> members) : members_(std::move(members)) { normalize(); }

    static IndexSet full(std::size_t size) {
        std::vector<std::size_t> m(size);
        for (std::size_t i = 0; i < size; ++i) m[i] = i;
        return from_sorted(std::move(m));
    }

    /// Trusts the caller: `members` must already be strictly increasing.
    static IndexSet from_sorted(std::vector<std::size_t> members) {
        IndexSet s;
        s.members_ = std::move(members);
        return s;
    }

    std::size_t size() const noexcept { return members_.size(); }
    bool empty() const noexcept { return members_.empty(); }
    const std::vector<std::size_t>& members() const noexcept { return members_; }
    auto begin() const noexcept { return members_.begin(); }
    auto end() const noexcept { return members_.end(); }

    bool contains(std::size_t i) const { return std::binary_search(members_.begin(), members_.end(), i); }

    void validate(std::size_t domain_size, const char* where = "IndexSet") const {
        if (!members_.empty() && members_.back() >= domain_size)
            throw DomainMismatch(std::string(where) + ": index " + std::to_string(members_.back()) +
                                 " out of range for domain of size " + std::to_string(domain_size));
    }

    bool operator==(const IndexSet&) const = default;

private:
    void normalize() {
        std::sort(members_.begin(), members_.end());
        members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
    }

    std::vector<std::size_t> members_;
};

inline bool is_subset(const IndexSet& a, const IndexSet& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

inline IndexSet set_union(const IndexSet& a, const IndexSet& b) {
    std::vector<std::size_t> out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return IndexSet::from_sorted(std::move(out));
}

inline IndexSet set_intersection(const IndexSet& a, const IndexSet& b) {
    std::vector<std::size_t> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return IndexSet::from_sorted(std::move(out));
}

inline IndexSet set_difference(const IndexSet& a, const IndexSet& b) {
    std::vector<std::size_t> out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return IndexSet::from_sorted(std::move(out));
}

inline IndexSet complement(const IndexSet& a, std::size_t domain_size) {
    return set_difference(IndexSet::full(domain_size), a);
}

/// Hausdorff distance between two subsets of a finite metric domain.
/// Both empty gives 0; exactly one empty gives +inf (sup over the empty set
/// is -inf, inf over it is +inf).
inline double hausdorff_distance(const IndexSet& a, const IndexSet& b, const Domain& dom) {
    a.validate(dom.size(), "hausdorff_distance");
    b.validate(dom.size(), "hausdorff_distance");
    if (a.empty() && b.empty()) return 0.0;
    if (a.empty() || b.empty()) return kInf;
    auto directed = [&](const IndexSet& from, const IndexSet& to) {
        double worst = 0.0;
        for (auto s : from) {
            double nearest = kInf;
            for (auto t : to) nearest = std::min(nearest, dom.distance(s, t));
            worst = std::max(worst, nearest);
        }
        return worst;
    };
    return std::max(directed(a, b), directed(b, a));
}

// Field CSV: header "index,value", one row per index.

inline void write_field_csv(std::ostream& out, const Field& f, int digits = 17) {
    out << "index,value\n";
    for (std::size_t i = 0; i < f.size(); ++i) out << i << ',' << csv::format_number(f[i], digits) << '\n';
}

inline Field read_field_csv(std::istream& in, const std::string& source = "field") {
    auto table = csv::read_numeric(in, source);
    std::vector<double> values(table.rows.size(), 0.0);
    std::vector<bool> seen(table.rows.size(), false);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        if (row.size() != 2) throw ParseError(source, r + 1, 1, "expected columns index,value");
        double idx = row[0];
        if (idx < 0 || idx != std::floor(idx) || idx >= static_cast<double>(values.size()))
            throw ParseError(source, r + 1, 1, "index out of range");
        auto i = static_cast<std::size_t>(idx);
        if (seen[i]) throw ParseError(source, r + 1, 1, "duplicate index");
        seen[i] = true;
        values[i] = row[1];
    }
    return Field(std::move(values));
}

inline Field read_field_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    return read_field_csv(in, path);
}

} // namespace scope
