#pragma once

// Excursion sets, SCoPE inclusion predicates and the max-sup statistic.

#include <algorithm>
#include <cmath>
#include <vector>

#include "scope/domain.hpp"

namespace scope {

struct ThresholdFamily {
    std::vector<Field> lower; // C^-
    std::vector<Field> upper; // C^+

    static ThresholdFamily single(const Field& c) { return {{c}, {c}}; }
};

/// Estimated SCoPE bands c -+ q tau sigma.
struct ScopeBands {
    double q = 0.0;
    double tau = 1.0;
    Field sigma;

    ScopeBands() = default;
    ScopeBands(double q_, double tau_, Field sigma_) : q(q_), tau(tau_), sigma(std::move(sigma_)) { validate(); }

    void validate() const {
        if (!std::isfinite(q)) throw ParameterError("ScopeBands: q must be finite");
        if (!(tau > 0.0) || !std::isfinite(tau)) throw ParameterError("ScopeBands: tau must be positive");
        for (double s : sigma)
            if (!(s > 0.0) || !std::isfinite(s)) throw ParameterError("ScopeBands: sigma must be positive and finite");
    }

    double half_width(std::size_t i) const { return q * tau * sigma[i]; }
};

struct Partition3 {
    IndexSet lower;
    IndexSet middle;
    IndexSet upper;
};

namespace detail {

// Infinite thresholds are never shifted.
inline double shift(double c, double d) { return std::isinf(c) ? c : c + d; }

} // namespace detail

inline IndexSet lower_excursion(const Field& f, const Field& c, bool closed = false) {
    require_same_size(f, c, "lower_excursion");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (closed ? f[i] <= c[i] : f[i] < c[i]) out.push_back(i);
    return IndexSet::from_sorted(std::move(out));
}

inline IndexSet upper_excursion(const Field& f, const Field& c, bool closed = false) {
    require_same_size(f, c, "upper_excursion");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (closed ? f[i] >= c[i] : f[i] > c[i]) out.push_back(i);
    return IndexSet::from_sorted(std::move(out));
}

/// c + sign * q tau sigma, leaving +-inf untouched.
inline Field shifted_threshold(const Field& c, const ScopeBands& bands, int sign) {
    require_same_size(c, bands.sigma, "shifted_threshold");
    std::vector<double> v(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) v[i] = detail::shift(c[i], sign * bands.half_width(i));
    return Field(std::move(v));
}

/// Lower estimate L-hat_{c - q tau sigma}.
inline IndexSet estimated_lower(const Field& mu_hat, const Field& c, const ScopeBands& bands, bool closed = false) {
    return lower_excursion(mu_hat, shifted_threshold(c, bands, -1), closed);
}

/// Upper estimate U-hat_{c + q tau sigma}.
inline IndexSet estimated_upper(const Field& mu_hat, const Field& c, const ScopeBands& bands, bool closed = false) {
    return upper_excursion(mu_hat, shifted_threshold(c, bands, +1), closed);
}

inline bool scope_event(const Field& mu_hat, const Field& mu, const ScopeBands& bands, const ThresholdFamily& fam) {
    require_same_size(mu_hat, mu, "scope_event");
    require_same_size(mu_hat, bands.sigma, "scope_event");
    for (const auto& c : fam.lower) {
        require_same_size(mu, c, "scope_event");
        for (std::size_t i = 0; i < mu.size(); ++i)
            if (mu_hat[i] < detail::shift(c[i], -bands.half_width(i)) && !(mu[i] < c[i])) return false;
    }
    for (const auto& c : fam.upper) {
        require_same_size(mu, c, "scope_event");
        for (std::size_t i = 0; i < mu.size(); ++i)
            if (mu_hat[i] > detail::shift(c[i], bands.half_width(i)) && !(mu[i] > c[i])) return false;
    }
    return true;
}

/// max(sup_{neg} -f, sup_{pos} f); sup over the empty set is -inf.
inline double t_stat(std::span<const double> f, const IndexSet& neg, const IndexSet& pos) {
    double best = -kInf;
    for (auto i : neg) best = std::max(best, -f[i]);
    for (auto i : pos) best = std::max(best, f[i]);
    return best;
}

inline double t_stat(const Field& f, const IndexSet& neg, const IndexSet& pos) {
    neg.validate(f.size(), "t_stat");
    pos.validate(f.size(), "t_stat");
    return t_stat(f.span(), neg, pos);
}

inline Partition3 partition3(const Field& mu_hat, const Field& b_minus, const Field& b_plus, const ScopeBands& bands) {
    require_same_size(b_minus, b_plus, "partition3");
    for (std::size_t i = 0; i < b_minus.size(); ++i)
        if (b_minus[i] > b_plus[i])
            throw ThresholdOrderError("partition3: b_minus exceeds b_plus at index " + std::to_string(i));
    Partition3 p;
    p.lower = estimated_lower(mu_hat, b_minus, bands);
    p.upper = estimated_upper(mu_hat, b_plus, bands);
    p.middle = complement(set_union(p.lower, p.upper), mu_hat.size());
    return p;
}

/// C-hat_k = S minus (L-hat_{c_k - q tau sigma} union U-hat_{c_k + q tau sigma}).
inline std::vector<IndexSet> contour_regions(const Field& mu_hat, const std::vector<double>& levels,
                                             const ScopeBands& bands) {
    std::vector<IndexSet> out;
    out.reserve(levels.size());
    for (double level : levels) {
        if (!std::isfinite(level)) throw ParameterError("contour_regions: levels must be finite");
        const auto c = Field::constant(mu_hat.size(), level);
        out.push_back(
            complement(set_union(estimated_lower(mu_hat, c, bands), estimated_upper(mu_hat, c, bands)), mu_hat.size()));
    }
    return out;
}

struct RoiThresholds {
    Field c_plus;  // b on the RoI, +inf off it
    Field c_minus; // b on the RoI, -inf off it
};

inline RoiThresholds roi_adapt(const Field& b, const IndexSet& roi) {
    roi.validate(b.size(), "roi_adapt");
    std::vector<double> plus(b.size(), kInf), minus(b.size(), -kInf);
    for (auto i : roi) plus[i] = minus[i] = b[i];
    return {Field(std::move(plus)), Field(std::move(minus))};
}

struct ScbScopeResult {
    bool band_covers;
    bool inclusions_hold;
};

/// Band coverage versus SCoPE inclusions over probes plus mu itself.
inline ScbScopeResult scb_scope_equivalence(const Field& mu_hat, const Field& mu, const Field& sigma_hat, double tau,
                                            double q, const std::vector<Field>& probe_thresholds) {
    require_same_size(mu_hat, mu, "scb_scope_equivalence");
    ScopeBands bands(q, tau, sigma_hat);
    require_same_size(mu_hat, sigma_hat, "scb_scope_equivalence");
    bool covers = true;
    for (std::size_t i = 0; i < mu.size(); ++i)
        if (!(mu_hat[i] >= mu[i] - bands.half_width(i) && mu_hat[i] <= mu[i] + bands.half_width(i))) covers = false;
    ThresholdFamily fam{probe_thresholds, probe_thresholds};
    fam.lower.push_back(mu);
    fam.upper.push_back(mu);
    return {covers, scope_event(mu_hat, mu, bands, fam)};
}

} // namespace scope
