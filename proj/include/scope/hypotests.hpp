#pragma once

// Relevance and equivalence tests built on SCoPE sets, plus the Hommel and
// Benjamini-Hochberg baselines.
//
// Null hypotheses: relevance H0,s : b-(s) <= mu(s) <= b+(s); equivalence is the
// complement. Oracle quantiles take the true mu, shift the band by Delta
// (or Delta^e) until it touches mu and calibrate on the touching points.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "scope/excursion.hpp"
#include "scope/preimage.hpp"
#include "scope/quantile.hpp"

namespace scope {

struct BandSpec {
    Field b_minus;
    Field b_plus;

    void validate(std::size_t J) const {
        if (b_minus.size() != J || b_plus.size() != J) throw DomainMismatch("BandSpec: band size differs from field");
        for (std::size_t i = 0; i < J; ++i)
            if (b_minus[i] > b_plus[i])
                throw ThresholdOrderError("BandSpec: b_minus exceeds b_plus at index " + std::to_string(i));
    }

    void require_gap(const char* where) const {
        double gap = kInf;
        for (std::size_t i = 0; i < b_minus.size(); ++i) {
            const double g = (std::isinf(b_plus[i]) || std::isinf(b_minus[i])) ? kInf : b_plus[i] - b_minus[i];
            gap = std::min(gap, g);
        }
        if (!(gap > 0.0)) throw PreconditionError(std::string(where) + ": band gap inf(b+ - b-) must be positive");
    }
};

enum class TestKind { grT, lrT, eT, leT };

inline const char* to_string(TestKind k) {
    switch (k) {
    case TestKind::grT:
        return "grT";
    case TestKind::lrT:
        return "lrT";
    case TestKind::eT:
        return "eT";
    case TestKind::leT:
        return "leT";
    }
    return "?";
}

struct TestDecision {
    TestKind kind;
    std::optional<bool> global_reject; // grT: relevance found; eT: equivalence concluded
    IndexSet rejected;                 // lrT, leT
    QuantileEstimate quantile;
    double delta = 0.0; // Delta (local tests) or Delta^e (global tests)
};

struct DeltaRel {
    double delta;
    double delta_minus;
    double delta_plus;
};

/// Delta+- = inf_s |mu - b+-|, infinite band sides contribute +inf.
inline DeltaRel delta_rel(const Field& mu, const BandSpec& band) {
    band.validate(mu.size());
    double dm = kInf, dp = kInf;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        if (!std::isinf(band.b_minus[i])) dm = std::min(dm, std::abs(mu[i] - band.b_minus[i]));
        if (!std::isinf(band.b_plus[i])) dp = std::min(dp, std::abs(mu[i] - band.b_plus[i]));
    }
    return {std::min(dm, dp), dm, dp};
}

/// Delta^e = max(sup (mu - b+), sup (b- - mu)).
inline double delta_eqv(const Field& mu, const BandSpec& band) {
    band.validate(mu.size());
    double d = -kInf;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        if (!std::isinf(band.b_plus[i])) d = std::max(d, mu[i] - band.b_plus[i]);
        if (!std::isinf(band.b_minus[i])) d = std::max(d, band.b_minus[i] - mu[i]);
    }
    return d;
}

// Quantile sources -----------------------------------------------------------

struct FixedQuantile {
    double q;
};
/// Exact law for iid t_df limits on the touching sets (df = inf: normal).
struct OracleExact {
    double df = kInf;
};
struct OracleMC {
    CovStructure noise = IidNormal{};
    std::size_t reps = 10000;
    std::uint64_t seed = 0;
};
/// Experimental: Delta estimated from mu_hat, touching sets from the
/// thickened plug-in estimator with k from `policy`, exact iid law.
struct PluginQuantile {
    KPolicy policy;
    std::size_t N;
    double df;
};
using QuantileSource = std::variant<FixedQuantile, OracleExact, OracleMC, PluginQuantile>;

struct TestOptions {
    double alpha = 0.1;
    double touch_tol = 1e-9;
};

namespace detail {

inline Field shift_field(const Field& b, double d) {
    std::vector<double> v(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) v[i] = shift(b[i], d);
    return Field(std::move(v));
}

inline bool is_oracle(const QuantileSource& src) {
    return std::holds_alternative<OracleExact>(src) || std::holds_alternative<OracleMC>(src);
}

struct TouchSets {
    IndexSet neg;
    IndexSet pos;
};

// Calibrating sets for reference mean m: neg = u^{-1}_+ of `c_neg`,
// pos = u^{-1}_- of `c_pos`. Plug-in mode thickens by k tau sigma.
inline TouchSets touch_sets(const Field& m, const Field& c_neg, const Field& c_pos, const ScopeBands& bands,
                            const QuantileSource& src, double tol) {
    if (auto pl = std::get_if<PluginQuantile>(&src)) {
        const double k = resolve_k(pl->policy, pl->N, m.size(), pl->df);
        return {plugin_preimage(m, {c_neg}, bands.sigma, bands.tau, k, Side::plus),
                plugin_preimage(m, {c_pos}, bands.sigma, bands.tau, k, Side::minus)};
    }
    return {oracle_preimage(m, {c_neg}, 0.0, Side::plus, tol), oracle_preimage(m, {c_pos}, 0.0, Side::minus, tol)};
}

inline QuantileEstimate resolve_quantile(const QuantileSource& src, std::size_t J, const TouchSets& sets,
                                         double alpha, Tail tail) {
    if (auto f = std::get_if<FixedQuantile>(&src)) {
        QuantileEstimate est;
        est.q = f->q;
        est.alpha = alpha;
        est.method = "fixed";
        est.support_size = set_union(sets.neg, sets.pos).size();
        return est;
    }
    if (auto e = std::get_if<OracleExact>(&src)) return tstat_iid_quantile(sets.neg, sets.pos, alpha, e->df, tail);
    if (auto mc = std::get_if<OracleMC>(&src))
        return mc_oracle_quantile(mc->noise, J, sets.neg, sets.pos, alpha, mc->reps, mc->seed, tail);
    const auto& pl = std::get<PluginQuantile>(src);
    auto est = tstat_iid_quantile(sets.neg, sets.pos, alpha, pl.df, tail);
    est.method = "plugin";
    return est;
}

inline const Field& reference_mean(const Field& mu_hat, const std::optional<Field>& mu, const QuantileSource& src) {
    if (is_oracle(src)) {
        if (!mu) throw ParameterError("oracle quantile source requires the true mean");
        require_same_size(mu_hat, *mu, "hypotests");
        return *mu;
    }
    return mu_hat;
}

} // namespace detail

/// Global relevance test: reject iff L-hat_{b- - q tau sigma} or U-hat_{b+ + q tau sigma} is nonempty.
inline TestDecision grt(const Field& mu_hat, const BandSpec& band, const ScopeBands& bands, const QuantileSource& src,
                        const std::optional<Field>& mu = std::nullopt, const TestOptions& opt = {}) {
    band.validate(mu_hat.size());
    TestDecision d{TestKind::grT, std::nullopt, {}, {}, 0.0};
    if (std::holds_alternative<FixedQuantile>(src)) {
        d.quantile = detail::resolve_quantile(src, mu_hat.size(), {}, opt.alpha, Tail::upper);
    } else {
        const Field& m = detail::reference_mean(mu_hat, mu, src);
        d.delta = delta_eqv(m, band);
        detail::TouchSets sets;
        if (std::isfinite(d.delta))
            sets = detail::touch_sets(m, detail::shift_field(band.b_minus, -d.delta),
                                      detail::shift_field(band.b_plus, d.delta), bands, src, opt.touch_tol);
        d.quantile = detail::resolve_quantile(src, mu_hat.size(), sets, opt.alpha, Tail::upper);
    }
    ScopeBands b = bands;
    b.q = d.quantile.q;
    d.global_reject = !estimated_lower(mu_hat, band.b_minus, b).empty() || !estimated_upper(mu_hat, band.b_plus, b).empty();
    return d;
}

/// Local relevance test: rejected = L-hat_{b- - q tau sigma} union U-hat_{b+ + q tau sigma}.
inline TestDecision lrt(const Field& mu_hat, const BandSpec& band, const ScopeBands& bands, const QuantileSource& src,
                        const std::optional<Field>& mu = std::nullopt, const TestOptions& opt = {}) {
    band.validate(mu_hat.size());
    TestDecision d{TestKind::lrT, std::nullopt, {}, {}, 0.0};
    if (std::holds_alternative<FixedQuantile>(src)) {
        d.quantile = detail::resolve_quantile(src, mu_hat.size(), {}, opt.alpha, Tail::upper);
    } else {
        const Field& m = detail::reference_mean(mu_hat, mu, src);
        d.delta = delta_rel(m, band).delta;
        detail::TouchSets sets;
        if (std::isfinite(d.delta))
            sets = detail::touch_sets(m, detail::shift_field(band.b_minus, d.delta),
                                      detail::shift_field(band.b_plus, -d.delta), bands, src, opt.touch_tol);
        d.quantile = detail::resolve_quantile(src, mu_hat.size(), sets, opt.alpha, Tail::upper);
    }
    ScopeBands b = bands;
    b.q = d.quantile.q;
    d.rejected = set_union(estimated_lower(mu_hat, band.b_minus, b), estimated_upper(mu_hat, band.b_plus, b));
    return d;
}

/// eT decision in sup form: max(sup (mu_hat - b+)/sigma, sup (b- - mu_hat)/sigma) <= tau q.
inline bool et_sup_form(const Field& mu_hat, const BandSpec& band, const ScopeBands& bands, double q) {
    double worst = -kInf;
    for (std::size_t i = 0; i < mu_hat.size(); ++i) {
        if (!std::isinf(band.b_plus[i])) worst = std::max(worst, (mu_hat[i] - band.b_plus[i]) / bands.sigma[i]);
        if (!std::isinf(band.b_minus[i])) worst = std::max(worst, (band.b_minus[i] - mu_hat[i]) / bands.sigma[i]);
    }
    return worst <= bands.tau * q;
}

/// Global equivalence test with lower-tail quantile; global_reject means
/// equivalence is concluded (both shifted excursion sets empty).
inline TestDecision et(const Field& mu_hat, const BandSpec& band, const ScopeBands& bands, const QuantileSource& src,
                       const std::optional<Field>& mu = std::nullopt, const TestOptions& opt = {}) {
    band.validate(mu_hat.size());
    band.require_gap("et");
    TestDecision d{TestKind::eT, std::nullopt, {}, {}, 0.0};
    if (std::holds_alternative<FixedQuantile>(src)) {
        d.quantile = detail::resolve_quantile(src, mu_hat.size(), {}, opt.alpha, Tail::lower);
    } else {
        const Field& m = detail::reference_mean(mu_hat, mu, src);
        d.delta = delta_eqv(m, band);
        detail::TouchSets sets;
        if (std::isfinite(d.delta))
            sets = detail::touch_sets(m, detail::shift_field(band.b_minus, -d.delta),
                                      detail::shift_field(band.b_plus, d.delta), bands, src, opt.touch_tol);
        d.quantile = detail::resolve_quantile(src, mu_hat.size(), sets, opt.alpha, Tail::lower);
    }
    if (!std::isfinite(d.quantile.q)) {
        d.global_reject = false;
        return d;
    }
    ScopeBands b = bands;
    b.q = d.quantile.q;
    d.global_reject = estimated_lower(mu_hat, band.b_minus, b).empty() && estimated_upper(mu_hat, band.b_plus, b).empty();
    return d;
}

/// Local equivalence test: rejected = L-hat_{b+ - tau q sigma} intersect U-hat_{b- + tau q sigma},
/// the points whose band mu_hat -+ tau q sigma fits strictly inside [b-, b+].
inline TestDecision let_(const Field& mu_hat, const BandSpec& band, const ScopeBands& bands,
                         const QuantileSource& src, const std::optional<Field>& mu = std::nullopt,
                         const TestOptions& opt = {}) {
    band.validate(mu_hat.size());
    band.require_gap("let_");
    TestDecision d{TestKind::leT, std::nullopt, {}, {}, 0.0};
    if (std::holds_alternative<FixedQuantile>(src)) {
        d.quantile = detail::resolve_quantile(src, mu_hat.size(), {}, opt.alpha, Tail::upper);
    } else {
        const Field& m = detail::reference_mean(mu_hat, mu, src);
        d.delta = delta_rel(m, band).delta;
        detail::TouchSets sets;
        if (std::isfinite(d.delta))
            sets = detail::touch_sets(m, detail::shift_field(band.b_plus, d.delta),
                                      detail::shift_field(band.b_minus, -d.delta), bands, src, opt.touch_tol);
        d.quantile = detail::resolve_quantile(src, mu_hat.size(), sets, opt.alpha, Tail::upper);
    }
    ScopeBands b = bands;
    b.q = d.quantile.q;
    d.rejected = set_intersection(estimated_lower(mu_hat, band.b_plus, b), estimated_upper(mu_hat, band.b_minus, b));
    return d;
}

// Multiple-testing baselines ---------------------------------------------------

namespace detail {
inline void check_pvalues(const std::vector<double>& p, double alpha, const char* where) {
    require_alpha(alpha, where);
    for (double v : p)
        if (!(v >= 0.0 && v <= 1.0)) throw ParameterError(std::string(where) + ": p-values must lie in [0,1]");
}

inline std::vector<std::size_t> order_of(const std::vector<double>& p) {
    std::vector<std::size_t> o(p.size());
    std::iota(o.begin(), o.end(), 0);
    std::stable_sort(o.begin(), o.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
    return o;
}
} // namespace detail

/// Hommel adjusted p-values (the O(J^2) formulation used by R's p.adjust).
inline std::vector<double> hommel_adjust(const std::vector<double>& pvalues) {
    const std::size_t n = pvalues.size();
    if (n <= 1) return pvalues;
    const auto o = detail::order_of(pvalues);
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = pvalues[o[i]];
    double init = kInf;
    for (std::size_t i = 0; i < n; ++i) init = std::min(init, static_cast<double>(n) * p[i] / static_cast<double>(i + 1));
    std::vector<double> q(n, init), pa(n, init);
    for (std::size_t m = n - 1; m >= 2; --m) {
        // 1-based: i1 = 1..n-m+1, i2 = n-m+2..n
        const std::size_t n1 = n - m + 1;
        double q1 = kInf;
        for (std::size_t k = 2; k <= m; ++k) q1 = std::min(q1, static_cast<double>(m) * p[n1 + k - 2] / static_cast<double>(k));
        for (std::size_t i = 0; i < n1; ++i) q[i] = std::min(static_cast<double>(m) * p[i], q1);
        for (std::size_t i = n1; i < n; ++i) q[i] = q[n1 - 1];
        for (std::size_t i = 0; i < n; ++i) pa[i] = std::max(pa[i], q[i]);
    }
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[o[i]] = std::min(1.0, std::max(pa[i], p[i]));
    return out;
}

inline IndexSet hommel(const std::vector<double>& pvalues, double alpha) {
    detail::check_pvalues(pvalues, alpha, "hommel");
    const auto adj = hommel_adjust(pvalues);
    std::vector<std::size_t> rej;
    for (std::size_t i = 0; i < adj.size(); ++i)
        if (adj[i] <= alpha) rej.push_back(i);
    return IndexSet::from_sorted(std::move(rej));
}

/// Benjamini-Hochberg step-up.
inline IndexSet bh(const std::vector<double>& pvalues, double alpha) {
    detail::check_pvalues(pvalues, alpha, "bh");
    const std::size_t n = pvalues.size();
    const auto o = detail::order_of(pvalues);
    std::size_t k = 0;
    for (std::size_t r = n; r >= 1; --r) {
        if (pvalues[o[r - 1]] <= static_cast<double>(r) * alpha / static_cast<double>(n)) {
            k = r;
            break;
        }
    }
    std::vector<std::size_t> rej(o.begin(), o.begin() + static_cast<std::ptrdiff_t>(k));
    return IndexSet(std::move(rej));
}

} // namespace scope
