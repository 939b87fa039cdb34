#pragma once

// Quantiles of the max-sup statistic: exact iid formulas, Storey sizing,
// Monte-Carlo over the limit process and the multiplier bootstrap.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "scope/dist.hpp"
#include "scope/domain.hpp"
#include "scope/excursion.hpp"
#include "scope/parallel.hpp"
#include "scope/preimage.hpp"

namespace scope {

enum class Sidedness { paper_one_sided, two_sided };

enum class Tail { upper, lower };

struct QuantileEstimate {
    double q = 0.0;
    std::string method;
    std::size_t support_size = 0; // points entering the statistic
    double alpha = 0.0;
    bool empty_support = false; // statistic is identically -inf
};

inline void require_alpha(double alpha, const char* where) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError(std::string(where) + ": alpha must lie in (0,1)");
}

/// inf{q : F(q)^m > 1-alpha} (one-sided) or inf{q : (2F(q)-1)^m > 1-alpha}
/// (two-sided), F the t_df CDF; m = 0 gives q = 0.
inline QuantileEstimate iid_quantile(std::size_t m, double alpha, double df,
                                     Sidedness sided = Sidedness::paper_one_sided) {
    require_alpha(alpha, "iid_quantile");
    dist::require_df(df, "iid_quantile");
    QuantileEstimate est;
    est.alpha = alpha;
    est.support_size = m;
    est.method = sided == Sidedness::two_sided ? "iid_two_sided" : "iid_one_sided";
    if (m == 0) {
        est.empty_support = true;
        return est;
    }
    const double root = std::pow(1.0 - alpha, 1.0 / static_cast<double>(m));
    const double p = sided == Sidedness::two_sided ? 0.5 * (1.0 + root) : root;
    est.q = dist::t_quantile(p, df);
    return est;
}

/// iid quantiles for every m in [0, J], computed once.
class IidQuantileTable {
public:
    IidQuantileTable() = default;
    IidQuantileTable(std::size_t J, double alpha, double df, Sidedness sided) : q_(J + 1, 0.0) {
        for (std::size_t m = 1; m <= J; ++m) q_[m] = iid_quantile(m, alpha, df, sided).q;
    }
    double operator()(std::size_t m) const { return q_.at(m); }
    std::size_t max_m() const { return q_.empty() ? 0 : q_.size() - 1; }

private:
    std::vector<double> q_;
};

// ---------------------------------------------------------------------------
// Column statistics and t-based p-values

struct ColumnStats {
    std::vector<double> mean;
    std::vector<double> sd; // divisor N-1
    std::size_t N = 0;
};

inline ColumnStats column_stats(const Eigen::MatrixXd& data) {
    const auto N = static_cast<std::size_t>(data.rows());
    if (N < 2) throw ParameterError("column_stats: need at least two rows");
    ColumnStats cs;
    cs.N = N;
    cs.mean.resize(static_cast<std::size_t>(data.cols()));
    cs.sd.resize(static_cast<std::size_t>(data.cols()));
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
        const double m = data.col(j).mean();
        const double ss = (data.col(j).array() - m).square().sum();
        const double sd = std::sqrt(ss / static_cast<double>(N - 1));
        if (!(sd > 0.0))
            throw DegenerateData(static_cast<std::size_t>(j),
                                 "column " + std::to_string(j) + " has zero sample variance");
        cs.mean[static_cast<std::size_t>(j)] = m;
        cs.sd[static_cast<std::size_t>(j)] = sd;
    }
    return cs;
}

/// sqrt(N) mean / sd per column.
inline std::vector<double> t_statistics(const ColumnStats& cs) {
    std::vector<double> t(cs.mean.size());
    const double rn = std::sqrt(static_cast<double>(cs.N));
    for (std::size_t j = 0; j < t.size(); ++j) t[j] = rn * cs.mean[j] / cs.sd[j];
    return t;
}

/// Two-sided p-values 2 P[t_df > |T|].
inline std::vector<double> t_pvalues_from_stats(const std::vector<double>& t, double df) {
    std::vector<double> p(t.size());
    for (std::size_t j = 0; j < t.size(); ++j) p[j] = std::min(1.0, 2.0 * dist::t_sf(std::abs(t[j]), df));
    return p;
}

inline std::vector<double> t_pvalues(const Eigen::MatrixXd& data) {
    const auto cs = column_stats(data);
    return t_pvalues_from_stats(t_statistics(cs), static_cast<double>(cs.N) - 1.0);
}

/// 2 #{p >= 0.5}, capped at J.
inline std::size_t storey_m0(const std::vector<double>& pvalues) {
    std::size_t count = 0;
    for (double p : pvalues) {
        if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("storey_m0: p-values must lie in [0,1]");
        if (p >= 0.5) ++count;
    }
    return std::min(pvalues.size(), 2 * count);
}

inline QuantileEstimate storey_quantile(const std::vector<double>& pvalues, double alpha, double df,
                                        Sidedness sided = Sidedness::paper_one_sided) {
    auto est = iid_quantile(storey_m0(pvalues), alpha, df, sided);
    est.method = "storey";
    return est;
}

inline QuantileEstimate storey_quantile(const Eigen::MatrixXd& data, double alpha,
                                        Sidedness sided = Sidedness::paper_one_sided) {
    return storey_quantile(t_pvalues(data), alpha, static_cast<double>(data.rows()) - 1.0, sided);
}

// ---------------------------------------------------------------------------
// Exact law of the statistic for iid symmetric limits

/// P[max(sup_neg -G, sup_pos G) <= q] for G iid with CDF F = t_df.
/// With A = neg, B = pos: (2F(q)-1)^{|A&B|} F(q)^{|A^B|} for q >= 0.
inline double tstat_iid_cdf(double q, std::size_t n_both, std::size_t n_single, double df) {
    if (n_both == 0 && n_single == 0) return 1.0;
    const double F = dist::t_cdf(q, df);
    if (q < 0.0 && n_both > 0) return 0.0;
    double both = n_both ? std::pow(std::max(0.0, 2.0 * F - 1.0), static_cast<double>(n_both)) : 1.0;
    return both * std::pow(F, static_cast<double>(n_single));
}

inline QuantileEstimate tstat_iid_quantile(const IndexSet& neg, const IndexSet& pos, double alpha, double df,
                                           Tail tail = Tail::upper) {
    require_alpha(alpha, "tstat_iid_quantile");
    const std::size_t n_both = set_intersection(neg, pos).size();
    const std::size_t n_union = set_union(neg, pos).size();
    const std::size_t n_single = n_union - n_both;
    QuantileEstimate est;
    est.alpha = alpha;
    est.support_size = n_union;
    est.method = tail == Tail::upper ? "exact_upper" : "exact_lower";
    if (n_union == 0) {
        est.empty_support = true;
        est.q = tail == Tail::upper ? 0.0 : -kInf;
        return est;
    }
    const double target = tail == Tail::upper ? 1.0 - alpha : alpha;
    double lo = -1.0, hi = 1.0;
    while (tstat_iid_cdf(lo, n_both, n_single, df) > target) lo *= 2.0;
    while (tstat_iid_cdf(hi, n_both, n_single, df) < target) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (tstat_iid_cdf(mid, n_both, n_single, df) < target)
            lo = mid;
        else
            hi = mid;
    }
    est.q = 0.5 * (lo + hi);
    return est;
}

// ---------------------------------------------------------------------------
// Monte-Carlo quantiles

struct IidNormal {};
struct IidT {
    double df;
};
struct Correlated {
    Eigen::MatrixXd correlation;
};
using CovStructure = std::variant<IidNormal, IidT, Correlated>;

/// Upper: ceil((1-alpha) R)-th order statistic. Lower: max(1, floor(alpha R))-th.
inline double order_statistic_quantile(std::vector<double> values, double alpha, Tail tail) {
    if (values.empty()) throw ParameterError("order_statistic_quantile: no values");
    const auto R = static_cast<double>(values.size());
    std::size_t rank;
    if (tail == Tail::upper)
        rank = static_cast<std::size_t>(std::ceil((1.0 - alpha) * R - 1e-9));
    else
        rank = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(alpha * R + 1e-9)));
    rank = std::clamp<std::size_t>(rank, 1, values.size());
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank - 1), values.end());
    return values[rank - 1];
}

inline QuantileEstimate mc_oracle_quantile(const CovStructure& cov, std::size_t J, const IndexSet& neg,
                                           const IndexSet& pos, double alpha, std::size_t reps, std::uint64_t seed,
                                           Tail tail = Tail::upper) {
    require_alpha(alpha, "mc_oracle_quantile");
    if (reps < 1000) throw ParameterError("mc_oracle_quantile: reps must be at least 1000");
    neg.validate(J, "mc_oracle_quantile");
    pos.validate(J, "mc_oracle_quantile");
    QuantileEstimate est;
    est.alpha = alpha;
    est.method = "mc_oracle";
    const IndexSet support = set_union(neg, pos);
    est.support_size = support.size();
    if (support.empty()) {
        est.empty_support = true;
        est.q = tail == Tail::upper ? 0.0 : -kInf;
        return est;
    }
    Eigen::MatrixXd chol;
    if (auto c = std::get_if<Correlated>(&cov)) {
        if (static_cast<std::size_t>(c->correlation.rows()) != J || c->correlation.cols() != c->correlation.rows())
            throw DomainMismatch("mc_oracle_quantile: correlation matrix must be J x J");
        Eigen::LLT<Eigen::MatrixXd> llt(c->correlation);
        if (llt.info() != Eigen::Success)
            throw ParameterError("mc_oracle_quantile: correlation matrix is not positive definite");
        chol = llt.matrixL();
    }
    std::vector<double> stats(reps);
    parallel_for(reps, [&](std::size_t r) {
        dist::Rng rng(dist::derive_seed(seed, r));
        std::vector<double> g(J, 0.0);
        if (std::holds_alternative<IidNormal>(cov)) {
            for (auto i : support) g[i] = rng.normal();
        } else if (auto t = std::get_if<IidT>(&cov)) {
            for (auto i : support) g[i] = rng.student_t(t->df);
        } else {
            Eigen::VectorXd z(static_cast<Eigen::Index>(J));
            for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
            Eigen::VectorXd x = chol * z;
            for (std::size_t i = 0; i < J; ++i) g[i] = x(static_cast<Eigen::Index>(i));
        }
        stats[r] = t_stat(std::span<const double>(g), neg, pos);
    });
    est.q = order_statistic_quantile(std::move(stats), alpha, tail);
    return est;
}

/// Gaussian multiplier bootstrap of the statistic over `sets` (neg = plus
/// side, pos = minus side).
inline QuantileEstimate multiplier_bootstrap_quantile(const Eigen::MatrixXd& data, const PreimageSets& sets,
                                                      double alpha, std::size_t R, std::uint64_t seed) {
    require_alpha(alpha, "multiplier_bootstrap_quantile");
    if (R < 100) throw ParameterError("multiplier_bootstrap_quantile: R must be at least 100");
    const auto cs = column_stats(data);
    const auto J = static_cast<std::size_t>(data.cols());
    sets.plus.validate(J, "multiplier_bootstrap_quantile");
    sets.minus.validate(J, "multiplier_bootstrap_quantile");
    QuantileEstimate est;
    est.alpha = alpha;
    est.method = "multiplier_bootstrap";
    const IndexSet support = set_union(sets.plus, sets.minus);
    est.support_size = support.size();
    if (support.empty()) {
        est.empty_support = true;
        return est;
    }
    const auto N = data.rows();
    Eigen::MatrixXd resid(N, static_cast<Eigen::Index>(support.size()));
    {
        Eigen::Index c = 0;
        for (auto j : support) {
            const auto jj = static_cast<Eigen::Index>(j);
            resid.col(c++) = (data.col(jj).array() - cs.mean[j]) / cs.sd[j];
        }
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(N));
    std::vector<double> stats(R);
    parallel_for(R, [&](std::size_t r) {
        dist::Rng rng(dist::derive_seed(seed, r));
        Eigen::VectorXd g(N);
        for (Eigen::Index n = 0; n < N; ++n) g(n) = rng.normal();
        Eigen::VectorXd b = scale * (resid.transpose() * g);
        std::vector<double> full(J, 0.0);
        Eigen::Index c = 0;
        for (auto j : support) full[j] = b(c++);
        stats[r] = t_stat(std::span<const double>(full), sets.plus, sets.minus);
    });
    est.q = order_statistic_quantile(std::move(stats), alpha, Tail::upper);
    return est;
}

} // namespace scope
