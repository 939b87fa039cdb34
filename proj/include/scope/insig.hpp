#pragma once

// Insignificance values: the chance of at least m exceedances of a fixed
// threshold among M iid t statistics under a zero mean. The count is
// Binomial(M, 2 P[t > q]), so the values are evaluated exactly.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "scope/dist.hpp"
#include "scope/hypotests.hpp"
#include "scope/preimage.hpp"
#include "scope/quantile.hpp"

namespace scope {

inline double iv_qhat(std::size_t M, std::size_t m, double q_hat, double df) {
    if (m < 1 || m > M) throw ParameterError("iv_qhat: need 1 <= m <= M");
    if (!(q_hat >= 0.0)) throw ParameterError("iv_qhat: q_hat must be nonnegative");
    const double p = std::min(1.0, 2.0 * dist::t_sf(q_hat, df));
    return dist::binom_tail(M, p, m);
}

/// Smallest standardized height |T_j| over the discoveries.
inline std::optional<double> min_discovery_height(const std::vector<double>& t, const IndexSet& discoveries) {
    if (discoveries.empty()) return std::nullopt;
    discoveries.validate(t.size(), "min_discovery_height");
    double h = kInf;
    for (auto j : discoveries) h = std::min(h, std::abs(t[j]));
    return h;
}

inline std::optional<double> iv_obs(const std::vector<double>& t, const IndexSet& discoveries, std::size_t M,
                                    std::size_t m, double df) {
    auto h = min_discovery_height(t, discoveries);
    if (!h) return std::nullopt;
    if (std::isinf(*h)) return 0.0;
    return iv_qhat(M, m, *h, df);
}

struct InsigReport {
    std::size_t N = 0;
    std::size_t J = 0;
    double k_used = 0.0;
    double q_hat = 0.0;
    std::size_t m0_hat = 0; // size of the plug-in estimate of the zero set
    IndexSet lower;         // T_j < -q_hat
    IndexSet upper;         // T_j > q_hat
    std::size_t m1_hat = 0; // number of discoveries
    std::optional<double> min_height;
    std::optional<double> iv_obs_J;
    double iv_qhat_J = 0.0;
    std::optional<double> iv_qhat_J_minus_m1;
    std::optional<double> iv_qhat_m0;
    std::size_t hommel_count = 0;
    std::size_t bh_count = 0;
};

/// SCoPE discoveries over ({0},{0}) for iid data plus the insignificance
/// values for M = J, J - m1 and m0.
inline InsigReport insig_report(const Eigen::MatrixXd& data, double alpha, const KPolicy& policy,
                                Sidedness sided = Sidedness::two_sided) {
    require_alpha(alpha, "insig_report");
    const auto cs = column_stats(data);
    const auto t = t_statistics(cs);
    InsigReport r;
    r.N = cs.N;
    r.J = t.size();
    const double df = static_cast<double>(r.N) - 1.0;
    r.k_used = resolve_k(policy, r.N, r.J, df);
    for (double v : t)
        if (std::abs(v) <= r.k_used) ++r.m0_hat;
    r.q_hat = iid_quantile(r.m0_hat, alpha, df, sided).q;
    std::vector<std::size_t> lo, hi;
    for (std::size_t j = 0; j < t.size(); ++j) {
        if (t[j] < -r.q_hat) lo.push_back(j);
        if (t[j] > r.q_hat) hi.push_back(j);
    }
    r.lower = IndexSet::from_sorted(std::move(lo));
    r.upper = IndexSet::from_sorted(std::move(hi));
    const IndexSet disc = set_union(r.lower, r.upper);
    r.m1_hat = disc.size();
    r.min_height = min_discovery_height(t, disc);
    r.iv_obs_J = iv_obs(t, disc, r.J, 1, df);
    r.iv_qhat_J = iv_qhat(r.J, 1, r.q_hat, df);
    if (r.m1_hat > 0 && r.m1_hat < r.J) r.iv_qhat_J_minus_m1 = iv_qhat(r.J - r.m1_hat, 1, r.q_hat, df);
    if (r.m0_hat > 0) r.iv_qhat_m0 = iv_qhat(r.m0_hat, 1, r.q_hat, df);
    const auto p = t_pvalues_from_stats(t, df);
    r.hommel_count = hommel(p, alpha).size();
    r.bh_count = bh(p, alpha).size();
    return r;
}

} // namespace scope
