#pragma once

// Oracle generalized preimages and thickened plug-in estimators.
//
// On a finite domain the generalized preimage of a threshold family equals
// the exact preimage {s : mu(s) = c(s) for some c}; the eta-thickened
// versions are what the oracle quantiles use.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "scope/dist.hpp"
#include "scope/domain.hpp"
#include "scope/parallel.hpp"

namespace scope {

enum class Side { plus, minus, both };

struct PreimageSets {
    IndexSet plus;
    IndexSet minus;
    IndexSet both;
};

namespace detail {

// Signed gap g = mu - c with the convention that equal infinities have gap 0.
inline double signed_gap(double mu, double c) {
    if (mu == c) return 0.0;
    return mu - c;
}

inline bool on_side(double gap, double width, double tol, Side side) {
    switch (side) {
    case Side::plus:
        return gap >= -tol && gap <= width + tol;
    case Side::minus:
        return -gap >= -tol && -gap <= width + tol;
    case Side::both:
        return std::abs(gap) <= width + tol;
    }
    return false;
}

} // namespace detail

/// plus: exists c with 0 <= mu - c <= eta; minus: 0 <= c - mu <= eta.
/// `tol` widens both ends of the window, for thresholds computed in floating
/// point that are meant to touch mu exactly.
inline IndexSet oracle_preimage(const Field& mu, const std::vector<Field>& fam, double eta, Side side,
                                double tol = 0.0) {
    if (!(eta >= 0.0)) throw ParameterError("oracle_preimage: eta must be nonnegative");
    if (!(tol >= 0.0)) throw ParameterError("oracle_preimage: tol must be nonnegative");
    std::vector<std::size_t> out;
    for (const auto& c : fam) require_same_size(mu, c, "oracle_preimage");
    for (std::size_t i = 0; i < mu.size(); ++i) {
        for (const auto& c : fam) {
            if (detail::on_side(detail::signed_gap(mu[i], c[i]), eta, tol, side)) {
                out.push_back(i);
                break;
            }
        }
    }
    return IndexSet::from_sorted(std::move(out));
}

inline PreimageSets oracle_preimage_sets(const Field& mu, const std::vector<Field>& fam, double eta,
                                         double tol = 0.0) {
    PreimageSets p;
    p.plus = oracle_preimage(mu, fam, eta, Side::plus, tol);
    p.minus = oracle_preimage(mu, fam, eta, Side::minus, tol);
    p.both = set_union(p.plus, p.minus);
    return p;
}

/// Thickened plug-in estimate with half-width k tau sigma.
inline IndexSet plugin_preimage(const Field& mu_hat, const std::vector<Field>& fam, const Field& sigma, double tau,
                                double k, Side side) {
    if (!(k > 0.0)) throw ParameterError("plugin_preimage: k must be positive");
    if (!(tau > 0.0)) throw ParameterError("plugin_preimage: tau must be positive");
    require_same_size(mu_hat, sigma, "plugin_preimage");
    for (const auto& c : fam) require_same_size(mu_hat, c, "plugin_preimage");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < mu_hat.size(); ++i) {
        const double width = k * tau * sigma[i];
        for (const auto& c : fam) {
            if (detail::on_side(detail::signed_gap(mu_hat[i], c[i]), width, 0.0, side)) {
                out.push_back(i);
                break;
            }
        }
    }
    return IndexSet::from_sorted(std::move(out));
}

inline PreimageSets plugin_preimage_sets(const Field& mu_hat, const std::vector<Field>& fam, const Field& sigma,
                                         double tau, double k) {
    PreimageSets p;
    p.plus = plugin_preimage(mu_hat, fam, sigma, tau, k, Side::plus);
    p.minus = plugin_preimage(mu_hat, fam, sigma, tau, k, Side::minus);
    p.both = set_union(p.plus, p.minus);
    return p;
}

struct KPolicy {
    enum class Kind { log_over_kappa, scb_level, fixed };
    Kind kind = Kind::fixed;
    double value = 1.0; // kappa, beta or k

    static KPolicy log_over_kappa(double kappa) {
        if (!(kappa > 0.0)) throw ParameterError("KPolicy: kappa must be positive");
        return {Kind::log_over_kappa, kappa};
    }
    static KPolicy scb_level(double beta) {
        if (!(beta > 0.0 && beta < 1.0)) throw ParameterError("KPolicy: beta must lie in (0,1)");
        return {Kind::scb_level, beta};
    }
    static KPolicy fixed(double k) {
        if (!(k > 0.0)) throw ParameterError("KPolicy: k must be positive");
        return {Kind::fixed, k};
    }
};

/// log_over_kappa: ln(N)/kappa. scb_level: k with (2 F_t(k; df) - 1)^J = 1 - beta.
inline double resolve_k(const KPolicy& policy, std::size_t N, std::size_t J, double df) {
    switch (policy.kind) {
    case KPolicy::Kind::log_over_kappa:
        if (N < 2) throw ParameterError("resolve_k: N must be at least 2");
        return std::log(static_cast<double>(N)) / policy.value;
    case KPolicy::Kind::scb_level: {
        if (J == 0) throw ParameterError("resolve_k: J must be positive");
        const double root = std::pow(1.0 - policy.value, 1.0 / static_cast<double>(J));
        return dist::t_quantile(0.5 * (1.0 + root), df);
    }
    case KPolicy::Kind::fixed:
        return policy.value;
    }
    return policy.value;
}

struct ProbeSample {
    Field mu_hat;
    Field sigma;
    double tau;
};

using ProbeSampler = std::function<ProbeSample(dist::Rng&, std::size_t N)>;

/// N iid draws of mu + standard normal noise per location; returns the sample
/// mean, sample standard deviation and tau = N^{-1/2}.
inline ProbeSampler iid_gaussian_sampler(Field mu) {
    return [mu = std::move(mu)](dist::Rng& rng, std::size_t N) {
        std::vector<double> mean(mu.size()), sd(mu.size());
        for (std::size_t j = 0; j < mu.size(); ++j) {
            double sum = 0.0, sum2 = 0.0;
            std::vector<double> y(N);
            for (auto& v : y) {
                v = mu[j] + rng.normal();
                sum += v;
            }
            const double m = sum / static_cast<double>(N);
            for (double v : y) sum2 += (v - m) * (v - m);
            mean[j] = m;
            sd[j] = std::sqrt(sum2 / static_cast<double>(N - 1));
        }
        return ProbeSample{Field(std::move(mean)), Field(std::move(sd)), 1.0 / std::sqrt(static_cast<double>(N))};
    };
}

struct ConsistencyResult {
    std::vector<std::size_t> N;
    std::vector<double> mean_distance;  // mean Hausdorff distance, estimate vs oracle
    std::vector<double> inclusion_freq; // frequency of oracle set contained in the estimate
};

/// Monte-Carlo check that the plug-in preimage ("both" side) approaches the
/// exact oracle preimage as N grows.
inline ConsistencyResult consistency_probe(const Field& mu, const ProbeSampler& sampler, const std::vector<Field>& fam,
                                           const KPolicy& policy, const std::vector<std::size_t>& Ns,
                                           std::size_t reps, std::uint64_t seed, const Domain& dom) {
    if (reps == 0) throw ParameterError("consistency_probe: reps must be positive");
    require_domain(mu, dom, "consistency_probe");
    const IndexSet oracle = oracle_preimage(mu, fam, 0.0, Side::both);
    ConsistencyResult res;
    for (std::size_t n_idx = 0; n_idx < Ns.size(); ++n_idx) {
        const std::size_t N = Ns[n_idx];
        const double k = resolve_k(policy, N, mu.size(), static_cast<double>(N) - 1.0);
        std::vector<double> dist_slot(reps);
        std::vector<char> incl_slot(reps);
        parallel_for(reps, [&](std::size_t r) {
            dist::Rng rng(dist::derive_seed(dist::derive_seed(seed, n_idx), r));
            auto s = sampler(rng, N);
            auto est = plugin_preimage(s.mu_hat, fam, s.sigma, s.tau, k, Side::both);
            dist_slot[r] = hausdorff_distance(est, oracle, dom);
            incl_slot[r] = is_subset(oracle, est) ? 1 : 0;
        });
        double dsum = 0.0, isum = 0.0;
        for (std::size_t r = 0; r < reps; ++r) {
            dsum += dist_slot[r];
            isum += incl_slot[r];
        }
        res.N.push_back(N);
        res.mean_distance.push_back(dsum / static_cast<double>(reps));
        res.inclusion_freq.push_back(isum / static_cast<double>(reps));
    }
    return res;
}

} // namespace scope
