#include <cmath>

#include <gtest/gtest.h>

#include "scope/hypotests.hpp"
#include "scope/sim.hpp"

using namespace scope;

namespace {

BandSpec constant_band(std::size_t J, double lo, double hi) {
    return {Field::constant(J, lo), Field::constant(J, hi)};
}

ScopeBands unit_bands(std::size_t J, double tau = 1.0) { return ScopeBands(0.0, tau, Field::constant(J, 1.0)); }

// Closed testing with Simes local tests over all nonempty intersections.
IndexSet closed_simes(const std::vector<double>& p, double alpha) {
    const std::size_t J = p.size();
    std::vector<char> rejected_all(J, 1);
    for (std::uint32_t mask = 1; mask < (1u << J); ++mask) {
        std::vector<double> sub;
        for (std::size_t j = 0; j < J; ++j)
            if (mask >> j & 1) sub.push_back(p[j]);
        std::sort(sub.begin(), sub.end());
        bool rej = false;
        for (std::size_t k = 0; k < sub.size(); ++k)
            if (sub[k] * static_cast<double>(sub.size()) / static_cast<double>(k + 1) <= alpha) rej = true;
        if (!rej)
            for (std::size_t j = 0; j < J; ++j)
                if (mask >> j & 1) rejected_all[j] = 0;
    }
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < J; ++j)
        if (rejected_all[j]) out.push_back(j);
    return IndexSet(out);
}

IndexSet holm(const std::vector<double>& p, double alpha) {
    std::vector<std::size_t> o(p.size());
    std::iota(o.begin(), o.end(), 0);
    std::sort(o.begin(), o.end(), [&](auto a, auto b) { return p[a] < p[b]; });
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < o.size(); ++k) {
        if (p[o[k]] > alpha / static_cast<double>(o.size() - k)) break;
        out.push_back(o[k]);
    }
    return IndexSet(out);
}

std::vector<double> random_p(dist::Rng& rng, std::size_t J) {
    std::vector<double> p(J);
    for (auto& v : p) v = rng.uniform() < 0.4 ? 0.05 * rng.uniform() : rng.uniform();
    return p;
}

} // namespace

TEST(Delta, Relevance) {
    EXPECT_EQ(delta_rel(Field{0.5}, constant_band(1, -1, 1)).delta, 0.5);
    EXPECT_EQ(delta_rel(Field{0.2, 1.0}, constant_band(2, -1, 1)).delta_plus, 0.0);
    auto d = delta_rel(Field{0.5, 0.7}, {Field::constant(2, -kInf), Field::constant(2, 1.0)});
    EXPECT_EQ(d.delta_minus, kInf);
    EXPECT_NEAR(d.delta, 0.3, 1e-15);
}

TEST(Delta, Equivalence) {
    EXPECT_LT(delta_eqv(Field{0.0, 0.1}, constant_band(2, -1, 1)), 0.0);
    EXPECT_NEAR(delta_eqv(Field{0.0, 1.3}, constant_band(2, -1, 1)), 0.3, 1e-15);
    EXPECT_EQ(delta_eqv(Field{1.0, 0.0}, constant_band(2, -1, 1)), 0.0);
}

TEST(Grt, ConstantBandIsSupNorm) {
    dist::Rng rng(1);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t J = 5;
        std::vector<double> v(J);
        for (auto& x : v) x = rng.normal();
        const double b = 0.5 + rng.uniform(), q = 2.0 * rng.uniform(), tau = 0.3;
        auto d = grt(Field(v), constant_band(J, -b, b), unit_bands(J, tau), FixedQuantile{q});
        double sup = 0.0;
        for (double x : v) sup = std::max(sup, std::abs(x));
        EXPECT_EQ(*d.global_reject, sup > b + q * tau);
    }
}

TEST(Grt, DeepInsideNoRejection) {
    Field mu{0.0, 0.1};
    auto d = grt(mu, constant_band(2, -1, 1), unit_bands(2, 0.1), OracleExact{}, mu);
    EXPECT_FALSE(*d.global_reject);
}

TEST(Grt, ConsistentWhenOutsideBand) {
    Field mu{0.0, 1.3};
    auto d = grt(mu, constant_band(2, -1, 1), unit_bands(2, 0.01), OracleExact{}, mu);
    EXPECT_NEAR(d.delta, 0.3, 1e-15);
    EXPECT_TRUE(std::isfinite(d.quantile.q));
    EXPECT_TRUE(*d.global_reject);
}

TEST(Lrt, PointNull) {
    dist::Rng rng(2);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t J = 6;
        std::vector<double> v(J), bb(J);
        for (std::size_t i = 0; i < J; ++i) {
            v[i] = rng.normal();
            bb[i] = 0.5 * rng.normal();
        }
        const double q = 2.0 * rng.uniform(), tau = 0.5;
        auto d = lrt(Field(v), {Field(bb), Field(bb)}, unit_bands(J, tau), FixedQuantile{q});
        for (std::size_t i = 0; i < J; ++i) EXPECT_EQ(d.rejected.contains(i), std::abs(v[i] - bb[i]) / tau > q);
    }
}

TEST(Lrt, EmptyCriticalSetGivesZeroQuantile) {
    Field mu{0.0, 1.2};
    auto d = lrt(mu, constant_band(2, -1, 1), unit_bands(2), OracleExact{}, mu);
    EXPECT_NEAR(d.delta, 0.2, 1e-12);
    EXPECT_EQ(d.quantile.q, 0.0);
    EXPECT_TRUE(d.quantile.empty_support);
    EXPECT_EQ(d.rejected, (IndexSet{1}));
}

TEST(Lrt, TouchingBandHasNonemptyCriticalSet) {
    // b- + Delta = 0 touches mu at the first two points.
    Field mu{0.0, 0.0, 2.0};
    auto d = lrt(mu, constant_band(3, -1, 1), unit_bands(3), OracleExact{}, mu);
    EXPECT_EQ(d.delta, 1.0);
    EXPECT_EQ(d.quantile.support_size, 2u);
    EXPECT_GT(d.quantile.q, 0.0);
}

TEST(Lrt, InsideShiftedBandNothingRejected) {
    auto d = lrt(Field{0.0, 0.2}, constant_band(2, -1, 1), unit_bands(2, 0.1), FixedQuantile{1.0});
    EXPECT_TRUE(d.rejected.empty());
}

TEST(Et, SetAndSupFormsAgree) {
    dist::Rng rng(3);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t J = 1 + trial % 7;
        std::vector<double> v(J), s(J);
        for (std::size_t i = 0; i < J; ++i) {
            v[i] = 1.5 * rng.normal();
            s[i] = 0.5 + rng.uniform();
        }
        const double q = 3.0 * rng.normal(), tau = 0.4;
        ScopeBands b(0.0, tau, Field(s));
        auto band = constant_band(J, -1, 1);
        auto d = et(Field(v), band, b, FixedQuantile{q});
        EXPECT_EQ(*d.global_reject, et_sup_form(Field(v), band, b, q));
    }
}

TEST(Et, FarOutsideNoEquivalence) {
    Field mu{0.0, 5.0};
    auto d = et(mu, constant_band(2, -1, 1), unit_bands(2, 0.1), FixedQuantile{-1.0});
    EXPECT_FALSE(*d.global_reject);
}

TEST(Et, ConsistentInsideBand) {
    Field mu{0.0, 0.3, -0.4};
    auto d = et(mu, constant_band(3, -1, 1), unit_bands(3, 0.01), OracleExact{}, mu);
    EXPECT_LT(d.delta, 0.0);
    EXPECT_TRUE(*d.global_reject);
}

TEST(Et, RequiresGap) {
    EXPECT_THROW(et(Field{0.0}, constant_band(1, 0, 0), unit_bands(1), FixedQuantile{1.0}), PreconditionError);
    EXPECT_THROW(let_(Field{0.0}, constant_band(1, 0, 0), unit_bands(1), FixedQuantile{1.0}), PreconditionError);
}

TEST(Let, PcIiScalar) {
    dist::Rng rng(4);
    for (int trial = 0; trial < 1000; ++trial) {
        const double lo = rng.normal(), hi = lo + 0.1 + 2.0 * rng.uniform();
        const double x = lo - 1.0 + (hi - lo + 2.0) * rng.uniform();
        const double q = 3.0 * rng.uniform(), tau = 0.2 + rng.uniform(), s = 0.5 + rng.uniform();
        ScopeBands b(0.0, tau, Field{s});
        auto d = let_(Field{x}, {Field{lo}, Field{hi}}, b, FixedQuantile{q});
        EXPECT_EQ(d.rejected.contains(0), x > lo + tau * q * s && x < hi - tau * q * s);
    }
}

TEST(Let, CrossingShiftsRejectNothing) {
    auto d = let_(Field{0.0, 0.1}, constant_band(2, -1, 1), unit_bands(2, 1.0), FixedQuantile{1.0});
    EXPECT_TRUE(d.rejected.empty());
}

TEST(Hypotests, OracleNeedsMean) {
    EXPECT_THROW(lrt(Field{0.0}, constant_band(1, -1, 1), unit_bands(1), OracleExact{}), ParameterError);
}

TEST(Hommel, Examples) {
    EXPECT_TRUE(hommel({0.5, 0.7, 0.2}, 0.05).empty());
    EXPECT_EQ(hommel({0.01, 0.02, 0.9}, 0.05), (IndexSet{0, 1}));
    EXPECT_EQ(closed_simes({0.01, 0.02, 0.9}, 0.05), (IndexSet{0, 1}));
}

TEST(Hommel, MatchesClosedTesting) {
    dist::Rng rng(5);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t J = 1 + trial % 10;
        auto p = random_p(rng, J);
        EXPECT_EQ(hommel(p, 0.1), closed_simes(p, 0.1)) << "trial " << trial;
    }
}

TEST(Hommel, DominatesHolm) {
    dist::Rng rng(6);
    for (int trial = 0; trial < 1000; ++trial) {
        auto p = random_p(rng, 2 + trial % 20);
        EXPECT_TRUE(is_subset(holm(p, 0.05), hommel(p, 0.05)));
    }
}

TEST(Bh, StepUp) {
    EXPECT_TRUE(bh({0.5, 0.7}, 0.05).empty());
    EXPECT_EQ(bh({0.01, 0.03, 0.04, 0.9}, 0.05), (IndexSet{0}));
    EXPECT_EQ(bh({0.01, 0.02, 0.035, 0.9}, 0.05), (IndexSet{0, 1, 2}));
    // 0.03 > 2 * 0.05 / 4 but the step-up passes through at k = 3
    EXPECT_EQ(bh({0.03, 0.001, 0.036, 0.8}, 0.05), (IndexSet{0, 1, 2}));
}

TEST(Bh, DominatesHommel) {
    dist::Rng rng(7);
    for (int trial = 0; trial < 1000; ++trial) {
        auto p = random_p(rng, 2 + trial % 20);
        EXPECT_TRUE(is_subset(hommel(p, 0.1), bh(p, 0.1)));
    }
}

TEST(Baselines, RejectInvalid) {
    EXPECT_THROW(hommel({1.2}, 0.1), ParameterError);
    EXPECT_THROW(bh({0.1}, 0.0), ParameterError);
}

// Desk-scale FWER of lrT with the exact oracle quantile (point null b = 0).
TEST(Lrt, FamilywiseErrorModelB) {
    const Field mu = sim::model_mu('B');
    const std::size_t J = mu.size(), N = 200, R = 1500;
    const double df = N - 1.0, tau = 1.0 / std::sqrt(double(N));
    auto band = constant_band(J, 0.0, 0.0);
    dist::Rng rng(8);
    std::size_t errors = 0;
    for (std::size_t r = 0; r < R; ++r) {
        std::vector<double> m(J), s(J);
        for (std::size_t j = 0; j < J; ++j) {
            m[j] = mu[j] + rng.normal() * tau;
            s[j] = std::sqrt(rng.chisq(df) / df);
        }
        auto d = lrt(Field(m), band, ScopeBands(0.0, tau, Field(s)), OracleExact{df}, mu);
        bool err = false;
        for (auto j : d.rejected) err |= mu[j] == 0.0;
        errors += err;
    }
    const double rate = double(errors) / R;
    EXPECT_LE(rate, 0.1 + 3.0 * std::sqrt(0.09 / R));
}
