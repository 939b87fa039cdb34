#include <cmath>

#include <gtest/gtest.h>

#include "scope/quantile.hpp"

using namespace scope;

TEST(IidQuantile, Conventions) {
    const auto two = iid_quantile(80, 0.1, 99, Sidedness::two_sided);
    EXPECT_NEAR(std::pow(2.0 * dist::t_cdf(two.q, 99) - 1.0, 80), 0.9, 1e-10);
    const auto one = iid_quantile(80, 0.1, 99, Sidedness::paper_one_sided);
    EXPECT_NEAR(std::pow(dist::t_cdf(one.q, 99), 80), 0.9, 1e-10);
    EXPECT_GT(two.q, one.q);
    const auto empty = iid_quantile(0, 0.1, 99, Sidedness::two_sided);
    EXPECT_EQ(empty.q, 0.0);
    EXPECT_TRUE(empty.empty_support);
    EXPECT_THROW(iid_quantile(5, 1.0, 9), ParameterError);
}

TEST(IidQuantile, TableMatchesDirect) {
    IidQuantileTable tab(30, 0.1, 19, Sidedness::two_sided);
    for (std::size_t m = 0; m <= 30; ++m) EXPECT_EQ(tab(m), iid_quantile(m, 0.1, 19, Sidedness::two_sided).q);
    for (std::size_t m = 1; m < 30; ++m) EXPECT_LE(tab(m), tab(m + 1));
}

TEST(PValues, Definitions) {
    Eigen::MatrixXd y(4, 2);
    y << 1, 2, -1, 3, 1, 1, -1, 2;
    auto p = t_pvalues(y);
    EXPECT_NEAR(p[0], 1.0, 1e-15);
    // Column 1: mean 2, sd sqrt(2/3), T = 2 * 2 / sqrt(2/3)
    const double T = 4.0 / std::sqrt(2.0 / 3.0);
    EXPECT_NEAR(p[1], 2.0 * dist::t_sf(T, 3), 1e-14);
    const double tq = dist::t_quantile(0.975, 9);
    EXPECT_NEAR(t_pvalues_from_stats({tq}, 9)[0], 0.05, 1e-10);
}

TEST(PValues, ZeroVarianceNamesColumn) {
    Eigen::MatrixXd y(3, 3);
    y << 1, 2, 3, 2, 2, 4, 3, 2, 5;
    try {
        column_stats(y);
        FAIL();
    } catch (const DegenerateData& e) {
        EXPECT_EQ(e.column(), 1u);
    }
}

TEST(PValues, UniformUnderNull) {
    dist::Rng rng(5);
    std::vector<double> p;
    for (int r = 0; r < 500; ++r) {
        Eigen::MatrixXd y(10, 20);
        for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = rng.normal();
        for (double v : t_pvalues(y)) p.push_back(v);
    }
    std::sort(p.begin(), p.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) ks = std::max(ks, std::abs(p[i] - (i + 0.5) / p.size()));
    EXPECT_LT(ks, 0.02);
}

TEST(Storey, Estimate) {
    EXPECT_EQ(storey_m0({0.6, 0.7, 0.1, 0.2}), 4u);
    EXPECT_EQ(storey_m0({0.01, 0.02, 0.6}), 2u);
    EXPECT_EQ(storey_m0({0.9, 0.9, 0.9}), 3u);  // capped at J
    EXPECT_EQ(storey_m0({0.01, 0.02}), 0u);
}

TEST(TStatLaw, ExactClosedForm) {
    // Disjoint singletons: P[max(-G1, G2) <= q] = F(q)^2
    IndexSet a{0}, b{1};
    auto est = tstat_iid_quantile(a, b, 0.1, kInf);
    EXPECT_NEAR(std::pow(dist::normal_cdf(est.q), 2), 0.9, 1e-10);
    // Same point on both sides: P[|G| <= q] = 0.9
    auto same = tstat_iid_quantile(a, a, 0.1, kInf);
    EXPECT_NEAR(same.q, dist::normal_quantile(0.95), 1e-8);
    auto lower = tstat_iid_quantile(a, b, 0.1, kInf, Tail::lower);
    EXPECT_NEAR(std::pow(dist::normal_cdf(lower.q), 2), 0.1, 1e-10);
    auto none = tstat_iid_quantile({}, {}, 0.1, kInf, Tail::lower);
    EXPECT_TRUE(none.empty_support);
    EXPECT_EQ(none.q, -kInf);
    EXPECT_EQ(tstat_iid_quantile({}, {}, 0.1, kInf).q, 0.0);
}

TEST(TStatLaw, MonteCarloAgrees) {
    IndexSet neg{0, 1, 2}, pos{2, 3};
    auto exact = tstat_iid_quantile(neg, pos, 0.1, 7);
    auto mc = mc_oracle_quantile(IidT{7}, 4, neg, pos, 0.1, 40000, 3);
    EXPECT_NEAR(mc.q, exact.q, 0.05);
    auto mcn = mc_oracle_quantile(IidNormal{}, 4, neg, pos, 0.1, 40000, 3);
    EXPECT_NEAR(mcn.q, tstat_iid_quantile(neg, pos, 0.1, kInf).q, 0.04);
    EXPECT_THROW(mc_oracle_quantile(IidNormal{}, 4, neg, pos, 0.1, 999, 3), ParameterError);
}

TEST(TStatLaw, CorrelatedIdentityMatchesIid) {
    IndexSet s{0, 1, 2};
    auto mc = mc_oracle_quantile(Correlated{Eigen::MatrixXd::Identity(3, 3)}, 3, s, s, 0.1, 40000, 8);
    EXPECT_NEAR(mc.q, tstat_iid_quantile(s, s, 0.1, kInf).q, 0.04);
}

TEST(OrderStatistic, Rule) {
    std::vector<double> v(100);
    for (int i = 0; i < 100; ++i) v[i] = i + 1;
    EXPECT_EQ(order_statistic_quantile(v, 0.1, Tail::upper), 90.0);
    EXPECT_EQ(order_statistic_quantile(v, 0.1, Tail::lower), 10.0);
    EXPECT_EQ(order_statistic_quantile(v, 0.001, Tail::lower), 1.0);
}

TEST(Bootstrap, ApproximatesGaussianLaw) {
    dist::Rng rng(12);
    Eigen::MatrixXd y(400, 6);
    for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = rng.normal();
    PreimageSets sets;
    sets.plus = IndexSet{0, 1, 2};
    sets.minus = IndexSet{3, 4, 5};
    auto est = multiplier_bootstrap_quantile(y, sets, 0.1, 4000, 2);
    EXPECT_NEAR(est.q, tstat_iid_quantile(sets.plus, sets.minus, 0.1, kInf).q, 0.12);
    EXPECT_THROW(multiplier_bootstrap_quantile(y, sets, 0.1, 50, 2), ParameterError);
    EXPECT_EQ(est.q, multiplier_bootstrap_quantile(y, sets, 0.1, 4000, 2).q);
}
