#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "scope/sim.hpp"

using namespace scope;
using namespace scope::sim;

TEST(Models, Means) {
    auto A = model_mu('A');
    EXPECT_EQ(A.size(), 80u);
    for (double v : A) EXPECT_EQ(v, 0.0);
    auto B = model_mu('B');
    EXPECT_EQ(B[0], -0.3);
    EXPECT_EQ(B[29], -0.3);
    EXPECT_EQ(B[30], 0.0);
    EXPECT_EQ(B[50], 0.2);
    auto C = model_mu('C');
    EXPECT_EQ(C[4], -0.3);
    EXPECT_EQ(C[5], 0.0);
    auto D = model_mu('D');
    EXPECT_EQ(D.size(), 100u);
    EXPECT_NEAR(D[0], std::sin(1.0 / (2.0 * M_PI)), 1e-15);
    EXPECT_NEAR(D[0], 0.158484, 1e-6);
    EXPECT_THROW(model_mu('E'), ParameterError);
    EXPECT_THROW(model_mu('A', 50), ParameterError);
}

TEST(Methods, ParseAndLabel) {
    EXPECT_EQ(Method::parse("oracle")->kind, Method::Kind::oracle);
    auto m = Method::parse("log_kappa(2.5)");
    ASSERT_TRUE(m);
    EXPECT_EQ(m->param, 2.5);
    EXPECT_EQ(m->label(), "log_kappa(2.5)");
    EXPECT_EQ(Method::parse("scb(0.9)")->label(), "scb(0.9)");
    EXPECT_FALSE(Method::parse("scb(1.5)"));
    EXPECT_FALSE(Method::parse("log_kappa()"));
    EXPECT_FALSE(Method::parse("log_kappa(-1)"));
    EXPECT_FALSE(Method::parse("bonferroni"));
    EXPECT_EQ(default_methods().size(), 8u);
}

namespace {
SimConfig small(char model) {
    SimConfig c;
    c.model = model;
    c.N_list = {50, 200};
    c.reps = 400;
    c.seed = 3;
    return c;
}
} // namespace

TEST(Simulation, RowsAndAbsentEntries) {
    auto rows = run_simulation(small('A'));
    EXPECT_EQ(rows.size(), 2u * 10u);
    for (const auto& r : rows) {
        EXPECT_FALSE(r.td.has_value());
        if (r.method == "hommel" || r.method == "bh") {
            EXPECT_FALSE(r.cov.has_value());
        } else {
            ASSERT_TRUE(r.cov.has_value());
            EXPECT_TRUE(*r.cov >= 0.0 && *r.cov <= 100.0);
        }
    }
    auto D = run_simulation(small('D'));
    auto h = find_row(D, "hommel", 50);
    ASSERT_TRUE(h);
    EXPECT_FALSE(h->fd.has_value());
    EXPECT_TRUE(h->td.has_value());
    // Model D has no zeros: the oracle quantile is 0 and covers badly.
    EXPECT_LT(*find_row(D, "oracle", 50)->cov, 20.0);
}

TEST(Simulation, Deterministic) {
    auto c = small('B');
    std::ostringstream a, b;
    write_table_csv(a, run_simulation(c));
    write_table_csv(b, run_simulation(c));
    EXPECT_EQ(a.str(), b.str());
    c.seed = 4;
    std::ostringstream d;
    write_table_csv(d, run_simulation(c));
    EXPECT_NE(a.str(), d.str());
}

TEST(Simulation, ThreadCountDoesNotChangeResults) {
    auto c = small('C');
    set_max_threads(1);
    std::ostringstream a, b;
    write_table_csv(a, run_simulation(c));
    set_max_threads(4);
    write_table_csv(b, run_simulation(c));
    set_max_threads(0);
    EXPECT_EQ(a.str(), b.str());
}

// Coverage computed by the harness equals scope_event over ({0},{0}) on
// the same draws.
TEST(Simulation, CoverageMatchesScopeEvent) {
    SimConfig c;
    c.model = 'B';
    c.N_list = {50};
    c.reps = 300;
    c.seed = 21;
    c.methods = {*Method::parse("oracle"), *Method::parse("log_kappa(3)")};
    c.hommel = c.bh = false;
    const auto rows = run_simulation(c);
    const auto mu = model_mu('B');
    const std::size_t J = mu.size(), N = 50;
    const double df = N - 1.0;
    const IidQuantileTable tab(J, 0.1, df, Sidedness::two_sided);
    const auto fam = ThresholdFamily::single(Field::constant(J, 0.0));
    const double k = std::log(double(N)) / 3.0;
    double cov_oracle = 0, cov_k = 0;
    for (std::size_t r = 0; r < c.reps; ++r) {
        dist::Rng rng(dist::derive_seed(dist::derive_seed(c.seed, 0), r));
        std::vector<double> mean(J), sd(J), buf;
        draw_sample(rng, mu, N, Sampling::full, mean, sd, buf);
        std::size_t m0 = 0;
        for (std::size_t j = 0; j < J; ++j) m0 += std::abs(std::sqrt(double(N)) * mean[j] / sd[j]) <= k;
        const double tau = 1.0 / std::sqrt(double(N));
        cov_oracle += scope_event(Field(mean), mu, ScopeBands(tab(20), tau, Field(sd)), fam);
        cov_k += scope_event(Field(mean), mu, ScopeBands(tab(m0), tau, Field(sd)), fam);
    }
    EXPECT_NEAR(*rows[0].cov, 100.0 * cov_oracle / c.reps, 1e-9);
    EXPECT_NEAR(*rows[1].cov, 100.0 * cov_k / c.reps, 1e-9);
}

TEST(Simulation, SufficientSamplingAgreesInLaw) {
    auto c = small('A');
    c.reps = 2000;
    c.N_list = {100};
    c.methods = {*Method::parse("oracle")};
    c.sampling = Sampling::sufficient;
    auto rows = run_simulation(c);
    EXPECT_NEAR(*rows[0].cov, 90.0, 3.0 * 100.0 * std::sqrt(0.09 / 2000));
}

TEST(Simulation, CsvFormat) {
    std::vector<SimTableRow> rows{{"oracle", 20, 90.04, 0.1234567, std::nullopt}, {"bh", 20, std::nullopt, 1.5, 2.0}};
    std::ostringstream t, p;
    write_table_csv(t, rows);
    EXPECT_EQ(t.str(), "method,N,cov,fd,td\noracle,20,90.0,0.123457,NA\nbh,20,NA,1.5,2\n");
    write_plot_csv(p, rows);
    EXPECT_EQ(p.str(), "method,N,metric,value\noracle,20,cov,90.0\noracle,20,fd,0.123457\nbh,20,fd,1.5\nbh,20,td,2\n");
}

TEST(Sandwich, TrivialCases) {
    SandwichInstance inst;
    inst.mu = Field::constant(4, 0.0);
    inst.fam = ThresholdFamily::single(Field::constant(4, 0.0));
    inst.sigma = Field::constant(4, 1.0);
    inst.tau = 0.1;
    inst.q = 50.0;
    inst.eta = 0.0;
    auto r = sandwich_check(inst, 2000, 1);
    EXPECT_EQ(r.event_prob, 1.0);
    EXPECT_EQ(r.upper_prob, 1.0);
    // mu == c: event is band containment, P = (2 Phi(q) - 1)^J
    inst.q = 2.0;
    inst.eta = 0.5;
    r = sandwich_check(inst, 20000, 2);
    const double p = std::pow(2.0 * dist::normal_cdf(2.0) - 1.0, 4);
    EXPECT_NEAR(r.event_prob, p, 4.0 * r.event_se);
    EXPECT_LE(r.lower_prob, r.event_prob);
    EXPECT_LE(r.event_prob, r.upper_prob);
}

TEST(Sandwich, PathwiseOrdering) {
    dist::Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t J = 6;
        std::vector<double> mu(J), c(J), s(J);
        for (std::size_t j = 0; j < J; ++j) {
            mu[j] = 0.3 * rng.normal();
            c[j] = rng.uniform() < 0.3 ? mu[j] : 0.3 * rng.normal();
            s[j] = 0.5 + rng.uniform();
        }
        SandwichInstance inst;
        inst.mu = Field(mu);
        inst.fam = ThresholdFamily::single(Field(c));
        inst.sigma = Field(s);
        inst.tau = 0.05 + 0.1 * rng.uniform();
        inst.q = 1.0 + rng.uniform();
        inst.eta = 0.3 * rng.uniform();
        const std::vector<IndexSet> zones{
            oracle_preimage(inst.mu, inst.fam.lower, inst.eta, Side::plus),
            oracle_preimage(inst.mu, inst.fam.upper, inst.eta, Side::minus),
            oracle_preimage(inst.mu, inst.fam.lower, 0.0, Side::plus),
            oracle_preimage(inst.mu, inst.fam.upper, 0.0, Side::minus)};
        double smax = 0;
        for (double v : s) smax = std::max(smax, v);
        dist::Rng g_rng(trial);
        for (int r = 0; r < 2000; ++r) {
            std::vector<double> G(J);
            for (auto& g : G) g = g_rng.normal();
            auto f = sandwich_events(inst, G, zones[0], zones[1], zones[2], zones[3], smax);
            EXPECT_TRUE(!f.lower || f.event);
            EXPECT_TRUE(!f.event || f.upper);
        }
    }
}
