// scope: command-line front end.
//
//   scope simulate --config sim.cfg --out DIR
//   scope scope    --data y.csv [--thresholds c.csv] --out DIR
//   scope insig    --data y.csv --kappa 3 --out DIR
//   scope scheffe  --K 4 --alpha 0.05 --beta-zero
//   scope tests    --kind leT --data y.csv --b-minus -1 --b-plus 1 --q 1.64
//
// Exit status: 0 ok, 1 runtime error, 2 usage / parse error.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "scope/scope.hpp"

namespace fs = std::filesystem;
using namespace scope;

namespace {

struct Common {
    std::string config;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    std::size_t threads = 0;
};

void add_common(CLI::App* app, Common& c, bool with_config) {
    if (with_config) app->add_option("--config", c.config, "key=value configuration file")->required();
    app->add_option("--out", c.out, "output directory")->capture_default_str();
    app->add_option("--seed", c.seed, "RNG seed (overrides the config)");
    app->add_option("--threads", c.threads, "worker cap (0 = hardware)");
}

std::ofstream open_out(const Common& c, const std::string& name) {
    fs::create_directories(c.out);
    const fs::path p = fs::path(c.out) / name;
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error("cannot write '" + p.string() + "'");
    return f;
}

Eigen::MatrixXd read_data(const std::string& path) {
    auto m = csv::to_matrix(csv::read_numeric_file(path));
    if (m.rows() < 2 || m.cols() < 1) throw ParameterError(path + ": need at least 2 rows and 1 column");
    return m;
}

/// Two-column (lower, upper) file with J rows, or one row broadcast to J.
std::pair<Field, Field> read_pair(const std::string& path, std::size_t J) {
    auto t = csv::read_numeric_file(path);
    if (t.rows.empty() || t.rows.front().size() != 2)
        throw DomainMismatch(path + ": expected two columns (lower,upper)");
    if (t.rows.size() != 1 && t.rows.size() != J)
        throw DomainMismatch(path + ": has " + std::to_string(t.rows.size()) + " rows, data has " +
                             std::to_string(J) + " columns");
    std::vector<double> lo(J), hi(J);
    for (std::size_t j = 0; j < J; ++j) {
        const auto& r = t.rows[t.rows.size() == 1 ? 0 : j];
        lo[j] = r[0];
        hi[j] = r[1];
    }
    return {Field(std::move(lo)), Field(std::move(hi))};
}

std::string fmt(double x) { return csv::format_number(x, 6); }

KPolicy make_policy(std::optional<double> kappa, std::optional<double> k, std::optional<double> scb_beta) {
    const int given = (kappa ? 1 : 0) + (k ? 1 : 0) + (scb_beta ? 1 : 0);
    if (given > 1) throw ConfigError("give at most one of --kappa, --k, --scb-beta");
    if (k) return KPolicy::fixed(*k);
    if (scb_beta) return KPolicy::scb_level(*scb_beta);
    return KPolicy::log_over_kappa(kappa.value_or(3.0));
}

// --------------------------------------------------------------------------

int cmd_simulate(const Common& c) {
    auto kv = config::parse_file(c.config);
    auto cfg = config::to_sim_config(kv);
    if (c.seed) cfg.seed = *c.seed;
    const auto rows = sim::run_simulation(cfg);
    const std::string model = config::model_name(cfg);
    {
        auto f = open_out(c, model + "_table.csv");
        sim::write_table_csv(f, rows);
    }
    {
        auto f = open_out(c, model + "_plot.csv");
        sim::write_plot_csv(f, rows);
    }
    {
        auto f = open_out(c, "resolved_config.txt");
        config::write_resolved(f, cfg);
    }
    sim::write_table_csv(std::cout, rows);
    return 0;
}

struct ScopeArgs {
    std::string data, thresholds;
    double alpha = 0.1;
    std::optional<double> kappa, k, scb_beta;
    std::string quantile = "exact";
    std::size_t reps = 1000;
};

int cmd_scope(const Common& c, const ScopeArgs& a) {
    const auto data = read_data(a.data);
    const auto J = static_cast<std::size_t>(data.cols());
    const auto cs = column_stats(data);
    Field c_lo = Field::constant(J, 0.0), c_hi = Field::constant(J, 0.0);
    if (!a.thresholds.empty()) std::tie(c_lo, c_hi) = read_pair(a.thresholds, J);
    for (std::size_t j = 0; j < J; ++j)
        if (c_lo[j] > c_hi[j]) throw ThresholdOrderError("thresholds: lower exceeds upper at index " + std::to_string(j));
    const Field mu_hat(cs.mean), sigma(cs.sd);
    const double tau = 1.0 / std::sqrt(static_cast<double>(cs.N));
    const double df = static_cast<double>(cs.N) - 1.0;
    const KPolicy policy = make_policy(a.kappa, a.k, a.scb_beta);
    const double k = resolve_k(policy, cs.N, J, df);
    PreimageSets sets;
    sets.plus = plugin_preimage(mu_hat, {c_lo}, sigma, tau, k, Side::both);
    sets.minus = plugin_preimage(mu_hat, {c_hi}, sigma, tau, k, Side::both);
    sets.both = set_union(sets.plus, sets.minus);
    QuantileEstimate q;
    if (a.quantile == "exact") {
        q = tstat_iid_quantile(sets.plus, sets.minus, a.alpha, df);
    } else {
        q = multiplier_bootstrap_quantile(data, sets, a.alpha, a.reps, c.seed.value_or(1));
    }
    const ScopeBands bands(q.q, tau, sigma);
    const auto part = partition3(mu_hat, c_lo, c_hi, bands);

    std::ostringstream os;
    os << "# N=" << cs.N << "\n# J=" << J << "\n# alpha=" << fmt(a.alpha) << "\n# k_N=" << fmt(k)
       << "\n# q_hat=" << fmt(q.q) << "\n# quantile=" << q.method << "\n# preimage_size=" << q.support_size << '\n';
    os << "index,mu_hat,sigma_hat,c_minus,c_plus,class\n";
    for (std::size_t j = 0; j < J; ++j) {
        const char* cls = part.lower.contains(j) ? "below" : (part.upper.contains(j) ? "above" : "middle");
        os << j << ',' << fmt(mu_hat[j]) << ',' << fmt(sigma[j]) << ',' << fmt(c_lo[j]) << ',' << fmt(c_hi[j]) << ','
           << cls << '\n';
    }
    auto f = open_out(c, "scope.csv");
    f << os.str();
    std::cout << "below=" << part.lower.size() << " middle=" << part.middle.size() << " above=" << part.upper.size()
              << " q_hat=" << fmt(q.q) << '\n';
    return 0;
}

struct InsigArgs {
    std::string data;
    double alpha = 0.1;
    std::optional<double> kappa, k, scb_beta;
    std::string sidedness = "two_sided";
};

int cmd_insig(const Common& c, const InsigArgs& a) {
    const auto data = read_data(a.data);
    const auto sided = a.sidedness == "two_sided" ? Sidedness::two_sided : Sidedness::paper_one_sided;
    const auto r = insig_report(data, a.alpha, make_policy(a.kappa, a.k, a.scb_beta), sided);
    auto pct = [](const std::optional<double>& v) { return v ? csv::format_fixed(100.0 * *v, 1) : std::string("NA"); };
    std::ostringstream os;
    os << "N,J,k_N,q_hat,iv_obs_J,iv_qhat_J,iv_qhat_J_minus_m1,iv_qhat_m0,m0_hat,scope_lower,scope_upper,"
          "hommel,bh\n";
    os << r.N << ',' << r.J << ',' << fmt(r.k_used) << ',' << fmt(r.q_hat) << ',' << pct(r.iv_obs_J) << ','
       << pct(r.iv_qhat_J) << ',' << pct(r.iv_qhat_J_minus_m1) << ',' << pct(r.iv_qhat_m0) << ',' << r.m0_hat << ','
       << r.lower.size() << ',' << r.upper.size() << ',' << r.hommel_count << ',' << r.bh_count << '\n';
    auto f = open_out(c, "insig.csv");
    f << os.str();
    std::cout << os.str();
    return 0;
}

struct ScheffeArgs {
    std::size_t K = 4;
    double alpha = 0.05;
    bool beta_zero = false;
    bool coverage = false;
    std::size_t N = 2000;
    std::size_t reps = 2000;
    double xi = 1.0;
    std::vector<double> beta;
};

int cmd_scheffe(const Common& c, const ScheffeArgs& a) {
    if (a.K < 2) throw ConfigError("--K must be at least 2");
    const double q = std::sqrt(dist::chisq_quantile(1.0 - a.alpha, static_cast<double>(a.K - 1)));
    std::ostringstream os;
    if (!a.coverage) {
        const double fail = 1.0 - scheffe::scheffe_zero_cdf(q, a.K, a.beta_zero);
        os << "K,alpha,beta_zero,q,failure_prob\n"
           << a.K << ',' << fmt(a.alpha) << ',' << (a.beta_zero ? 1 : 0) << ',' << fmt(q) << ',' << fmt(fail) << '\n';
    } else {
        Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(a.K));
        if (!a.beta.empty()) {
            if (a.beta.size() != a.K) throw DomainMismatch("--beta needs exactly K entries");
            for (std::size_t i = 0; i < a.K; ++i) beta(static_cast<Eigen::Index>(i)) = a.beta[i];
        } else if (!a.beta_zero) {
            beta(0) = 1.0;
        }
        const auto r = scheffe::scheffe_coverage_check(beta, a.xi, a.N, a.alpha, a.reps, c.seed.value_or(1));
        os << "K,alpha,N,reps,beta_zero,q,empirical,theoretical\n"
           << a.K << ',' << fmt(a.alpha) << ',' << a.N << ',' << a.reps << ',' << (beta.isZero() ? 1 : 0) << ','
           << fmt(q) << ',' << fmt(r.empirical) << ',' << fmt(r.theoretical) << '\n';
    }
    if (c.out != ".") {
        auto f = open_out(c, "scheffe.csv");
        f << os.str();
    }
    std::cout << os.str();
    return 0;
}

struct TestsArgs {
    std::string kind, data, band, mu;
    std::optional<double> b_minus, b_plus, q, kappa, k;
    bool plugin = false;
    double alpha = 0.1;
};

int cmd_tests(const Common& c, const TestsArgs& a) {
    const auto data = read_data(a.data);
    const auto J = static_cast<std::size_t>(data.cols());
    const auto cs = column_stats(data);
    const Field mu_hat(cs.mean), sigma(cs.sd);
    const double tau = 1.0 / std::sqrt(static_cast<double>(cs.N));
    const double df = static_cast<double>(cs.N) - 1.0;

    BandSpec band;
    if (!a.band.empty()) {
        if (a.b_minus || a.b_plus) throw ConfigError("give either --band or --b-minus/--b-plus");
        std::tie(band.b_minus, band.b_plus) = read_pair(a.band, J);
    } else {
        if (!a.b_minus || !a.b_plus) throw ConfigError("missing band: give --band or both --b-minus and --b-plus");
        band.b_minus = Field::constant(J, *a.b_minus);
        band.b_plus = Field::constant(J, *a.b_plus);
    }

    const int sources = (a.q ? 1 : 0) + (a.mu.empty() ? 0 : 1) + (a.plugin ? 1 : 0);
    if (sources != 1) throw ConfigError("give exactly one quantile source: --q, --mu or --plugin");
    QuantileSource src = FixedQuantile{0.0};
    std::optional<Field> mu;
    if (a.q) {
        src = FixedQuantile{*a.q};
    } else if (!a.mu.empty()) {
        mu = read_field_csv_file(a.mu);
        require_same_size(*mu, mu_hat, "--mu");
        src = OracleExact{df};
    } else {
        src = PluginQuantile{make_policy(a.kappa, a.k, std::nullopt), cs.N, df};
    }

    const ScopeBands bands(0.0, tau, sigma);
    TestOptions opt;
    opt.alpha = a.alpha;
    TestDecision d;
    if (a.kind == "grT") d = grt(mu_hat, band, bands, src, mu, opt);
    else if (a.kind == "lrT") d = lrt(mu_hat, band, bands, src, mu, opt);
    else if (a.kind == "eT") d = et(mu_hat, band, bands, src, mu, opt);
    else if (a.kind == "leT") d = let_(mu_hat, band, bands, src, mu, opt);
    else throw ConfigError("unknown --kind '" + a.kind + "'");

    std::ostringstream os;
    os << "# kind=" << to_string(d.kind) << "\n# N=" << cs.N << "\n# q=" << fmt(d.quantile.q)
       << "\n# delta=" << fmt(d.delta) << '\n';
    if (d.global_reject) os << "# global_reject=" << (*d.global_reject ? 1 : 0) << '\n';
    os << "index,mu_hat,sigma_hat,b_minus,b_plus" << (d.global_reject ? "" : ",rejected") << '\n';
    for (std::size_t j = 0; j < J; ++j) {
        os << j << ',' << fmt(mu_hat[j]) << ',' << fmt(sigma[j]) << ',' << fmt(band.b_minus[j]) << ','
           << fmt(band.b_plus[j]);
        if (!d.global_reject) os << ',' << (d.rejected.contains(j) ? 1 : 0);
        os << '\n';
    }
    auto f = open_out(c, "tests.csv");
    f << os.str();
    if (d.global_reject)
        std::cout << to_string(d.kind) << " global_reject=" << (*d.global_reject ? 1 : 0) << " q=" << fmt(d.quantile.q)
                  << '\n';
    else
        std::cout << to_string(d.kind) << " rejected=" << d.rejected.size() << " q=" << fmt(d.quantile.q) << '\n';
    return 0;
}

template <class F>
int guarded(F&& f) {
    try {
        return f();
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const DomainMismatch& e) {
        std::cerr << "shape mismatch: " << e.what() << '\n';
        return 2;
    } catch (const DegenerateData& e) {
        std::cerr << "error: degenerate data in column " << e.column() << ": " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"SCoPE sets: simultaneous excursion-set inference"};
    app.require_subcommand(1);

    Common sim_c, scope_c, insig_c, sch_c, tests_c;

    auto* simulate = app.add_subcommand("simulate", "run the Model A-D simulation harness");
    add_common(simulate, sim_c, true);

    ScopeArgs sa;
    auto* scope_cmd = app.add_subcommand("scope", "SCoPE classification of an N x J data matrix");
    add_common(scope_cmd, scope_c, false);
    scope_cmd->add_option("--data", sa.data, "N x J CSV (rows = samples)")->required();
    scope_cmd->add_option("--thresholds", sa.thresholds, "CSV with columns c_minus,c_plus (default 0)");
    scope_cmd->add_option("--alpha", sa.alpha, "alpha: 1 - coverage")->capture_default_str();
    scope_cmd->add_option("--kappa", sa.kappa, "kappa: k_N = log(N) / kappa (default 3)");
    scope_cmd->add_option("--k", sa.k, "fixed k_N");
    scope_cmd->add_option("--scb-beta", sa.scb_beta, "beta: k_N from a (1 - beta) SCB");
    scope_cmd->add_option("--quantile", sa.quantile, "exact or bootstrap")
        ->check(CLI::IsMember({"exact", "bootstrap"}))
        ->capture_default_str();
    scope_cmd->add_option("--reps", sa.reps, "bootstrap replicates")->capture_default_str();

    InsigArgs ia;
    auto* insig = app.add_subcommand("insig", "insignificance values for zero-threshold discoveries");
    add_common(insig, insig_c, false);
    insig->add_option("--data", ia.data, "N x J CSV")->required();
    insig->add_option("--alpha", ia.alpha, "alpha")->capture_default_str();
    insig->add_option("--kappa", ia.kappa, "kappa: k_N = log(N) / kappa (default 3)");
    insig->add_option("--k", ia.k, "fixed k_N");
    insig->add_option("--scb-beta", ia.scb_beta, "beta: k_N from a (1 - beta) SCB");
    insig->add_option("--sidedness", ia.sidedness, "quantile convention")
        ->check(CLI::IsMember({"two_sided", "paper_one_sided"}))
        ->capture_default_str();

    ScheffeArgs sch;
    auto* scheffe_cmd = app.add_subcommand("scheffe", "Scheffe-type contrast failure probabilities");
    add_common(scheffe_cmd, sch_c, false);
    scheffe_cmd->add_option("--K", sch.K, "K: number of coefficients")->capture_default_str();
    scheffe_cmd->add_option("--alpha", sch.alpha, "alpha")->capture_default_str();
    scheffe_cmd->add_flag("--beta-zero", sch.beta_zero, "beta = 0");
    scheffe_cmd->add_flag("--coverage", sch.coverage, "simulate the empirical coverage");
    scheffe_cmd->add_option("--N", sch.N, "N: sample size for --coverage")->capture_default_str();
    scheffe_cmd->add_option("--reps", sch.reps, "replicates for --coverage")->capture_default_str();
    scheffe_cmd->add_option("--xi", sch.xi, "xi: noise standard deviation")->capture_default_str();
    scheffe_cmd->add_option("--beta", sch.beta, "beta: K coefficients")->delimiter(',');

    TestsArgs ta;
    auto* tests = app.add_subcommand("tests", "relevance and equivalence tests (grT, lrT, eT, leT)");
    add_common(tests, tests_c, false);
    tests->add_option("--kind", ta.kind, "grT, lrT, eT or leT")
        ->required()
        ->check(CLI::IsMember({"grT", "lrT", "eT", "leT"}));
    tests->add_option("--data", ta.data, "N x J CSV")->required();
    tests->add_option("--band", ta.band, "CSV with columns b_minus,b_plus");
    tests->add_option("--b-minus", ta.b_minus, "b-: constant lower band");
    tests->add_option("--b-plus", ta.b_plus, "b+: constant upper band");
    tests->add_option("--q", ta.q, "q: fixed quantile");
    tests->add_option("--mu", ta.mu, "mu: true mean (index,value CSV), oracle quantile");
    tests->add_flag("--plugin", ta.plugin, "plug-in quantile (experimental)");
    tests->add_option("--kappa", ta.kappa, "kappa for --plugin (default 3)");
    tests->add_option("--k", ta.k, "fixed k_N for --plugin");
    tests->add_option("--alpha", ta.alpha, "alpha")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    auto with_threads = [](const Common& c) {
        if (c.threads) set_max_threads(c.threads);
    };
    if (*simulate) return guarded([&] { with_threads(sim_c); return cmd_simulate(sim_c); });
    if (*scope_cmd) return guarded([&] { with_threads(scope_c); return cmd_scope(scope_c, sa); });
    if (*insig) return guarded([&] { with_threads(insig_c); return cmd_insig(insig_c, ia); });
    if (*scheffe_cmd) return guarded([&] { with_threads(sch_c); return cmd_scheffe(sch_c, sch); });
    if (*tests) return guarded([&] { with_threads(tests_c); return cmd_tests(tests_c, ta); });
    return 2;
}
