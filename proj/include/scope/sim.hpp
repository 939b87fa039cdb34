#pragma once

// Simulation harness for the iid Gaussian model y_n ~ N(mu, I_J), n = 1..N,
// with SCoPE sets over ({0},{0}) and Hommel / BH baselines, plus the
// finite-sample sandwich check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "scope/csv.hpp"
#include "scope/dist.hpp"
#include "scope/error.hpp"
#include "scope/excursion.hpp"
#include "scope/hypotests.hpp"
#include "scope/parallel.hpp"
#include "scope/preimage.hpp"
#include "scope/quantile.hpp"

namespace scope::sim {

/// Mean vectors of Models A-D. J = 0 selects the model's own length.
inline Field model_mu(char model, std::size_t J = 0) {
    std::size_t native = model == 'D' ? 100 : 80;
    if (model != 'A' && model != 'B' && model != 'C' && model != 'D')
        throw ParameterError(std::string("model_mu: unknown model '") + model + "'");
    if (J != 0 && J != native)
        throw ParameterError(std::string("model_mu: model ") + model + " has J = " + std::to_string(native));
    std::vector<double> mu(native, 0.0);
    for (std::size_t j = 1; j <= native; ++j) {
        double& v = mu[j - 1];
        switch (model) {
        case 'A':
            v = 0.0;
            break;
        case 'B':
            v = j <= 30 ? -0.3 : (j <= 50 ? 0.0 : 0.2);
            break;
        case 'C':
            v = j <= 5 ? -0.3 : 0.0;
            break;
        case 'D':
            v = std::sin(static_cast<double>(j) / (2.0 * M_PI));
            break;
        }
    }
    return Field(std::move(mu));
}

struct Method {
    enum class Kind { oracle, storey, log_kappa, scb };
    Kind kind = Kind::oracle;
    double param = 0.0; // kappa, or SCB level 1 - beta

    std::string label() const {
        switch (kind) {
        case Kind::oracle:
            return "oracle";
        case Kind::storey:
            return "storey";
        case Kind::log_kappa:
            return "log_kappa(" + csv::format_exact(param) + ")";
        case Kind::scb:
            return "scb(" + csv::format_exact(param) + ")";
        }
        return "?";
    }

    /// Parses "oracle", "storey", "log_kappa(K)" or "scb(L)".
    static std::optional<Method> parse(const std::string& token) {
        if (token == "oracle") return Method{Kind::oracle, 0.0};
        if (token == "storey") return Method{Kind::storey, 0.0};
        auto with_arg = [&](const std::string& name, Kind kind) -> std::optional<Method> {
            if (token.rfind(name + "(", 0) != 0 || token.back() != ')') return std::nullopt;
            const std::string arg = token.substr(name.size() + 1, token.size() - name.size() - 2);
            char* end = nullptr;
            const double v = std::strtod(arg.c_str(), &end);
            if (arg.empty() || *end != '\0' || !std::isfinite(v)) return std::nullopt;
            return Method{kind, v};
        };
        if (auto m = with_arg("log_kappa", Kind::log_kappa)) {
            if (!(m->param > 0.0)) return std::nullopt;
            return m;
        }
        if (auto m = with_arg("scb", Kind::scb)) {
            if (!(m->param > 0.0 && m->param < 1.0)) return std::nullopt;
            return m;
        }
        return std::nullopt;
    }
};

inline std::vector<Method> default_methods() {
    return {{Method::Kind::oracle, 0},      {Method::Kind::storey, 0},      {Method::Kind::log_kappa, 10},
            {Method::Kind::log_kappa, 5},   {Method::Kind::log_kappa, 3},   {Method::Kind::log_kappa, 2},
            {Method::Kind::scb, 0.9},       {Method::Kind::scb, 0.1}};
}

enum class Sampling { full, sufficient };

struct SimConfig {
    char model = 'A';
    std::optional<Field> custom_mu;
    std::size_t J = 0;
    std::vector<std::size_t> N_list{20, 50, 100, 200, 500, 1000};
    double alpha = 0.1;
    std::vector<Method> methods = default_methods();
    bool hommel = true;
    bool bh = true;
    std::size_t reps = 5000;
    std::uint64_t seed = 1;
    Sidedness sidedness = Sidedness::two_sided;
    Sampling sampling = Sampling::full;

    Field mu() const { return custom_mu ? *custom_mu : model_mu(model, J); }

    void validate() const {
        require_alpha(alpha, "SimConfig");
        if (reps < 1) throw ParameterError("SimConfig: reps must be at least 1");
        if (N_list.empty()) throw ParameterError("SimConfig: N_list is empty");
        for (auto N : N_list)
            if (N < 2) throw ParameterError("SimConfig: every N must be at least 2");
    }
};

struct SimTableRow {
    std::string method;
    std::size_t N = 0;
    std::optional<double> cov; // percent
    std::optional<double> fd;
    std::optional<double> td;
};

/// Sample means and standard deviations for one replicate.
inline void draw_sample(dist::Rng& rng, const Field& mu, std::size_t N, Sampling sampling, std::vector<double>& mean,
                        std::vector<double>& sd, std::vector<double>& buf) {
    const std::size_t J = mu.size();
    const double n = static_cast<double>(N);
    if (sampling == Sampling::sufficient) {
        for (std::size_t j = 0; j < J; ++j) {
            mean[j] = mu[j] + rng.normal() / std::sqrt(n);
            sd[j] = std::sqrt(rng.chisq(n - 1.0) / (n - 1.0));
        }
        return;
    }
    buf.resize(N);
    for (std::size_t j = 0; j < J; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            buf[i] = rng.normal();
            sum += buf[i];
        }
        const double m = sum / n;
        double ss = 0.0;
        for (std::size_t i = 0; i < N; ++i) ss += (buf[i] - m) * (buf[i] - m);
        mean[j] = mu[j] + m;
        sd[j] = std::sqrt(ss / (n - 1.0));
    }
}

namespace detail {
struct RepResult {
    std::vector<char> cov;
    std::vector<double> fd, td;
};
} // namespace detail

inline std::vector<SimTableRow> run_simulation(const SimConfig& cfg) {
    cfg.validate();
    const Field mu = cfg.mu();
    const std::size_t J = mu.size();
    std::size_t n_null = 0, n_alt = 0;
    for (double v : mu) (v == 0.0 ? n_null : n_alt)++;
    const std::size_t n_methods = cfg.methods.size();
    const std::size_t n_base = (cfg.hommel ? 1 : 0) + (cfg.bh ? 1 : 0);

    std::vector<SimTableRow> rows;
    for (std::size_t n_idx = 0; n_idx < cfg.N_list.size(); ++n_idx) {
        const std::size_t N = cfg.N_list[n_idx];
        const double df = static_cast<double>(N) - 1.0;
        const IidQuantileTable qtab(J, cfg.alpha, df, cfg.sidedness);
        std::vector<double> k_of(n_methods, 0.0);
        for (std::size_t m = 0; m < n_methods; ++m) {
            const auto& me = cfg.methods[m];
            if (me.kind == Method::Kind::log_kappa)
                k_of[m] = resolve_k(KPolicy::log_over_kappa(me.param), N, J, df);
            else if (me.kind == Method::Kind::scb)
                k_of[m] = resolve_k(KPolicy::scb_level(1.0 - me.param), N, J, df);
        }
        const bool need_p = n_base > 0 ||
                            std::any_of(cfg.methods.begin(), cfg.methods.end(),
                                        [](const Method& m) { return m.kind == Method::Kind::storey; });

        std::vector<detail::RepResult> results(cfg.reps);
        parallel_for(cfg.reps, [&](std::size_t r) {
            dist::Rng rng(dist::derive_seed(dist::derive_seed(cfg.seed, n_idx), r));
            std::vector<double> mean(J), sd(J), buf, t(J);
            draw_sample(rng, mu, N, cfg.sampling, mean, sd, buf);
            const double rn = std::sqrt(static_cast<double>(N));
            for (std::size_t j = 0; j < J; ++j) t[j] = rn * mean[j] / sd[j];
            std::vector<double> p;
            if (need_p) p = t_pvalues_from_stats(t, df);

            auto& res = results[r];
            res.cov.resize(n_methods);
            res.fd.resize(n_methods + n_base);
            res.td.resize(n_methods + n_base);
            for (std::size_t m = 0; m < n_methods; ++m) {
                const auto& me = cfg.methods[m];
                std::size_t count = 0;
                switch (me.kind) {
                case Method::Kind::oracle:
                    count = n_null;
                    break;
                case Method::Kind::storey:
                    count = storey_m0(p);
                    break;
                case Method::Kind::log_kappa:
                case Method::Kind::scb:
                    for (double v : t)
                        if (std::abs(v) <= k_of[m]) ++count;
                    break;
                }
                const double q = qtab(count);
                std::size_t fd = 0, td = 0;
                for (std::size_t j = 0; j < J; ++j) {
                    if (t[j] > q) (mu[j] > 0.0 ? td : fd)++;
                    else if (t[j] < -q) (mu[j] < 0.0 ? td : fd)++;
                }
                res.cov[m] = fd == 0 ? 1 : 0;
                res.fd[m] = static_cast<double>(fd);
                res.td[m] = static_cast<double>(td);
            }
            std::size_t slot = n_methods;
            auto score = [&](const IndexSet& rej) {
                std::size_t fd = 0, td = 0;
                for (auto j : rej) (mu[j] == 0.0 ? fd : td)++;
                res.fd[slot] = static_cast<double>(fd);
                res.td[slot] = static_cast<double>(td);
                ++slot;
            };
            if (cfg.hommel) score(hommel(p, cfg.alpha));
            if (cfg.bh) score(bh(p, cfg.alpha));
        });

        const double R = static_cast<double>(cfg.reps);
        auto mean_of = [&](std::size_t slot, bool td) {
            double s = 0.0;
            for (const auto& res : results) s += td ? res.td[slot] : res.fd[slot];
            return s / R;
        };
        for (std::size_t m = 0; m < n_methods; ++m) {
            SimTableRow row;
            row.method = cfg.methods[m].label();
            row.N = N;
            double c = 0.0;
            for (const auto& res : results) c += res.cov[m];
            row.cov = 100.0 * c / R;
            row.fd = mean_of(m, false);
            if (n_alt > 0) row.td = mean_of(m, true);
            rows.push_back(row);
        }
        std::size_t slot = n_methods;
        auto base_row = [&](const char* name) {
            SimTableRow row;
            row.method = name;
            row.N = N;
            if (n_null > 0) row.fd = mean_of(slot, false);
            if (n_alt > 0) row.td = mean_of(slot, true);
            rows.push_back(row);
            ++slot;
        };
        if (cfg.hommel) base_row("hommel");
        if (cfg.bh) base_row("bh");
    }
    return rows;
}

inline const SimTableRow* find_row(const std::vector<SimTableRow>& rows, const std::string& method, std::size_t N) {
    for (const auto& r : rows)
        if (r.method == method && r.N == N) return &r;
    return nullptr;
}

namespace detail {
inline std::string cell(const std::optional<double>& v, bool percent) {
    if (!v) return "NA";
    return percent ? csv::format_fixed(*v, 1) : csv::format_number(*v, 6);
}
} // namespace detail

/// method,N,cov,fd,td with NA for absent entries.
inline void write_table_csv(std::ostream& out, const std::vector<SimTableRow>& rows) {
    out << "method,N,cov,fd,td\n";
    for (const auto& r : rows)
        out << r.method << ',' << r.N << ',' << detail::cell(r.cov, true) << ',' << detail::cell(r.fd, false) << ','
            << detail::cell(r.td, false) << '\n';
}

/// Long format: method,N,metric,value. Absent entries are skipped.
inline void write_plot_csv(std::ostream& out, const std::vector<SimTableRow>& rows) {
    out << "method,N,metric,value\n";
    for (const auto& r : rows) {
        auto emit = [&](const char* metric, const std::optional<double>& v, bool percent) {
            if (v) out << r.method << ',' << r.N << ',' << metric << ',' << detail::cell(v, percent) << '\n';
        };
        emit("cov", r.cov, true);
        emit("fd", r.fd, false);
        emit("td", r.td, false);
    }
}

// ---------------------------------------------------------------------------
// Sandwich check

struct SandwichInstance {
    Field mu;
    ThresholdFamily fam;
    Field sigma;
    double tau = 1.0;
    double q = 1.0;
    double eta = 0.0;
    CovStructure noise = IidNormal{};
};

struct SandwichResult {
    double event_prob;
    double lower_prob;
    double upper_prob;
    double event_se;
    double lower_se;
    double upper_se;
    std::size_t reps;
};

struct SandwichFlags {
    bool lower, event, upper;
};

/// Evaluates the three events for one draw of G, mu_hat = mu + tau sigma G.
/// lower: max(sup_{U+eta(C-)} -G, sup_{U-eta(C+)} G) < q and max|G| - q < eta/(tau O);
/// upper: max(sup_{mu = c-} -G, sup_{mu = c+} G) <= q.
inline SandwichFlags sandwich_events(const SandwichInstance& inst, const std::vector<double>& G,
                                     const IndexSet& near_neg, const IndexSet& near_pos, const IndexSet& touch_neg,
                                     const IndexSet& touch_pos, double sigma_max) {
    std::vector<double> muhat(G.size());
    for (std::size_t i = 0; i < G.size(); ++i) muhat[i] = inst.mu[i] + inst.tau * inst.sigma[i] * G[i];
    const ScopeBands bands(inst.q, inst.tau, inst.sigma);
    SandwichFlags f;
    f.event = scope_event(Field(std::move(muhat)), inst.mu, bands, inst.fam);
    double gmax = 0.0;
    for (double g : G) gmax = std::max(gmax, std::abs(g));
    f.lower = t_stat(std::span<const double>(G), near_neg, near_pos) - inst.q < 0.0 &&
              gmax - inst.q < inst.eta / (inst.tau * sigma_max);
    f.upper = t_stat(std::span<const double>(G), touch_neg, touch_pos) - inst.q <= 0.0;
    return f;
}

inline SandwichResult sandwich_check(const SandwichInstance& inst, std::size_t reps, std::uint64_t seed) {
    if (reps == 0) throw ParameterError("sandwich_check: reps must be positive");
    if (!(inst.eta >= 0.0)) throw ParameterError("sandwich_check: eta must be nonnegative");
    ScopeBands(inst.q, inst.tau, inst.sigma).validate();
    const std::size_t J = inst.mu.size();
    const IndexSet near_neg = oracle_preimage(inst.mu, inst.fam.lower, inst.eta, Side::plus);
    const IndexSet near_pos = oracle_preimage(inst.mu, inst.fam.upper, inst.eta, Side::minus);
    const IndexSet touch_neg = oracle_preimage(inst.mu, inst.fam.lower, 0.0, Side::plus);
    const IndexSet touch_pos = oracle_preimage(inst.mu, inst.fam.upper, 0.0, Side::minus);
    double sigma_max = 0.0;
    for (double s : inst.sigma) sigma_max = std::max(sigma_max, s);
    Eigen::MatrixXd chol;
    if (auto c = std::get_if<Correlated>(&inst.noise)) {
        Eigen::LLT<Eigen::MatrixXd> llt(c->correlation);
        if (llt.info() != Eigen::Success) throw ParameterError("sandwich_check: correlation not positive definite");
        chol = llt.matrixL();
    }
    std::vector<SandwichFlags> flags(reps);
    parallel_for(reps, [&](std::size_t r) {
        dist::Rng rng(dist::derive_seed(seed, r));
        std::vector<double> G(J);
        if (auto t = std::get_if<IidT>(&inst.noise)) {
            for (auto& g : G) g = rng.student_t(t->df);
        } else if (std::holds_alternative<Correlated>(inst.noise)) {
            Eigen::VectorXd z(static_cast<Eigen::Index>(J));
            for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
            Eigen::VectorXd x = chol * z;
            for (std::size_t i = 0; i < J; ++i) G[i] = x(static_cast<Eigen::Index>(i));
        } else {
            for (auto& g : G) g = rng.normal();
        }
        flags[r] = sandwich_events(inst, G, near_neg, near_pos, touch_neg, touch_pos, sigma_max);
    });
    double lo = 0, ev = 0, up = 0;
    for (const auto& f : flags) {
        lo += f.lower;
        ev += f.event;
        up += f.upper;
    }
    const double R = static_cast<double>(reps);
    auto se = [R](double p) { return std::sqrt(p * (1.0 - p) / R); };
    return {ev / R, lo / R, up / R, se(ev / R), se(lo / R), se(up / R), reps};
}

} // namespace scope::sim
