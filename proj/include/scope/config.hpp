#pragma once

// key=value configuration files: one entry per line, '#' starts a comment,
// lists are comma-separated.

#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "scope/csv.hpp"
#include "scope/error.hpp"
#include "scope/sim.hpp"

namespace scope::config {

struct Entry {
    std::string value;
    std::size_t line = 0;
    std::size_t column = 0; // column of the first value character
    std::size_t key_column = 0;
};

struct KeyValues {
    std::string source;
    std::map<std::string, Entry> entries;

    bool has(const std::string& key) const { return entries.count(key) != 0; }

    const Entry& require(const std::string& key) const {
        auto it = entries.find(key);
        if (it == entries.end()) throw ConfigError(source + ": missing required key '" + key + "'");
        return it->second;
    }

    [[noreturn]] void fail(const Entry& e, const std::string& msg) const {
        throw ParseError(source, e.line, e.column, msg);
    }
};

inline KeyValues parse(std::istream& in, const std::string& source) {
    KeyValues kv;
    kv.source = source;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        std::string line = raw.substr(0, raw.find('#'));
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(source, line_no, first + 1, "expected key=value");
        const std::string key(csv::trim(std::string_view(line).substr(0, eq)));
        if (key.empty()) throw ParseError(source, line_no, first + 1, "empty key");
        for (std::size_t i = 0; i < key.size(); ++i) {
            const char c = key[i];
            if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_'))
                throw ParseError(source, line_no, first + i + 1, "invalid character in key '" + key + "'");
        }
        auto vstart = line.find_first_not_of(" \t", eq + 1);
        Entry e;
        e.line = line_no;
        e.key_column = first + 1;
        e.column = (vstart == std::string::npos ? eq + 1 : vstart) + 1;
        e.value = std::string(csv::trim(std::string_view(line).substr(eq + 1)));
        if (kv.entries.count(key)) throw ParseError(source, line_no, first + 1, "duplicate key '" + key + "'");
        kv.entries.emplace(key, std::move(e));
    }
    return kv;
}

inline KeyValues parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse(in, path);
}

namespace detail {

/// Splits on commas, remembering the column of each item. Commas inside
/// parentheses do not split.
inline std::vector<std::pair<std::string, std::size_t>> items(const Entry& e) {
    std::vector<std::pair<std::string, std::size_t>> out;
    std::size_t start = 0;
    int depth = 0;
    for (std::size_t i = 0; i <= e.value.size(); ++i) {
        const char c = i < e.value.size() ? e.value[i] : ',';
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (c == ',' && depth == 0) {
            std::string_view piece = std::string_view(e.value).substr(start, i - start);
            const auto lead = piece.find_first_not_of(" \t");
            out.emplace_back(std::string(csv::trim(piece)), e.column + start + (lead == std::string_view::npos ? 0 : lead));
            start = i + 1;
        }
    }
    return out;
}

inline double number(const KeyValues& kv, const Entry& e, const std::string& text, std::size_t col) {
    double v = 0.0;
    if (!csv::try_parse_number(text, v)) throw ParseError(kv.source, e.line, col, "not a number: '" + text + "'");
    return v;
}

inline std::uint64_t count(const KeyValues& kv, const Entry& e, const std::string& text, std::size_t col) {
    if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos)
        throw ParseError(kv.source, e.line, col, "expected a nonnegative integer, got '" + text + "'");
    errno = 0;
    const auto v = std::strtoull(text.c_str(), nullptr, 10);
    if (errno == ERANGE) throw ParseError(kv.source, e.line, col, "integer out of range: '" + text + "'");
    return v;
}

} // namespace detail

inline const std::set<std::string>& simulate_keys() {
    static const std::set<std::string> keys{"model", "mu",        "J",        "N_list",   "alpha", "reps",
                                            "seed",  "methods",   "baselines", "sidedness", "sampling"};
    return keys;
}

/// Builds a SimConfig. Required: model, N_list, alpha, reps, seed.
inline sim::SimConfig to_sim_config(const KeyValues& kv) {
    for (const auto& [key, e] : kv.entries)
        if (!simulate_keys().count(key)) throw ParseError(kv.source, e.line, e.key_column, "unknown key '" + key + "'");
    sim::SimConfig cfg;

    const Entry& model = kv.require("model");
    if (model.value == "custom") {
        const Entry& mu = kv.require("mu");
        std::vector<double> v;
        for (const auto& [text, col] : detail::items(mu)) {
            v.push_back(detail::number(kv, mu, text, col));
            if (!std::isfinite(v.back())) kv.fail(mu, "mu entries must be finite");
        }
        cfg.custom_mu = Field(std::move(v));
        cfg.model = 'X';
    } else if (model.value.size() == 1 && std::string("ABCD").find(model.value[0]) != std::string::npos) {
        cfg.model = model.value[0];
        if (kv.has("mu")) kv.fail(kv.require("mu"), "mu is only allowed with model=custom");
    } else {
        kv.fail(model, "model must be A, B, C, D or custom");
    }

    if (kv.has("J")) {
        const Entry& e = kv.require("J");
        cfg.J = detail::count(kv, e, e.value, e.column);
        const std::size_t native = cfg.custom_mu ? cfg.custom_mu->size() : (cfg.model == 'D' ? 100 : 80);
        if (cfg.J != native) kv.fail(e, "J must equal the model length " + std::to_string(native));
    }

    const Entry& nl = kv.require("N_list");
    cfg.N_list.clear();
    for (const auto& [text, col] : detail::items(nl)) {
        const auto N = detail::count(kv, nl, text, col);
        if (N < 2) throw ParseError(kv.source, nl.line, col, "every N must be at least 2");
        cfg.N_list.push_back(N);
    }

    const Entry& a = kv.require("alpha");
    cfg.alpha = detail::number(kv, a, a.value, a.column);
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) kv.fail(a, "alpha must lie in (0,1)");

    const Entry& r = kv.require("reps");
    cfg.reps = detail::count(kv, r, r.value, r.column);
    if (cfg.reps < 1) kv.fail(r, "reps must be at least 1");

    const Entry& s = kv.require("seed");
    cfg.seed = detail::count(kv, s, s.value, s.column);

    if (kv.has("methods")) {
        const Entry& e = kv.require("methods");
        cfg.methods.clear();
        if (e.value != "none")
            for (const auto& [text, col] : detail::items(e)) {
                auto m = sim::Method::parse(text);
                if (!m) throw ParseError(kv.source, e.line, col, "unknown method '" + text + "'");
                cfg.methods.push_back(*m);
            }
    }
    if (kv.has("baselines")) {
        const Entry& e = kv.require("baselines");
        cfg.hommel = cfg.bh = false;
        if (e.value != "none")
            for (const auto& [text, col] : detail::items(e)) {
                if (text == "hommel") cfg.hommel = true;
                else if (text == "bh") cfg.bh = true;
                else throw ParseError(kv.source, e.line, col, "unknown baseline '" + text + "'");
            }
    }
    if (kv.has("sidedness")) {
        const Entry& e = kv.require("sidedness");
        if (e.value == "two_sided") cfg.sidedness = Sidedness::two_sided;
        else if (e.value == "paper_one_sided") cfg.sidedness = Sidedness::paper_one_sided;
        else kv.fail(e, "sidedness must be two_sided or paper_one_sided");
    }
    if (kv.has("sampling")) {
        const Entry& e = kv.require("sampling");
        if (e.value == "full") cfg.sampling = sim::Sampling::full;
        else if (e.value == "sufficient") cfg.sampling = sim::Sampling::sufficient;
        else kv.fail(e, "sampling must be full or sufficient");
    }
    return cfg;
}

inline std::string model_name(const sim::SimConfig& cfg) {
    return cfg.custom_mu ? "custom" : std::string(1, cfg.model);
}

/// Every setting spelled out, in a form that parses back to the same config.
inline void write_resolved(std::ostream& out, const sim::SimConfig& cfg) {
    auto join = [](const auto& xs, auto fmt) {
        std::string s;
        for (const auto& x : xs) s += (s.empty() ? "" : ",") + fmt(x);
        return s;
    };
    out << "model=" << model_name(cfg) << '\n';
    if (cfg.custom_mu) out << "mu=" << join(cfg.custom_mu->values(), csv::format_exact) << '\n';
    out << "J=" << cfg.mu().size() << '\n';
    out << "N_list=" << join(cfg.N_list, [](std::size_t n) { return std::to_string(n); }) << '\n';
    out << "alpha=" << csv::format_exact(cfg.alpha) << '\n';
    out << "reps=" << cfg.reps << '\n';
    out << "seed=" << cfg.seed << '\n';
    out << "methods=" << (cfg.methods.empty() ? "none" : join(cfg.methods, [](const sim::Method& m) { return m.label(); }))
        << '\n';
    std::string base = cfg.hommel ? "hommel" : "";
    if (cfg.bh) base += base.empty() ? "bh" : ",bh";
    out << "baselines=" << (base.empty() ? "none" : base) << '\n';
    out << "sidedness=" << (cfg.sidedness == Sidedness::two_sided ? "two_sided" : "paper_one_sided") << '\n';
    out << "sampling=" << (cfg.sampling == sim::Sampling::full ? "full" : "sufficient") << '\n';
}

} // namespace scope::config
