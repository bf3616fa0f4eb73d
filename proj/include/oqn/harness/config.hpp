#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "../oqn.hpp"
#include "../problems.hpp"

namespace oqn {

struct RunConfig {
    std::string problem = "cosine_mixture";
    Index dim = 4;
    std::uint64_t problem_seed = 1;
    CatalogOptions catalog;
    std::string method = "oqn";  // oqn | og_baseline | gd_baseline
    std::int64_t budget = 120;
    bool explicit_params = false;
    double d_radius = 0.0, eta = 0.0, delta = 0.0;
    std::int64_t t_len = 0, k_eps = 0;
    std::uint64_t seed = 1;
    double p_fail = 0.01;
    AuditLevel audit = AuditLevel::Episode;
    std::optional<double> gap_bound;
    std::optional<double> eps_target;
    std::optional<double> step_size;
    std::string csv_path, report_path, events_path;
    // bench grid
    std::vector<std::string> methods;
    std::vector<std::int64_t> budgets;
    std::vector<std::uint64_t> seeds;
    unsigned threads = 0;
};

inline const char* to_string(AuditLevel a) {
    switch (a) {
        case AuditLevel::Off: return "off";
        case AuditLevel::Episode: return "episode";
        case AuditLevel::Full: return "full";
    }
    return "?";
}

namespace config_detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <class T>
T parse_num(const std::string& key, const std::string& v) {
    std::istringstream is(v);
    T out{};
    is >> out;
    if (is.fail() || !is.eof())
        throw Error(ErrorCode::ConfigError, "bad value for " + key + ": '" + v + "'");
    return out;
}

}  // namespace config_detail

inline void set_key(RunConfig& c, const std::string& key, const std::string& val) {
    using namespace config_detail;
    if (key == "problem") c.problem = val;
    else if (key == "dim") c.dim = parse_num<Index>(key, val);
    else if (key == "problem_seed") c.problem_seed = parse_num<std::uint64_t>(key, val);
    else if (key == "mu") c.catalog.mu = parse_num<double>(key, val);
    else if (key == "kappa") c.catalog.kappa = parse_num<double>(key, val);
    else if (key == "box") c.catalog.box = parse_num<double>(key, val);
    else if (key == "method") c.method = val;
    else if (key == "budget") c.budget = parse_num<std::int64_t>(key, val);
    else if (key == "params") {
        if (val == "auto") c.explicit_params = false;
        else if (val == "explicit") c.explicit_params = true;
        else throw Error(ErrorCode::ConfigError, "params must be auto or explicit");
    }
    else if (key == "D") c.d_radius = parse_num<double>(key, val);
    else if (key == "eta") c.eta = parse_num<double>(key, val);
    else if (key == "delta") c.delta = parse_num<double>(key, val);
    else if (key == "T") c.t_len = parse_num<std::int64_t>(key, val);
    else if (key == "K") c.k_eps = parse_num<std::int64_t>(key, val);
    else if (key == "seed") c.seed = parse_num<std::uint64_t>(key, val);
    else if (key == "p_fail") c.p_fail = parse_num<double>(key, val);
    else if (key == "audit") {
        if (val == "off") c.audit = AuditLevel::Off;
        else if (val == "episode") c.audit = AuditLevel::Episode;
        else if (val == "full") c.audit = AuditLevel::Full;
        else throw Error(ErrorCode::ConfigError, "audit must be off, episode or full");
    }
    else if (key == "gap_bound") c.gap_bound = parse_num<double>(key, val);
    else if (key == "eps_target") c.eps_target = parse_num<double>(key, val);
    else if (key == "step_size") c.step_size = parse_num<double>(key, val);
    else if (key == "csv") c.csv_path = val;
    else if (key == "report") c.report_path = val;
    else if (key == "events") c.events_path = val;
    else if (key == "methods") c.methods = split(val, ',');
    else if (key == "budgets") {
        c.budgets.clear();
        for (const auto& s : split(val, ',')) c.budgets.push_back(parse_num<std::int64_t>(key, s));
    }
    else if (key == "seeds") {
        c.seeds.clear();
        for (const auto& s : split(val, ',')) c.seeds.push_back(parse_num<std::uint64_t>(key, s));
    }
    else if (key == "threads") c.threads = parse_num<unsigned>(key, val);
    else throw Error(ErrorCode::ConfigError, "unknown key '" + key + "'");
}

inline void check_config(const RunConfig& c) {
    if (c.method != "oqn" && c.method != "og_baseline" && c.method != "gd_baseline")
        throw Error(ErrorCode::ConfigError, "unknown method '" + c.method + "'");
    if (c.budget < 1) throw Error(ErrorCode::ConfigError, "budget must be >= 1");
    if (c.explicit_params)
        validate(manual_params(c.d_radius, c.eta, c.t_len, c.k_eps, c.delta, c.p_fail));
}

// Flat key=value lines; '#' starts a comment.
inline RunConfig parse_config(std::istream& in) {
    RunConfig c;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = config_detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorCode::ConfigError, "line " + std::to_string(lineno) + ": expected key=value");
        set_key(c, config_detail::trim(line.substr(0, eq)), config_detail::trim(line.substr(eq + 1)));
    }
    if (const char* env = std::getenv("OQN_SEED"); env != nullptr && *env != '\0')
        c.seed = config_detail::parse_num<std::uint64_t>("OQN_SEED", env);
    check_config(c);
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open " + path);
    return parse_config(in);
}

// "cosine_mixture:d=4:mu=0.2:seed=3"
inline ObjectiveSpec problem_from_string(const std::string& text) {
    const auto parts = config_detail::split(text, ':');
    if (parts.empty()) throw Error(ErrorCode::UnknownProblem, "empty problem");
    Index d = 4;
    std::uint64_t seed = 1;
    CatalogOptions opt;
    for (std::size_t i = 1; i < parts.size(); ++i) {
        const auto eq = parts[i].find('=');
        if (eq == std::string::npos) throw Error(ErrorCode::ConfigError, "bad problem option " + parts[i]);
        const std::string k = parts[i].substr(0, eq), v = parts[i].substr(eq + 1);
        if (k == "d" || k == "dim") d = config_detail::parse_num<Index>(k, v);
        else if (k == "seed") seed = config_detail::parse_num<std::uint64_t>(k, v);
        else if (k == "mu") opt.mu = config_detail::parse_num<double>(k, v);
        else if (k == "kappa") opt.kappa = config_detail::parse_num<double>(k, v);
        else if (k == "box") opt.box = config_detail::parse_num<double>(k, v);
        else throw Error(ErrorCode::ConfigError, "bad problem option " + k);
    }
    return catalog(parts[0], d, seed, opt);
}

inline ObjectiveSpec problem_of(const RunConfig& c) {
    return catalog(c.problem, c.dim, c.problem_seed, c.catalog);
}

inline HyperParams params_of(const RunConfig& c, const ObjectiveSpec& spec) {
    if (c.explicit_params) return manual_params(c.d_radius, c.eta, c.t_len, c.k_eps, c.delta, c.p_fail);
    return compute_hyperparams(spec, c.budget, c.p_fail, c.gap_bound);
}

} // namespace oqn
