#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "critsing/mountain_pass.hpp"
#include "critsing/problem.hpp"
#include "critsing/singular_solvers.hpp"

namespace critsing {

/// Full run configuration: problem, grid, solver and output blocks.
/// Parsed from the declarative key/value format or from JSON; unknown keys
/// are rejected at load.
struct RunConfig {
    ProblemSpec problem;
    std::vector<double> lambdas;   ///< sweep list; single runs use problem.lambda
    bool has_lambda = false;
    DomainKind grid_kind = DomainKind::RadialBall;
    int grid_M = 256;
    SolverOptions solver;
    MountainPassOptions mp;
    double bubble_eps_floor = 0.0;  ///< 0: derived from the grid spacing
    std::uint64_t seed = 0;
    double weak_tol = 1e-7;
    int n_test_fields = 20;
    int probe_count = 200;
    double probe_radius = 1e-3;
    double lambda_max_tol = 0.05;
    std::string out_dir = "out";
    bool quiet = false;
    std::string config_hash;
};

namespace detail {

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hash_hex(const std::string& s) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(s)));
    return buf;
}

/// Parses the block text format into a JSON object:
///   block { key value...  ... }
inline nlohmann::json parse_block_text(const std::string& text) {
    nlohmann::json root = nlohmann::json::object();
    std::istringstream in(text);
    std::string line;
    std::string current;
    int lineno = 0;
    auto value_of = [](const std::string& tok) -> nlohmann::json {
        if (tok == "true") return true;
        if (tok == "false") return false;
        try {
            std::size_t pos = 0;
            const double d = std::stod(tok, &pos);
            if (pos == tok.size()) {
                if (d == static_cast<long long>(d) && tok.find_first_of(".eE") == std::string::npos)
                    return static_cast<long long>(d);
                return d;
            }
        } catch (...) {
        }
        return tok;
    };
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::vector<std::string> tok;
        for (std::string t; ls >> t;) tok.push_back(t);
        if (tok.empty()) continue;
        if (tok.size() == 2 && tok[1] == "{") {
            if (!current.empty())
                throw ConfigError("config: nested block at line " + std::to_string(lineno));
            current = tok[0];
            root[current] = nlohmann::json::object();
            continue;
        }
        if (tok.size() == 1 && tok[0] == "}") {
            if (current.empty())
                throw ConfigError("config: stray '}' at line " + std::to_string(lineno));
            current.clear();
            continue;
        }
        if (current.empty())
            throw ConfigError("config: entry outside a block at line " + std::to_string(lineno));
        if (tok.size() < 2)
            throw ConfigError("config: key without value at line " + std::to_string(lineno));
        if (tok.size() == 2) {
            root[current][tok[0]] = value_of(tok[1]);
        } else {
            nlohmann::json arr = nlohmann::json::array();
            for (std::size_t i = 1; i < tok.size(); ++i) arr.push_back(value_of(tok[i]));
            root[current][tok[0]] = arr;
        }
    }
    if (!current.empty()) throw ConfigError("config: unterminated block '" + current + "'");
    return root;
}

template <typename T>
void take(const nlohmann::json& block, const std::string& key, T& out) {
    if (block.contains(key)) out = block.at(key).get<T>();
}

inline void reject_unknown(const nlohmann::json& block, const std::string& name,
                           const std::set<std::string>& known) {
    for (auto it = block.begin(); it != block.end(); ++it)
        if (!known.count(it.key()))
            throw ConfigError("config: unknown key '" + name + "." + it.key() + "'");
}

}  // namespace detail

inline RunConfig config_from_json(const nlohmann::json& j) {
    RunConfig cfg;
    static const std::set<std::string> top = {"problem", "grid", "solver", "mp", "output"};
    detail::reject_unknown(j, "", top);
    if (!j.contains("problem")) throw ConfigError("config: missing 'problem' block");

    {
        const auto& b = j.at("problem");
        detail::reject_unknown(b, "problem", {"N", "delta", "a", "lambda", "lambdas"});
        detail::take(b, "N", cfg.problem.N);
        detail::take(b, "delta", cfg.problem.delta);
        detail::take(b, "a", cfg.problem.a);
        if (b.contains("lambda")) {
            cfg.problem.lambda = b.at("lambda").get<double>();
            cfg.has_lambda = true;
        }
        if (b.contains("lambdas")) cfg.lambdas = b.at("lambdas").get<std::vector<double>>();
    }
    if (j.contains("grid")) {
        const auto& b = j.at("grid");
        detail::reject_unknown(b, "grid", {"kind", "M"});
        std::string kind = "radial";
        detail::take(b, "kind", kind);
        if (kind == "radial") cfg.grid_kind = DomainKind::RadialBall;
        else if (kind == "box3d") cfg.grid_kind = DomainKind::Box3D;
        else throw ConfigError("config: grid.kind must be 'radial' or 'box3d'");
        detail::take(b, "M", cfg.grid_M);
    }
    if (j.contains("solver")) {
        const auto& b = j.at("solver");
        detail::reject_unknown(b, "solver",
                               {"seed", "newton_tol", "newton_max_iter", "max_halvings",
                                "eps0_factor", "eps_ratio", "eps_max_stages", "eps_stab_tol",
                                "monotone_tol", "monotone_max_outer", "e1_sup", "weak_tol",
                                "n_test_fields", "probe_count", "probe_radius",
                                "lambda_max_tol"});
        detail::take(b, "seed", cfg.seed);
        detail::take(b, "newton_tol", cfg.solver.newton_tol);
        detail::take(b, "newton_max_iter", cfg.solver.newton_max_iter);
        detail::take(b, "max_halvings", cfg.solver.max_halvings);
        detail::take(b, "eps0_factor", cfg.solver.eps0_factor);
        detail::take(b, "eps_ratio", cfg.solver.eps_ratio);
        detail::take(b, "eps_max_stages", cfg.solver.eps_max_stages);
        detail::take(b, "eps_stab_tol", cfg.solver.eps_stab_tol);
        detail::take(b, "monotone_tol", cfg.solver.monotone_tol);
        detail::take(b, "monotone_max_outer", cfg.solver.monotone_max_outer);
        detail::take(b, "e1_sup", cfg.solver.e1_sup);
        detail::take(b, "weak_tol", cfg.weak_tol);
        detail::take(b, "n_test_fields", cfg.n_test_fields);
        detail::take(b, "probe_count", cfg.probe_count);
        detail::take(b, "probe_radius", cfg.probe_radius);
        detail::take(b, "lambda_max_tol", cfg.lambda_max_tol);
    }
    if (j.contains("mp")) {
        const auto& b = j.at("mp");
        detail::reject_unknown(b, "mp",
                               {"path_nodes", "stall_tol", "max_sweeps", "polish_every",
                                "residual_tol", "distinct_tol", "classify_tol",
                                "classify_starts", "rho_levels", "descent_max_iter",
                                "bubble_cutoff", "step_fraction", "bubble_eps_floor"});
        detail::take(b, "path_nodes", cfg.mp.path_nodes);
        detail::take(b, "stall_tol", cfg.mp.stall_tol);
        detail::take(b, "max_sweeps", cfg.mp.max_sweeps);
        detail::take(b, "polish_every", cfg.mp.polish_every);
        detail::take(b, "residual_tol", cfg.mp.residual_tol);
        detail::take(b, "distinct_tol", cfg.mp.distinct_tol);
        detail::take(b, "classify_tol", cfg.mp.classify_tol);
        detail::take(b, "classify_starts", cfg.mp.classify_starts);
        detail::take(b, "rho_levels", cfg.mp.rho_levels);
        detail::take(b, "descent_max_iter", cfg.mp.descent_max_iter);
        detail::take(b, "bubble_cutoff", cfg.mp.bubble_cutoff_radius);
        detail::take(b, "step_fraction", cfg.mp.step_fraction);
        detail::take(b, "bubble_eps_floor", cfg.bubble_eps_floor);
    }
    if (j.contains("output")) {
        const auto& b = j.at("output");
        detail::reject_unknown(b, "output", {"dir", "formats", "quiet"});
        detail::take(b, "dir", cfg.out_dir);
        detail::take(b, "quiet", cfg.quiet);
    }

    try {
        ProblemSpec probe = cfg.problem;
        if (!cfg.has_lambda) probe.lambda = cfg.lambdas.empty() ? 1.0 : cfg.lambdas.front();
        probe.validate();
    } catch (const DomainError& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (cfg.grid_M < 16) throw ConfigError("config: grid.M must be >= 16");

    // canonical hash over the sorted-key dump
    cfg.config_hash = detail::hash_hex(nlohmann::json(j).dump());
    return cfg;
}

/// Loads a configuration file; JSON when the first non-space character is
/// '{', the block text format otherwise.
inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    nlohmann::json j;
    if (first != std::string::npos && text[first] == '{') {
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("config: JSON parse failure: ") + e.what());
        }
    } else {
        j = detail::parse_block_text(text);
    }
    return config_from_json(j);
}

}  // namespace critsing
