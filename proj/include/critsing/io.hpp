#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "critsing/continuation.hpp"
#include "critsing/energy.hpp"
#include "critsing/grid.hpp"
#include "critsing/singular_solvers.hpp"

namespace critsing {

using ordered_json = nlohmann::ordered_json;

/// 17 significant digits, enough to round-trip a double.
inline std::string fmt17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Field CSV: one header row after the config-hash comment line, one row per
/// node (radial grids append the boundary node for plot-ready output).
inline void write_field_csv(const std::string& path, const Field& u,
                            const std::string& config_hash) {
    std::ofstream out(path);
    if (!out) throw Error("write_field_csv: cannot open " + path);
    out << "# config_hash=" << config_hash << "\n";
    const Grid& g = *u.grid;
    if (g.kind == DomainKind::RadialBall) {
        out << "r,value\n";
        for (int i = 0; i < u.size(); ++i)
            out << fmt17(g.r[i]) << "," << fmt17(u.v[i]) << "\n";
        out << fmt17(1.0) << "," << fmt17(0.0) << "\n";
    } else {
        out << "x,y,z,value\n";
        for (int i = 0; i < u.size(); ++i) {
            const auto c = g.node_coords(i);
            out << fmt17(c[0]) << "," << fmt17(c[1]) << "," << fmt17(c[2]) << ","
                << fmt17(u.v[i]) << "\n";
        }
    }
}

inline ordered_json energy_json(const EnergyBreakdown& e) {
    return ordered_json{{"dirichlet", e.dirichlet},
                        {"g_term", e.g_term},
                        {"critical", e.critical},
                        {"total", e.total}};
}

/// JSON array form of a field: [[coordinate..., value], ...].
inline ordered_json field_json(const Field& u) {
    ordered_json arr = ordered_json::array();
    const Grid& g = *u.grid;
    for (int i = 0; i < u.size(); ++i) {
        const auto c = g.node_coords(i);
        if (g.kind == DomainKind::RadialBall)
            arr.push_back(ordered_json::array({c[0], u.v[i]}));
        else
            arr.push_back(ordered_json::array({c[0], c[1], c[2], u.v[i]}));
    }
    return arr;
}

inline ordered_json report_json(const SolveReport& rep, const ProblemSpec& spec,
                                const std::string& field_csv_path,
                                const std::string& config_hash) {
    ordered_json j;
    j["config_hash"] = config_hash;
    j["params"] = ordered_json{{"N", spec.N},
                               {"delta", spec.delta},
                               {"a", spec.a},
                               {"lambda", spec.lambda},
                               {"domain", to_string(spec.domain)}};
    j["converged"] = rep.converged;
    j["iterations"] = rep.iterations;
    j["residual_inf"] = rep.residual_inf;
    j["energy"] = energy_json(rep.energy);
    j["eps_schedule_used"] = rep.eps_schedule_used;
    j["monotonicity_certificate"] = rep.monotonicity_certificate;
    j["field_csv_path"] = field_csv_path;
    j["field"] = field_json(rep.solution);
    return j;
}

inline void write_json(const std::string& path, const ordered_json& j) {
    std::ofstream out(path);
    if (!out) throw Error("write_json: cannot open " + path);
    out << j.dump(2) << "\n";
}

inline void write_branch_csv(const std::string& path, const std::vector<BranchPoint>& rows,
                             const std::string& config_hash) {
    std::ofstream out(path);
    if (!out) throw Error("write_branch_csv: cannot open " + path);
    out << "# config_hash=" << config_hash << "\n";
    out << "lambda,first_found,second_found,norm_inf_first,norm_inf_second,"
           "energy_first,gamma0,case,residuals\n";
    for (const BranchPoint& r : rows) {
        out << fmt17(r.lambda) << "," << (r.first_found ? 1 : 0) << ","
            << (r.second_found ? 1 : 0) << "," << fmt17(r.norm_inf_first) << ","
            << fmt17(r.norm_inf_second) << "," << fmt17(r.energy_first) << ",";
        if (r.gamma0) out << fmt17(*r.gamma0);
        out << "," << r.case_label << "," << fmt17(r.residual_first) << ";"
            << fmt17(r.residual_second) << "\n";
    }
}

/// Path trace rows (sweep, node index, energy) accumulated by the deformation
/// loop.
inline void write_path_trace_csv(const std::string& path,
                                 const std::vector<std::array<double, 3>>& trace,
                                 const std::string& config_hash) {
    std::ofstream out(path);
    if (!out) throw Error("write_path_trace_csv: cannot open " + path);
    out << "# config_hash=" << config_hash << "\n";
    out << "sweep,node,energy\n";
    for (const auto& row : trace)
        out << static_cast<long long>(row[0]) << "," << static_cast<long long>(row[1]) << ","
            << fmt17(row[2]) << "\n";
}

}  // namespace critsing
