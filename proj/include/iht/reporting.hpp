#pragma once

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "iht/basin2d.hpp"
#include "iht/experiments.hpp"

namespace iht {

inline constexpr const char* kToolVersion = "0.1.0";

inline std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Resolved run description stamped into every output file so results are
/// self-describing and replayable.
struct RunManifest {
    std::string subcommand;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> config;  // fully materialized
    std::vector<std::string> outputs;
};

inline void write_manifest_comment(std::ostream& os, const RunManifest& man,
                                   const char* prefix) {
    os << prefix << " tool_version=" << kToolVersion << " subcommand=" << man.subcommand
       << " seed=" << man.seed << "\n";
    os << prefix << " config:";
    for (const auto& [k, v] : man.config) os << ' ' << k << '=' << v;
    os << "\n";
    os << prefix << " outputs:";
    for (const auto& o : man.outputs) os << ' ' << o;
    os << "\n";
}

inline nlohmann::ordered_json manifest_json(const RunManifest& man) {
    nlohmann::ordered_json j;
    j["tool_version"] = kToolVersion;
    j["subcommand"] = man.subcommand;
    j["seed"] = man.seed;
    nlohmann::ordered_json cfg;
    for (const auto& [k, v] : man.config) cfg[k] = v;
    j["config"] = cfg;
    j["outputs"] = man.outputs;
    return j;
}

// --- grid sweep outputs ---

inline void write_runs_csv(std::ostream& os, const GridMetrics& gm, const RunManifest& man) {
    write_manifest_comment(os, man, "#");
    os << "method,m,mu,s,run,objective_error,failure,rel_recovery_error,iterations,wall_ms\n";
    for (const auto& r : gm.rows) {
        os << method_name(r.method) << ',' << r.m << ',' << fmt17(r.mu) << ',' << r.s << ','
           << r.run << ',' << fmt17(r.objective_error) << ',' << r.failure << ','
           << fmt17(r.rel_recovery_error) << ',' << r.iterations << ',' << fmt17(r.wall_ms)
           << "\n";
    }
}

inline void write_cells_csv(std::ostream& os, const GridMetrics& gm, const RunManifest& man) {
    write_manifest_comment(os, man, "#");
    os << "method,m,mu,mean_objective_error,failure_count,mean_rel_recovery_error\n";
    for (const auto& c : gm.cells) {
        os << method_name(c.method) << ',' << c.m << ',' << fmt17(c.mu) << ','
           << fmt17(c.mean_objective_error) << ',' << c.failure_count << ','
           << fmt17(c.mean_rel_recovery_error) << "\n";
    }
}

inline nlohmann::ordered_json grid_summary_json(const GridMetrics& gm, const RunManifest& man) {
    nlohmann::ordered_json j;
    j["manifest"] = manifest_json(man);
    nlohmann::ordered_json overall;
    for (const auto& [method, avg] : gm.overall) overall[method_name(method)] = avg;
    j["overall_mean_objective_error"] = overall;
    j["aborted_trainings"] = gm.aborted_trainings;
    return j;
}

// --- basin study outputs ---

inline void write_basin_csv(std::ostream& os, const BasinStudySummary& sum,
                            const RunManifest& man) {
    write_manifest_comment(os, man, "#");
    os << "setting,fixed_points,in_domain_fixed_points,global_tie,two_minima,"
          "dist_global_to_local_region,dist_local_to_global_region,"
          "witness_global_to_local,witness_local_to_global\n";
    for (const auto& rep : sum.reports) {
        int in_domain = 0;
        for (const auto& fp : rep.fixed_points)
            if (fp.in_domain) ++in_domain;
        os << rep.setting_id << ',' << rep.fixed_points.size() << ',' << in_domain << ','
           << (rep.global_tie ? 1 : 0) << ',' << (basin_setting_has_two_minima(rep) ? 1 : 0)
           << ',';
        if (rep.distances_valid)
            os << fmt17(rep.dist_global_to_local_region) << ','
               << fmt17(rep.dist_local_to_global_region) << ',' << rep.witness_global_to_local
               << ',' << rep.witness_local_to_global;
        else
            os << ",,,";
        os << "\n";
    }
}

inline nlohmann::ordered_json basin_summary_json(const BasinStudySummary& sum,
                                                 const RunManifest& man) {
    nlohmann::ordered_json j;
    j["manifest"] = manifest_json(man);
    j["num_settings"] = sum.reports.size();
    j["two_minima_count"] = sum.two_minima_count;
    j["distance_sample_count"] = sum.distance_sample_count;
    j["mean_dist_global_to_local_region"] = sum.mean_dist_global_to_local_region;
    j["mean_dist_local_to_global_region"] = sum.mean_dist_local_to_global_region;
    return j;
}

}  // namespace iht
