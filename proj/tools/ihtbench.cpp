// Command-line driver: single solves, the (m, mu) grid sweep, and the 2D
// basin-of-attraction study, with CSV/JSON/SVG outputs.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "iht/basin2d.hpp"
#include "iht/experiments.hpp"
#include "iht/parametric.hpp"
#include "iht/problems.hpp"
#include "iht/render.hpp"
#include "iht/reporting.hpp"
#include "iht/rng.hpp"
#include "iht/solvers.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

std::map<std::string, std::string> load_config_file(const std::string& path) {
    std::map<std::string, std::string> kv;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config file: " + path);
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            s.erase(0, s.find_first_not_of(" \t\r"));
            auto end = s.find_last_not_of(" \t\r");
            s.erase(end == std::string::npos ? 0 : end + 1);
            return s;
        };
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (!key.empty()) kv[key] = val;
    }
    return kv;
}

template <typename T>
std::vector<T> parse_list(const std::string& s) {
    std::vector<T> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::stringstream conv(item);
        T v;
        if (!(conv >> v)) throw std::runtime_error("bad list item: " + item);
        out.push_back(v);
    }
    if (out.empty()) throw std::runtime_error("empty list: " + s);
    return out;
}

std::uint64_t fresh_seed() {
    std::random_device rd;
    return (std::uint64_t(rd()) << 32) ^ rd();
}

std::ofstream open_output(const fs::path& dir, const std::string& name) {
    std::ofstream os(dir / name, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + (dir / name).string());
    return os;
}

// --- solve ---

int cmd_solve(const std::string& ensemble, std::size_t m, std::size_t n, double mu,
              const std::string& method_str, std::optional<std::uint64_t> seed_opt) {
    std::uint64_t seed = seed_opt ? *seed_opt : fresh_seed();
    iht::Method method = iht::method_from_name(method_str);
    iht::Rng root(seed);
    iht::Rng inst_rng = root.child(0);
    iht::Rng noise_rng = root.child(1);
    iht::Rng train_rng = root.child(2);

    iht::ProblemInstance p =
        iht::make_instance({iht::ensemble_from_name(ensemble), m, n}, mu, inst_rng);

    iht::SolverResult raw;
    if (method == iht::Method::iht) {
        iht::IhtConfig cfg;
        cfg.max_iters = 3000;
        raw = iht::run_iht(p, cfg, iht::Vector(n, 0.0));
    } else {
        iht::NoisyIhtConfig ncfg;
        raw = iht::run_noisy_iht(p, ncfg, noise_rng);
        if (method == iht::Method::parametric_iht) {
            double tau = iht::resolve_tau(p.A, std::nullopt);
            raw = iht::train(p, raw.u, iht::TrainConfig{}, tau, train_rng);
        }
    }
    iht::SolverResult r = iht::refine(p, raw);

    double rel = 0.0;
    if (p.u_gen) {
        double d = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double e = r.u[i] - (*p.u_gen)[i];
            d += e * e;
        }
        rel = d / iht::norm_sq(*p.u_gen);
    }

    ordered_json j;
    j["tool_version"] = iht::kToolVersion;
    j["subcommand"] = "solve";
    j["seed"] = seed;
    j["ensemble"] = ensemble;
    j["m"] = m;
    j["n"] = n;
    j["mu"] = mu;
    j["s"] = p.s;
    j["method"] = iht::method_name(method);
    j["objective"] = r.objective;
    j["support_size"] = r.support.size();
    j["rel_recovery_error"] = rel;
    j["iterations"] = raw.iterations_run;
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

// --- grid ---

struct GridCliArgs {
    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    int jobs = 1;
    std::optional<int> runs;
    std::optional<std::string> m_values;
    std::optional<std::string> mu_values;
    std::optional<std::string> methods;
    std::optional<std::string> ensemble;
    bool timing = false;
};

iht::GridConfig resolve_grid_config(const GridCliArgs& args, std::uint64_t& seed_out) {
    std::map<std::string, std::string> kv;
    if (!args.config_path.empty()) kv = load_config_file(args.config_path);
    iht::GridConfig cfg;
    auto get = [&](const char* key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        return it->second;
    };
    if (auto v = get("n")) cfg.n = std::stoul(*v);
    if (auto v = get("m_values")) cfg.m_values = parse_list<std::size_t>(*v);
    if (auto v = get("mu_values")) cfg.mu_values = parse_list<double>(*v);
    if (auto v = get("runs_per_cell")) cfg.runs_per_cell = std::stoi(*v);
    if (auto v = get("ensemble")) cfg.ensemble = iht::ensemble_from_name(*v);
    if (auto v = get("failure_threshold")) cfg.failure_threshold = std::stod(*v);
    if (auto v = get("iht_iterations")) cfg.iht_iterations = std::stoi(*v);
    if (auto v = get("noisy_rounds")) cfg.noisy.rounds = std::stoi(*v);
    if (auto v = get("noisy_iters_per_round")) cfg.noisy.iters_per_round = std::stoi(*v);
    if (auto v = get("noisy_sigma")) cfg.noisy.sigma = std::stod(*v);
    if (auto v = get("train_momentum")) cfg.train.momentum = std::stod(*v);
    if (auto v = get("train_learning_rate")) cfg.train.learning_rate = std::stod(*v);
    if (auto v = get("train_iterations")) cfg.train.iterations = std::stoi(*v);
    if (auto v = get("train_dropout_rate")) cfg.train.dropout_rate = std::stod(*v);
    if (auto v = get("timing")) cfg.measure_timing = (*v == "on" || *v == "1" || *v == "true");
    if (auto v = get("methods")) {
        cfg.methods.clear();
        for (const auto& name : parse_list<std::string>(*v))
            cfg.methods.push_back(iht::method_from_name(name));
    }

    std::uint64_t seed = 0;
    bool have_seed = false;
    if (auto v = get("seed")) {
        seed = std::stoull(*v);
        have_seed = true;
    }
    // Flags override file values.
    if (args.runs) cfg.runs_per_cell = *args.runs;
    if (args.m_values) cfg.m_values = parse_list<std::size_t>(*args.m_values);
    if (args.mu_values) cfg.mu_values = parse_list<double>(*args.mu_values);
    if (args.ensemble) cfg.ensemble = iht::ensemble_from_name(*args.ensemble);
    if (args.methods) {
        cfg.methods.clear();
        for (const auto& name : parse_list<std::string>(*args.methods))
            cfg.methods.push_back(iht::method_from_name(name));
    }
    if (args.timing) cfg.measure_timing = true;
    if (args.seed) {
        seed = *args.seed;
        have_seed = true;
    }
    if (!have_seed) seed = fresh_seed();
    cfg.master_seed = seed;
    seed_out = seed;
    return cfg;
}

iht::RunManifest grid_manifest(const iht::GridConfig& cfg, std::uint64_t seed) {
    iht::RunManifest man;
    man.subcommand = "grid";
    man.seed = seed;
    auto join_m = [&] {
        std::string s;
        for (auto m : cfg.m_values) s += (s.empty() ? "" : ",") + std::to_string(m);
        return s;
    };
    auto join_mu = [&] {
        std::string s;
        for (auto mu : cfg.mu_values) s += (s.empty() ? "" : ",") + iht::fmt17(mu);
        return s;
    };
    auto join_methods = [&] {
        std::string s;
        for (auto m : cfg.methods) s += (s.empty() ? "" : ",") + std::string(iht::method_name(m));
        return s;
    };
    man.config = {
        {"n", std::to_string(cfg.n)},
        {"m_values", join_m()},
        {"mu_values", join_mu()},
        {"runs_per_cell", std::to_string(cfg.runs_per_cell)},
        {"ensemble", iht::ensemble_name(cfg.ensemble)},
        {"methods", join_methods()},
        {"failure_threshold", iht::fmt17(cfg.failure_threshold)},
        {"iht_iterations", std::to_string(cfg.iht_iterations)},
        {"noisy_rounds", std::to_string(cfg.noisy.rounds)},
        {"noisy_iters_per_round", std::to_string(cfg.noisy.iters_per_round)},
        {"noisy_sigma", iht::fmt17(cfg.noisy.sigma)},
        {"train_momentum", iht::fmt17(cfg.train.momentum)},
        {"train_learning_rate", iht::fmt17(cfg.train.learning_rate)},
        {"train_iterations", std::to_string(cfg.train.iterations)},
        {"train_dropout_rate", iht::fmt17(cfg.train.dropout_rate)},
        {"timing", cfg.measure_timing ? "on" : "off"},
    };
    return man;
}

int cmd_grid(const GridCliArgs& args) {
    std::uint64_t seed = 0;
    iht::GridConfig cfg = resolve_grid_config(args, seed);

    fs::path out_dir(args.out_dir);
    fs::create_directories(out_dir);
    iht::RunManifest man = grid_manifest(cfg, seed);
    man.outputs = {"runs.csv", "cells.csv", "summary.json"};
    const char* metric_names[] = {"objective", "failures", "recovery"};
    for (iht::Method method : cfg.methods)
        for (const char* metric : metric_names)
            man.outputs.push_back(std::string("heatmap_") + metric + "_" +
                                  iht::method_name(method) + ".svg");

    // Open every output before computing anything.
    std::map<std::string, std::ofstream> files;
    for (const auto& name : man.outputs) files[name] = open_output(out_dir, name);

    std::cerr << "grid: seed=" << seed << " jobs=" << args.jobs << "\n";
    iht::GridMetrics gm = iht::run_grid(cfg, args.jobs);

    iht::write_runs_csv(files["runs.csv"], gm, man);
    iht::write_cells_csv(files["cells.csv"], gm, man);
    files["summary.json"] << iht::grid_summary_json(gm, man).dump(2) << "\n";

    // One heatmap per metric per method, rendered from the aggregate rows.
    std::ostringstream manifest_comment;
    iht::write_manifest_comment(manifest_comment, man, "");
    for (iht::Method method : cfg.methods) {
        for (const char* metric : metric_names) {
            std::vector<std::vector<double>> vals(cfg.mu_values.size(),
                                                  std::vector<double>(cfg.m_values.size()));
            for (const auto& c : gm.cells) {
                if (c.method != method) continue;
                std::size_t mi = std::size_t(std::find(cfg.m_values.begin(), cfg.m_values.end(),
                                                       c.m) -
                                             cfg.m_values.begin());
                std::size_t ui = std::size_t(std::find(cfg.mu_values.begin(),
                                                       cfg.mu_values.end(), c.mu) -
                                             cfg.mu_values.begin());
                double v = c.mean_objective_error;
                if (std::string(metric) == "failures") v = c.failure_count;
                if (std::string(metric) == "recovery") v = c.mean_rel_recovery_error;
                vals[ui][mi] = v;
            }
            std::string name =
                std::string("heatmap_") + metric + "_" + iht::method_name(method) + ".svg";
            std::string title = std::string(metric) + " / " + iht::method_name(method);
            files[name] << iht::heatmap_svg(title, cfg.m_values, cfg.mu_values, vals,
                                            manifest_comment.str());
        }
    }
    for (const auto& [method, avg] : gm.overall)
        std::cerr << "overall mean objective error " << iht::method_name(method) << ": " << avg
                  << "\n";
    return kExitOk;
}

// --- basin2d ---

struct BasinCliArgs {
    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    int jobs = 1;
    std::optional<int> num_settings;
    std::vector<std::uint64_t> render_ids;
};

int cmd_basin2d(const BasinCliArgs& args) {
    std::map<std::string, std::string> kv;
    if (!args.config_path.empty()) kv = load_config_file(args.config_path);
    iht::BasinStudyConfig cfg;
    auto get = [&](const char* key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        return it->second;
    };
    if (auto v = get("num_settings")) cfg.num_settings = std::stoi(*v);
    if (auto v = get("grid_points_per_axis")) cfg.grid_points_per_axis = std::stoi(*v);
    if (auto v = get("domain_lo")) cfg.domain_lo = std::stod(*v);
    if (auto v = get("domain_hi")) cfg.domain_hi = std::stod(*v);
    if (auto v = get("tau_scale")) cfg.tau_scale = std::stod(*v);
    if (auto v = get("max_iters")) cfg.max_iters = std::stoi(*v);
    if (auto v = get("fixed_point_tol")) cfg.fixed_point_tol = std::stod(*v);
    if (auto v = get("cluster_tol")) cfg.cluster_tol = std::stod(*v);
    if (auto v = get("norm_rule"))
        cfg.norm_rule = (*v == "frobenius") ? iht::StepNormRule::frobenius
                                            : iht::StepNormRule::spectral;
    std::uint64_t seed = 0;
    bool have_seed = false;
    if (auto v = get("seed")) {
        seed = std::stoull(*v);
        have_seed = true;
    }
    if (args.num_settings) cfg.num_settings = *args.num_settings;
    if (args.seed) {
        seed = *args.seed;
        have_seed = true;
    }
    if (!have_seed) seed = fresh_seed();

    iht::RunManifest man;
    man.subcommand = "basin2d";
    man.seed = seed;
    man.config = {
        {"num_settings", std::to_string(cfg.num_settings)},
        {"grid_points_per_axis", std::to_string(cfg.grid_points_per_axis)},
        {"domain_lo", iht::fmt17(cfg.domain_lo)},
        {"domain_hi", iht::fmt17(cfg.domain_hi)},
        {"tau_scale", iht::fmt17(cfg.tau_scale)},
        {"norm_rule", cfg.norm_rule == iht::StepNormRule::frobenius ? "frobenius" : "spectral"},
        {"max_iters", std::to_string(cfg.max_iters)},
        {"fixed_point_tol", iht::fmt17(cfg.fixed_point_tol)},
        {"cluster_tol", iht::fmt17(cfg.cluster_tol)},
    };
    man.outputs = {"basin_summary.json", "basin_settings.csv"};
    for (std::uint64_t id : args.render_ids)
        man.outputs.push_back("basin_map_" + std::to_string(id) + ".svg");

    fs::path out_dir(args.out_dir);
    fs::create_directories(out_dir);
    std::map<std::string, std::ofstream> files;
    for (const auto& name : man.outputs) files[name] = open_output(out_dir, name);

    std::cerr << "basin2d: seed=" << seed << " jobs=" << args.jobs << "\n";
    iht::BasinStudySummary sum = iht::run_basin_study(cfg, iht::Rng(seed), args.jobs);

    files["basin_summary.json"] << iht::basin_summary_json(sum, man).dump(2) << "\n";
    iht::write_basin_csv(files["basin_settings.csv"], sum, man);

    std::ostringstream manifest_comment;
    iht::write_manifest_comment(manifest_comment, man, "");
    for (std::uint64_t id : args.render_ids) {
        if (id >= sum.reports.size())
            throw std::runtime_error("render id out of range: " + std::to_string(id));
        files["basin_map_" + std::to_string(id) + ".svg"]
            << iht::basin_map_svg(sum.reports[id], cfg, manifest_comment.str());
    }
    std::cerr << "two_minima_count=" << sum.two_minima_count << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse recovery via perturbed iterative hard thresholding"};
    app.require_subcommand(1);

    // solve
    auto* solve = app.add_subcommand("solve", "Solve one random instance");
    std::string s_ensemble = "gaussian", s_method = "iht";
    std::size_t s_m = 100, s_n = 200;
    double s_mu = 0.05;
    std::optional<std::uint64_t> s_seed;
    solve->add_option("--ensemble", s_ensemble, "gaussian|bernoulli|subsampled_dct");
    solve->add_option("--m", s_m, "measurements")->required();
    solve->add_option("--n", s_n, "signal dimension");
    solve->add_option("--mu", s_mu, "relative sparsity, s = round(mu*n)")->required();
    solve->add_option("--method", s_method, "iht|noisy|parametric");
    solve->add_option("--seed", s_seed, "master seed");

    // grid
    auto* grid = app.add_subcommand("grid", "Run the (m, mu) benchmark sweep");
    GridCliArgs g;
    grid->add_option("--config", g.config_path, "flat key=value config file");
    grid->add_option("--out", g.out_dir, "output directory");
    grid->add_option("--seed", g.seed, "master seed");
    grid->add_option("--jobs", g.jobs, "worker threads");
    grid->add_option("--runs", g.runs, "runs per cell");
    grid->add_option("--m-values", g.m_values, "comma list of m");
    grid->add_option("--mu-values", g.mu_values, "comma list of mu");
    grid->add_option("--methods", g.methods, "comma list of methods");
    grid->add_option("--ensemble", g.ensemble, "matrix ensemble");
    grid->add_flag("--timing", g.timing, "record wall time per solve (breaks byte determinism)");

    // basin2d
    auto* basin = app.add_subcommand("basin2d", "Run the 2D basin-of-attraction study");
    BasinCliArgs b;
    basin->add_option("--config", b.config_path, "flat key=value config file");
    basin->add_option("--out", b.out_dir, "output directory");
    basin->add_option("--seed", b.seed, "master seed");
    basin->add_option("--jobs", b.jobs, "worker threads");
    basin->add_option("--num-settings", b.num_settings, "number of random settings");
    basin->add_option("--render", b.render_ids, "setting ids to render as basin maps");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*solve) return cmd_solve(s_ensemble, s_m, s_n, s_mu, s_method, s_seed);
        if (*grid) return cmd_grid(g);
        if (*basin) return cmd_basin2d(b);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
