#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "iht/linalg.hpp"
#include "iht/parametric.hpp"
#include "iht/problems.hpp"
#include "iht/rng.hpp"
#include "iht/solvers.hpp"

namespace iht {

enum class Method { iht, noisy_iht, parametric_iht };

inline const char* method_name(Method m) {
    switch (m) {
        case Method::iht: return "iht";
        case Method::noisy_iht: return "noisy_iht";
        case Method::parametric_iht: return "parametric_iht";
    }
    return "?";
}

inline Method method_from_name(const std::string& s) {
    if (s == "iht") return Method::iht;
    if (s == "noisy_iht" || s == "noisy") return Method::noisy_iht;
    if (s == "parametric_iht" || s == "parametric") return Method::parametric_iht;
    throw std::invalid_argument("unknown method: " + s);
}

struct GridConfig {
    std::size_t n = 200;
    std::vector<std::size_t> m_values = {50, 60, 70, 80, 90, 100, 110, 120};
    std::vector<double> mu_values = {0.025, 0.05, 0.075, 0.1, 0.125, 0.15, 0.175, 0.2};
    int runs_per_cell = 20;
    Ensemble ensemble = Ensemble::gaussian;
    std::vector<Method> methods = {Method::iht, Method::noisy_iht, Method::parametric_iht};
    double failure_threshold = 0.03;
    std::uint64_t master_seed = 0;

    int iht_iterations = 3000;  // matches the noisy budget of 5 x 600
    NoisyIhtConfig noisy;
    TrainConfig train;
    // Measured wall time per solve breaks byte-level reproducibility of the
    // CSV output, so timing is opt-in; the column reads 0 when disabled.
    bool measure_timing = false;
};

struct RunRow {
    Method method = Method::iht;
    std::size_t m = 0;
    double mu = 0.0;
    std::size_t s = 0;
    int run = 0;
    double objective_error = 0.0;
    int failure = 0;
    double rel_recovery_error = 0.0;
    int iterations = 0;
    double wall_ms = 0.0;
    bool training_aborted = false;
};

struct CellAggregate {
    Method method = Method::iht;
    std::size_t m = 0;
    double mu = 0.0;
    double mean_objective_error = 0.0;
    int failure_count = 0;
    double mean_rel_recovery_error = 0.0;
};

struct GridMetrics {
    std::vector<RunRow> rows;    // ordered by (method, m, mu, run)
    std::vector<CellAggregate> cells;
    std::vector<std::pair<Method, double>> overall;  // mean of cell means
    int aborted_trainings = 0;
};

namespace detail {

inline bool wants(const GridConfig& cfg, Method m) {
    return std::find(cfg.methods.begin(), cfg.methods.end(), m) != cfg.methods.end();
}

struct CellOutput {
    std::vector<RunRow> rows;  // one per requested method, cfg.methods order
};

}  // namespace detail

/// One (m, mu, run) realization: the three methods consume the identical
/// instance, and the parametric method warm-starts from this cell's noisy
/// IHT iterate (pre-refinement). All reported metrics are post-refinement.
inline detail::CellOutput run_cell(const GridConfig& cfg, std::size_t m_index,
                                   std::size_t mu_index, int run_index) {
    const std::size_t m = cfg.m_values.at(m_index);
    const double mu = cfg.mu_values.at(mu_index);
    Rng cell = Rng(cfg.master_seed).child(m_index).child(mu_index).child(std::uint64_t(run_index));
    Rng inst_rng = cell.child(0);
    Rng noise_rng = cell.child(1);
    Rng train_rng = cell.child(2);

    ProblemInstance p = make_instance({cfg.ensemble, m, cfg.n}, mu, inst_rng);
    const Vector& u_gen = *p.u_gen;
    const double u_gen_nsq = norm_sq(u_gen);

    const bool want_iht = detail::wants(cfg, Method::iht);
    const bool want_noisy = detail::wants(cfg, Method::noisy_iht);
    const bool want_param = detail::wants(cfg, Method::parametric_iht);

    auto clock_now = [] { return std::chrono::steady_clock::now(); };
    auto elapsed_ms = [&](auto t0) {
        return std::chrono::duration<double, std::milli>(clock_now() - t0).count();
    };

    auto make_row = [&](Method method, const SolverResult& refined, int iterations,
                        double wall_ms, bool aborted) {
        RunRow row;
        row.method = method;
        row.m = m;
        row.mu = mu;
        row.s = p.s;
        row.run = run_index;
        row.objective_error = refined.objective;
        row.failure = refined.objective > cfg.failure_threshold ? 1 : 0;
        double d = 0.0;
        for (std::size_t i = 0; i < u_gen.size(); ++i) {
            double e = refined.u[i] - u_gen[i];
            d += e * e;
        }
        row.rel_recovery_error = d / u_gen_nsq;
        row.iterations = iterations;
        row.wall_ms = cfg.measure_timing ? wall_ms : 0.0;
        row.training_aborted = aborted;
        return row;
    };

    detail::CellOutput out;
    std::map<Method, RunRow> rows;

    if (want_iht) {
        auto t0 = clock_now();
        IhtConfig plain;
        plain.max_iters = cfg.iht_iterations;
        SolverResult r = refine(p, run_iht(p, plain, Vector(cfg.n, 0.0)));
        rows[Method::iht] = make_row(Method::iht, r, cfg.iht_iterations, elapsed_ms(t0), false);
    }

    SolverResult noisy_raw;
    if (want_noisy || want_param) {
        auto t0 = clock_now();
        noisy_raw = run_noisy_iht(p, cfg.noisy, noise_rng);
        if (want_noisy) {
            SolverResult r = refine(p, noisy_raw);
            rows[Method::noisy_iht] =
                make_row(Method::noisy_iht, r, noisy_raw.iterations_run, elapsed_ms(t0), false);
        }
    }

    if (want_param) {
        auto t0 = clock_now();
        const double tau = resolve_tau(p.A, std::nullopt);
        try {
            SolverResult trained = train(p, noisy_raw.u, cfg.train, tau, train_rng);
            SolverResult r = refine(p, trained);
            rows[Method::parametric_iht] = make_row(Method::parametric_iht, r,
                                                    cfg.train.iterations, elapsed_ms(t0), false);
        } catch (const TrainingDiverged& e) {
            // Fall back to the warm start's refined metrics and flag the row.
            SolverResult r = refine(p, noisy_raw);
            rows[Method::parametric_iht] =
                make_row(Method::parametric_iht, r, e.iteration, elapsed_ms(t0), true);
        }
    }

    for (Method method : cfg.methods) out.rows.push_back(rows.at(method));
    return out;
}

/// Full sweep. Cells run on `jobs` workers over disjoint RNG streams; the
/// final ordering and every aggregate are independent of the worker count.
inline GridMetrics run_grid(const GridConfig& cfg, int jobs = 1) {
    if (cfg.m_values.empty() || cfg.mu_values.empty() || cfg.methods.empty() ||
        cfg.runs_per_cell < 1)
        throw std::invalid_argument("run_grid: bad config");

    struct Task {
        std::size_t mi, ui;
        int run;
    };
    std::vector<Task> tasks;
    for (std::size_t mi = 0; mi < cfg.m_values.size(); ++mi)
        for (std::size_t ui = 0; ui < cfg.mu_values.size(); ++ui)
            for (int run = 0; run < cfg.runs_per_cell; ++run) tasks.push_back({mi, ui, run});

    std::vector<detail::CellOutput> outputs(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            outputs[i] = run_cell(cfg, tasks[i].mi, tasks[i].ui, tasks[i].run);
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    GridMetrics gm;
    // Ordered reduction: method-major, then m, mu, run.
    for (std::size_t meth = 0; meth < cfg.methods.size(); ++meth) {
        for (std::size_t mi = 0; mi < cfg.m_values.size(); ++mi) {
            for (std::size_t ui = 0; ui < cfg.mu_values.size(); ++ui) {
                CellAggregate cell;
                cell.method = cfg.methods[meth];
                cell.m = cfg.m_values[mi];
                cell.mu = cfg.mu_values[ui];
                for (int run = 0; run < cfg.runs_per_cell; ++run) {
                    std::size_t t = (mi * cfg.mu_values.size() + ui) * cfg.runs_per_cell + run;
                    const RunRow& row = outputs[t].rows[meth];
                    gm.rows.push_back(row);
                    cell.mean_objective_error += row.objective_error;
                    cell.failure_count += row.failure;
                    cell.mean_rel_recovery_error += row.rel_recovery_error;
                    if (row.training_aborted) ++gm.aborted_trainings;
                }
                cell.mean_objective_error /= cfg.runs_per_cell;
                cell.mean_rel_recovery_error /= cfg.runs_per_cell;
                gm.cells.push_back(cell);
            }
        }
        double acc = 0.0;
        std::size_t ncells = cfg.m_values.size() * cfg.mu_values.size();
        for (std::size_t c = gm.cells.size() - ncells; c < gm.cells.size(); ++c)
            acc += gm.cells[c].mean_objective_error;
        gm.overall.emplace_back(cfg.methods[meth], acc / double(ncells));
    }
    return gm;
}

}  // namespace iht
