// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. argv[1] must point at the ihtbench binary (used by criterion 8).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "iht/basin2d.hpp"
#include "iht/experiments.hpp"
#include "iht/parametric.hpp"
#include "iht/problems.hpp"
#include "iht/rng.hpp"
#include "iht/solvers.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace iht;

namespace {

int g_failures = 0;

void report(int criterion, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", criterion, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

GridMetrics g_reduced_grid;  // shared between criteria 1 and 9

// 1. Table-1-style ratios on the reduced grid.
void criterion1() {
    GridConfig cfg;
    cfg.m_values = {50, 80, 120};
    cfg.mu_values = {0.05, 0.1, 0.2};
    cfg.runs_per_cell = 10;
    cfg.master_seed = 20260823;
    g_reduced_grid = run_grid(cfg, 1);

    double avg_iht = 0, avg_noisy = 0, avg_param = 0;
    for (const auto& [method, avg] : g_reduced_grid.overall) {
        if (method == Method::iht) avg_iht = avg;
        if (method == Method::noisy_iht) avg_noisy = avg;
        if (method == Method::parametric_iht) avg_param = avg;
    }
    bool ordered = avg_iht > avg_noisy && avg_noisy > avg_param;
    bool r1 = avg_iht / avg_noisy >= 2.0;
    bool r2 = avg_iht / avg_param >= 3.0;
    report(1, ordered && r1 && r2,
           "overall averages iht=" + fmt(avg_iht) + " noisy=" + fmt(avg_noisy) +
               " parametric=" + fmt(avg_param) + " ratios " + fmt(avg_iht / avg_noisy) + " (>=2), " +
               fmt(avg_iht / avg_param) + " (>=3), ordering " + (ordered ? "ok" : "violated"));
}

// 2. Basin study with the paper's defaults.
void criterion2() {
    BasinStudyConfig cfg;  // 1000 settings, 81x81 grid
    BasinStudySummary sum = run_basin_study(cfg, Rng(424242), 1);
    bool count_ok = sum.two_minima_count >= 840 && sum.two_minima_count <= 930;
    double gl = sum.mean_dist_global_to_local_region;
    double lg = sum.mean_dist_local_to_global_region;
    bool gl_ok = gl >= 0.20 && gl <= 0.31;
    bool lg_ok = lg >= 0.10 && lg <= 0.19;
    bool order_ok = gl > lg;
    report(2, count_ok && gl_ok && lg_ok && order_ok,
           "two-minima count " + std::to_string(sum.two_minima_count) +
               " (in [840,930]), mean d(global->local region)=" + fmt(gl) +
               " (in [0.20,0.31]), mean d(local->global region)=" + fmt(lg) +
               " (in [0.10,0.19]), ordering " + (order_ok ? "ok" : "violated"));
}

// 3. Monotone descent of plain IHT with the auto step size.
void criterion3() {
    Rng root(333);
    bool ok = true;
    for (int rep = 0; rep < 100 && ok; ++rep) {
        Rng sub = root.child(std::uint64_t(rep));
        std::size_t m = 5 + std::size_t(sub.below(46));       // <= 50
        std::size_t n = m + 1 + std::size_t(sub.below(100 - m));  // <= 100
        std::size_t s_max = std::min<std::size_t>(10, n);
        double mu = double(1 + sub.below(s_max)) / double(n);
        ProblemInstance p = make_instance({Ensemble::gaussian, m, n}, mu, sub);
        double tau = resolve_tau(p.A, std::nullopt);
        AffineStep step = build_iht_affine(p.A, p.f, tau);
        Vector u(n, 0.0);
        double prev = objective(p.A, u, p.f);
        for (int k = 0; k < 200; ++k) {
            u = hard_threshold(affine_apply(step.W, step.b, u), p.s);
            double cur = objective(p.A, u, p.f);
            if (cur > prev + 1e-10) {
                ok = false;
                break;
            }
            prev = cur;
        }
    }
    report(3, ok, "objective non-increasing (slack 1e-10) over 100 random instances");
}

// 4. Brute-force dominance for all three methods on tiny instances.
void criterion4() {
    Rng root(444);
    bool ok = true;
    std::string why = "refined objectives dominate exhaustive enumeration on 50 tiny instances";
    for (int rep = 0; rep < 50 && ok; ++rep) {
        Rng sub = root.child(std::uint64_t(rep));
        std::size_t m = 4 + std::size_t(sub.below(5));   // <= 8
        std::size_t n = m + 2 + std::size_t(sub.below(std::min<std::size_t>(12, m + 6) - m - 1));
        n = std::min<std::size_t>(n, 12);
        std::size_t s = 1 + std::size_t(sub.below(3));   // <= 3
        ProblemInstance p = make_instance({Ensemble::gaussian, m, n}, double(s) / double(n), sub);
        auto best = oracle::brute_force_optimum(p.A, p.f, p.s);

        IhtConfig plain;
        plain.max_iters = 3000;
        SolverResult r_iht = refine(p, run_iht(p, plain, Vector(n, 0.0)));

        NoisyIhtConfig ncfg;
        Rng noise = sub.child(1);
        SolverResult raw_noisy = run_noisy_iht(p, ncfg, noise);
        SolverResult r_noisy = refine(p, raw_noisy);

        Rng trng = sub.child(2);
        SolverResult r_param =
            refine(p, train(p, raw_noisy.u, TrainConfig{}, resolve_tau(p.A, std::nullopt), trng));

        for (const SolverResult* r : {&r_iht, &r_noisy, &r_param}) {
            if (r->objective < best.objective - 1e-9) {
                ok = false;
                why = "a method beat the exhaustive optimum: " + fmt(r->objective) + " < " +
                      fmt(best.objective);
            }
            if (r->support == best.support &&
                std::abs(r->objective - best.objective) > 1e-10) {
                ok = false;
                why = "same support, different objective: " + fmt(r->objective) + " vs " +
                      fmt(best.objective);
            }
        }
    }
    report(4, ok, why);
}

// 5. Analytic gradients vs central finite differences.
void criterion5() {
    Rng root(555);
    bool ok = true;
    int checked = 0;
    double worst = 0.0;
    for (std::uint64_t draw = 0; draw < 200 && checked < 20; ++draw) {
        Rng sub = root.child(draw);
        ProblemInstance p = make_instance({Ensemble::gaussian, 6, 10}, 0.2, sub);  // s = 2
        double tau = resolve_tau(p.A, std::nullopt);
        UnrolledParams params = init_params(p, tau);
        Vector u0(10);
        for (double& v : u0) v = sub.normal();
        auto mask = draw_dropout_mask(10, 0.05, sub);
        ForwardTape t = forward(params, u0, p.s, &mask);

        // Skip draws with a magnitude tie within 1e-4 of either H_s cut.
        auto gap = [&](const Vector& x) {
            Vector a = x;
            for (double& v : a) v = std::abs(v);
            std::sort(a.begin(), a.end(), std::greater<>());
            return a[p.s - 1] - a[p.s];
        };
        if (gap(t.d) < 1e-4 || gap(t.z2) < 1e-4) continue;
        ++checked;
        ParamGradients g = backward(t, params, p.A, p.f);

        auto loss = [&](const UnrolledParams& q) {
            return objective(p.A, forward(q, u0, p.s, &mask).u_out, p.f);
        };
        const double h = 1e-6;
        auto block_err = [&](auto access, const std::vector<double>& grad) {
            double num = 0.0, den = 0.0;
            for (std::size_t i = 0; i < grad.size(); ++i) {
                UnrolledParams plus = params, minus = params;
                access(plus)[i] += h;
                access(minus)[i] -= h;
                double fd = (loss(plus) - loss(minus)) / (2 * h);
                num += (fd - grad[i]) * (fd - grad[i]);
                den += fd * fd;
            }
            return std::sqrt(num) / std::max(std::sqrt(den), 1e-12);
        };
        double e1 = block_err([](UnrolledParams& q) -> std::vector<double>& { return q.w1.data; },
                              g.w1.data);
        double e2 =
            block_err([](UnrolledParams& q) -> std::vector<double>& { return q.b1; }, g.b1);
        double e3 = block_err([](UnrolledParams& q) -> std::vector<double>& { return q.w2.data; },
                              g.w2.data);
        double e4 =
            block_err([](UnrolledParams& q) -> std::vector<double>& { return q.b2; }, g.b2);
        worst = std::max({worst, e1, e2, e3, e4});
        if (worst >= 1e-5) {
            ok = false;
            break;
        }
    }
    ok = ok && checked >= 20;
    report(5, ok, "checked " + std::to_string(checked) +
                      " instances, worst relative block error " + fmt(worst) + " (< 1e-5)");
}

// 6. Reduction identities, all bit-identical.
void criterion6() {
    Rng rng(666);
    ProblemInstance p = make_instance({Ensemble::gaussian, 20, 40}, 0.1, rng);

    NoisyIhtConfig ncfg;
    ncfg.sigma = 0.0;
    Rng noise = Rng(1).child(0);
    SolverResult noisy = run_noisy_iht(p, ncfg, noise);
    IhtConfig plain;
    plain.max_iters = ncfg.rounds * ncfg.iters_per_round;
    SolverResult ref = run_iht(p, plain, Vector(40, 0.0));
    bool a = noisy.u == ref.u && noisy.objective == ref.objective;

    double tau = resolve_tau(p.A, std::nullopt);
    Vector u0(40);
    Rng r2(667);
    for (double& v : u0) v = r2.normal();
    ForwardTape t = forward(init_params(p, tau), u0, p.s);
    IhtConfig two;
    two.max_iters = 2;
    bool b = t.u_out == run_iht(p, two, u0).u;

    TrainConfig tcfg;
    tcfg.learning_rate = 0.0;
    tcfg.iterations = 10;
    Rng trng = Rng(2).child(0);
    SolverResult frozen = train(p, u0, tcfg, tau, trng);
    bool c = frozen.u == t.u_out;

    report(6, a && b && c,
           std::string("sigma=0 noisy == plain (") + (a ? "ok" : "FAIL") +
               "), init forward == two IHT steps (" + (b ? "ok" : "FAIL") +
               "), lr=0 training == two-step prediction (" + (c ? "ok" : "FAIL") + ")");
}

// 7. Training descent at paper scale.
void criterion7() {
    Rng root(777);
    int reduced = 0;
    const int total = 20;
    for (int rep = 0; rep < total; ++rep) {
        Rng sub = root.child(std::uint64_t(rep));
        const std::size_t m_choices[] = {50, 60, 70, 80, 90, 100, 110, 120};
        const double mu_choices[] = {0.025, 0.05, 0.075, 0.1, 0.125, 0.15, 0.175, 0.2};
        std::size_t m = m_choices[sub.below(8)];
        double mu = mu_choices[sub.below(8)];
        ProblemInstance p = make_instance({Ensemble::gaussian, m, 200}, mu, sub);

        NoisyIhtConfig ncfg;
        Rng noise = sub.child(1);
        SolverResult warm = run_noisy_iht(p, ncfg, noise);

        double tau = resolve_tau(p.A, std::nullopt);
        double initial =
            objective(p.A, forward(init_params(p, tau), warm.u, p.s).u_out, p.f);
        Rng trng = sub.child(2);
        SolverResult trained = train(p, warm.u, TrainConfig{}, tau, trng);
        if (trained.objective <= initial + 1e-12) ++reduced;
    }
    report(7, reduced >= total - 1,
           "dropout-free objective reduced in " + std::to_string(reduced) + "/" +
               std::to_string(total) + " runs (allowing 1 exception)");
}

// 8. Byte determinism of cmd_grid across --jobs.
void criterion8(const std::string& cli) {
    if (cli.empty()) {
        report(8, false, "no CLI binary path given");
        return;
    }
    fs::path dir = fs::temp_directory_path() / "ihtbench_acceptance_det";
    fs::remove_all(dir);
    fs::create_directories(dir);
    {
        std::ofstream cfg(dir / "grid.cfg");
        cfg << "n = 60\nm_values = 20,30\nmu_values = 0.05,0.1\nruns_per_cell = 2\n"
            << "iht_iterations = 400\nnoisy_rounds = 2\nnoisy_iters_per_round = 200\n"
            << "train_iterations = 100\n";
    }
    auto run = [&](int jobs, const std::string& out) {
        std::string cmd = cli + " grid --config " + (dir / "grid.cfg").string() + " --seed 99 --jobs " +
                          std::to_string(jobs) + " --out " + (dir / out).string() +
                          " >/dev/null 2>&1";
        return std::system(cmd.c_str()) == 0;
    };
    bool ran = run(1, "a") && run(3, "b");
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    bool same = ran;
    for (const char* name : {"runs.csv", "cells.csv", "summary.json"})
        same = same && slurp(dir / "a" / name) == slurp(dir / "b" / name) &&
               !slurp(dir / "a" / name).empty();
    fs::remove_all(dir);
    report(8, same, ran ? "runs.csv, cells.csv, summary.json byte-identical for --jobs 1 vs 3"
                        : "CLI invocation failed");
}

// 9. Qualitative error concentration at few measurements / large support.
// Measured on the relative recovery error ||u - u_gen||^2 / ||u_gen||^2: at
// (m=50, mu=0.2) the generating element is far from identifiable, while at
// (m=120, mu=0.05) recovery is essentially exact. The objective error is the
// wrong metric for this shape, because with s = 40 and only 50 rows almost
// any support fits the data, so the objective there is intrinsically tiny.
void criterion9() {
    double hard = -1.0, easy = -1.0;
    for (const auto& cell : g_reduced_grid.cells) {
        if (cell.method != Method::iht) continue;
        if (cell.m == 50 && cell.mu == 0.2) hard = cell.mean_rel_recovery_error;
        if (cell.m == 120 && cell.mu == 0.05) easy = cell.mean_rel_recovery_error;
    }
    report(9, hard > easy && hard >= 0.0 && easy >= 0.0,
           "plain IHT mean recovery error at (m=50, mu=0.2) = " + fmt(hard) +
               " exceeds (m=120, mu=0.05) = " + fmt(easy));
}

}  // namespace

int main(int argc, char** argv) {
    std::string cli = argc > 1 ? argv[1] : "";
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8(cli);
    criterion9();
    std::printf("%d criterion(s) failed\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
