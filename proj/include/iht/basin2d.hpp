#pragma once

#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "iht/linalg.hpp"
#include "iht/problems.hpp"
#include "iht/rng.hpp"
#include "iht/solvers.hpp"

namespace iht {

struct BasinFixedPoint {
    std::array<double, 2> point{0.0, 0.0};
    double objective = 0.0;
    bool is_global = false;
    bool in_domain = false;
    // True when some start converged here. False for a minimum kept only
    // because oscillating starts were attributed to it; such a point is a
    // local minimum of the objective on the one-sparse set but need not be
    // invariant under the thresholded map.
    bool attained = false;
};

/// Per-setting outcome of the 2D basin study. `labels` assigns every grid
/// start (row-major, x fastest) a fixed-point index or -1 for unconverged.
struct BasinReport {
    std::uint64_t setting_id = 0;
    std::vector<BasinFixedPoint> fixed_points;
    std::vector<std::int8_t> labels;
    bool global_tie = false;
    bool distances_valid = false;
    double dist_global_to_local_region = 0.0;
    double dist_local_to_global_region = 0.0;
    std::size_t witness_global_to_local = 0;  // grid index achieving the first distance
    std::size_t witness_local_to_global = 0;
};

enum class StepNormRule { spectral, frobenius };

struct BasinStudyConfig {
    int num_settings = 1000;
    int grid_points_per_axis = 81;
    double domain_lo = -1.0;
    double domain_hi = 1.0;
    double tau_scale = 0.05;  // tau = tau_scale / ||A||^2
    StepNormRule norm_rule = StepNormRule::spectral;
    int max_iters = 20000;
    double fixed_point_tol = 1e-10;
    double cluster_tol = 1e-6;
};

struct BasinStudySummary {
    int two_minima_count = 0;
    int distance_sample_count = 0;
    double mean_dist_global_to_local_region = 0.0;
    double mean_dist_local_to_global_region = 0.0;
    std::vector<BasinReport> reports;
};

inline double basin_step_norm_sq(const Matrix& A, StepNormRule rule) {
    if (rule == StepNormRule::frobenius) {
        double s = 0.0;
        for (double a : A.data) s += a * a;
        return s;
    }
    return spectral_norm_sq(A).value;
}

/// IHT from every point of the start grid, limits clustered into fixed
/// points, each start labeled, and the two cross-basin distances computed
/// when the setting has exactly two in-domain fixed points.
///
/// Starts whose orbit never meets the fixed-point tolerance (the map admits
/// attracting period-2 orbits along basin boundaries; more budget does not
/// resolve them) are attributed to the fixed point nearest their final
/// iterate instead of being discarded — discarding them punches holes into
/// the regions and can hide a minimum whose basin is only reached through
/// the oscillating band. Fixed points that end up with no starts at all are
/// pruned from the report.
inline BasinReport run_basin_setting(const ProblemInstance& p, const BasinStudyConfig& cfg,
                                     std::uint64_t setting_id = 0) {
    if (p.A.rows != 2 || p.A.cols != 2 || p.s != 1)
        throw std::invalid_argument("run_basin_setting: needs a 2x2 instance with s = 1");
    if (cfg.grid_points_per_axis < 2 || cfg.cluster_tol <= 0.0)
        throw std::invalid_argument("run_basin_setting: bad config");

    const double tau = cfg.tau_scale / basin_step_norm_sq(p.A, cfg.norm_rule);
    AffineStep step = build_iht_affine(p.A, p.f, tau);
    const double w00 = step.W(0, 0), w01 = step.W(0, 1);
    const double w10 = step.W(1, 0), w11 = step.W(1, 1);
    const double b0 = step.b[0], b1 = step.b[1];

    const int g = cfg.grid_points_per_axis;
    const double lo = cfg.domain_lo, hi = cfg.domain_hi;
    const double h = (hi - lo) / double(g - 1);

    BasinReport rep;
    rep.setting_id = setting_id;
    rep.labels.assign(std::size_t(g) * g, -1);

    auto apply_step = [&](double& u0, double& u1) {
        double z0 = w00 * u0 + w01 * u1 + b0;
        double z1 = w10 * u0 + w11 * u1 + b1;
        // H_1 on a 2-vector; ties keep index 0.
        if (std::abs(z0) >= std::abs(z1)) {
            u0 = z0;
            u1 = 0.0;
        } else {
            u0 = 0.0;
            u1 = z1;
        }
    };

    auto add_fixed_point = [&](double fx, double fy) {
        BasinFixedPoint fp;
        fp.point = {fx, fy};
        fp.objective = objective(p.A, Vector{fx, fy}, p.f);
        fp.in_domain = fx >= lo && fx <= hi && fy >= lo && fy <= hi;
        rep.fixed_points.push_back(fp);
        return int(rep.fixed_points.size()) - 1;
    };
    auto match_fixed_point = [&](double fx, double fy) {
        for (std::size_t c = 0; c < rep.fixed_points.size(); ++c) {
            const auto& fp = rep.fixed_points[c];
            if (std::max(std::abs(fx - fp.point[0]), std::abs(fy - fp.point[1])) <=
                cfg.cluster_tol)
                return int(c);
        }
        return -1;
    };

    // Seed the per-axis least-squares points t_i = <a_i, f>/||a_i||^2. These
    // are exactly the local minima of the objective on the one-sparse set,
    // and any fixed point of the map is one of them, so converged limits
    // cluster onto these entries and oscillating starts always have a
    // candidate to be attributed to — even when a minimum is not invariant
    // under the thresholded map and no start can converge to it.
    for (int axis = 0; axis < 2; ++axis) {
        double af = p.A(0, axis) * p.f[0] + p.A(1, axis) * p.f[1];
        double nn = p.A(0, axis) * p.A(0, axis) + p.A(1, axis) * p.A(1, axis);
        if (nn == 0.0) continue;
        double t = af / nn;
        double cx = axis == 0 ? t : 0.0, cy = axis == 0 ? 0.0 : t;
        if (match_fixed_point(cx, cy) < 0) add_fixed_point(cx, cy);
    }

    auto iterate = [&](double x0, double x1, double& outx, double& outy) -> bool {
        double u0 = x0, u1 = x1;
        for (int k = 0; k < cfg.max_iters; ++k) {
            double p0 = u0, p1 = u1;
            apply_step(u0, u1);
            if (std::max(std::abs(u0 - p0), std::abs(u1 - p1)) <= cfg.fixed_point_tol) {
                outx = u0;
                outy = u1;
                return true;
            }
        }
        outx = u0;
        outy = u1;
        return false;
    };

    std::vector<std::pair<std::size_t, std::array<double, 2>>> cycling;
    for (int iy = 0; iy < g; ++iy) {
        for (int ix = 0; ix < g; ++ix) {
            std::size_t idx = std::size_t(iy) * g + ix;
            double fx, fy;
            if (!iterate(lo + ix * h, lo + iy * h, fx, fy)) {
                cycling.push_back({idx, {fx, fy}});
                continue;
            }
            int label = match_fixed_point(fx, fy);
            if (label < 0) label = add_fixed_point(fx, fy);
            rep.fixed_points[std::size_t(label)].attained = true;
            rep.labels[idx] = std::int8_t(label);
        }
    }

    // Attribute non-converged (period-2 boundary) starts to the nearest
    // fixed point of their final iterate.
    for (const auto& [idx, fin] : cycling) {
        int best = -1;
        double best_d = 0.0;
        for (std::size_t c = 0; c < rep.fixed_points.size(); ++c) {
            const auto& fp = rep.fixed_points[c];
            double d = std::max(std::abs(fin[0] - fp.point[0]), std::abs(fin[1] - fp.point[1]));
            if (best < 0 || d < best_d) {
                best = int(c);
                best_d = d;
            }
        }
        if (best >= 0) rep.labels[idx] = std::int8_t(best);
    }

    // Prune fixed points no start belongs to (unreached seeded candidates),
    // remapping labels to the compacted list.
    {
        std::vector<int> uses(rep.fixed_points.size(), 0);
        for (auto lab : rep.labels)
            if (lab >= 0) ++uses[std::size_t(lab)];
        std::vector<int> remap(rep.fixed_points.size(), -1);
        std::vector<BasinFixedPoint> kept;
        for (std::size_t c = 0; c < rep.fixed_points.size(); ++c) {
            if (uses[c] == 0) continue;
            remap[c] = int(kept.size());
            kept.push_back(rep.fixed_points[c]);
        }
        rep.fixed_points = std::move(kept);
        for (auto& lab : rep.labels)
            if (lab >= 0) lab = std::int8_t(remap[std::size_t(lab)]);
    }

    if (rep.fixed_points.empty()) return rep;

    // Flag the global minimum; an (exact-tolerance) tie flags all tied points
    // and disqualifies the setting from the distance statistics.
    double best = rep.fixed_points[0].objective;
    for (const auto& fp : rep.fixed_points) best = std::min(best, fp.objective);
    int global_count = 0;
    int global_idx = -1;
    for (std::size_t c = 0; c < rep.fixed_points.size(); ++c) {
        if (rep.fixed_points[c].objective <= best + 1e-12) {
            rep.fixed_points[c].is_global = true;
            ++global_count;
            global_idx = int(c);
        }
    }
    rep.global_tie = global_count > 1;

    int in_domain_count = 0;
    int other_idx = -1;
    for (std::size_t c = 0; c < rep.fixed_points.size(); ++c) {
        if (rep.fixed_points[c].in_domain) {
            ++in_domain_count;
            if (int(c) != global_idx) other_idx = int(c);
        }
    }
    if (rep.global_tie || in_domain_count != 2 || global_idx < 0 ||
        !rep.fixed_points[std::size_t(global_idx)].in_domain || other_idx < 0)
        return rep;

    // Minimum distance from each minimum to the opposing region, measured
    // over the grid starts in the max-norm — the same metric the module
    // uses for point identity (cluster_tol) and grid-cell geometry.
    const auto& gp = rep.fixed_points[std::size_t(global_idx)].point;
    const auto& lp = rep.fixed_points[std::size_t(other_idx)].point;
    auto dist = [](double ax, double ay, const std::array<double, 2>& b) {
        return std::max(std::abs(ax - b[0]), std::abs(ay - b[1]));
    };
    double d_gl = -1.0, d_lg = -1.0;
    std::size_t w_gl = 0, w_lg = 0;
    for (int iy = 0; iy < g; ++iy) {
        for (int ix = 0; ix < g; ++ix) {
            std::size_t idx = std::size_t(iy) * g + ix;
            int lab = rep.labels[idx];
            double sx = lo + ix * h, sy = lo + iy * h;
            if (lab == other_idx) {
                double d = dist(sx, sy, gp);
                if (d_gl < 0.0 || d < d_gl) {
                    d_gl = d;
                    w_gl = idx;
                }
            } else if (lab == global_idx) {
                double d = dist(sx, sy, lp);
                if (d_lg < 0.0 || d < d_lg) {
                    d_lg = d;
                    w_lg = idx;
                }
            }
        }
    }
    if (d_gl >= 0.0 && d_lg >= 0.0) {
        rep.distances_valid = true;
        rep.dist_global_to_local_region = d_gl;
        rep.dist_local_to_global_region = d_lg;
        rep.witness_global_to_local = w_gl;
        rep.witness_local_to_global = w_lg;
    }
    return rep;
}

inline bool basin_setting_has_two_minima(const BasinReport& rep) {
    int in_domain = 0;
    for (const auto& fp : rep.fixed_points)
        if (fp.in_domain) ++in_domain;
    return in_domain == 2;
}

inline BasinStudySummary run_basin_study(const BasinStudyConfig& cfg, const Rng& rng,
                                         int jobs = 1) {
    BasinStudySummary sum;
    sum.reports.resize(std::size_t(cfg.num_settings));

    std::atomic<int> next{0};
    auto worker = [&] {
        for (;;) {
            int i = next.fetch_add(1);
            if (i >= cfg.num_settings) return;
            Rng sub = rng.child(std::uint64_t(i));
            ProblemInstance p = gen_basin2d_setting(sub);
            sum.reports[std::size_t(i)] = run_basin_setting(p, cfg, std::uint64_t(i));
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    double acc_gl = 0.0, acc_lg = 0.0;
    for (const auto& rep : sum.reports) {
        if (basin_setting_has_two_minima(rep)) ++sum.two_minima_count;
        if (rep.distances_valid) {
            ++sum.distance_sample_count;
            acc_gl += rep.dist_global_to_local_region;
            acc_lg += rep.dist_local_to_global_region;
        }
    }
    if (sum.distance_sample_count > 0) {
        sum.mean_dist_global_to_local_region = acc_gl / sum.distance_sample_count;
        sum.mean_dist_local_to_global_region = acc_lg / sum.distance_sample_count;
    }
    return sum;
}

}  // namespace iht
