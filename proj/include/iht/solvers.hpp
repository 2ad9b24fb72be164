#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "iht/linalg.hpp"
#include "iht/problems.hpp"
#include "iht/rng.hpp"

namespace iht {

struct SolverResult {
    Vector u;
    std::vector<std::size_t> support;
    double objective = 0.0;
    int iterations_run = 0;
    std::string method;
};

struct IhtConfig {
    std::optional<double> tau;     // absent = 0.99 / sigma_max(A)^2
    int max_iters = 3000;
    double fixed_point_tol = 0.0;  // 0 disables early stop
};

struct NoisyIhtConfig {
    int rounds = 5;
    int iters_per_round = 600;
    double sigma = 0.025;
    IhtConfig inner;
};

/// Keep-mask of the s largest-magnitude entries; ties keep the smaller index.
inline std::vector<std::uint8_t> hard_threshold_mask(const Vector& x, std::size_t s) {
    const std::size_t n = x.size();
    std::vector<std::uint8_t> mask(n, 0);
    if (s >= n) {
        std::fill(mask.begin(), mask.end(), std::uint8_t(1));
        return mask;
    }
    if (s == 0) return mask;
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t(0));
    auto cmp = [&x](std::size_t a, std::size_t b) {
        double fa = std::abs(x[a]), fb = std::abs(x[b]);
        if (fa != fb) return fa > fb;
        return a < b;
    };
    std::nth_element(idx.begin(), idx.begin() + (s - 1), idx.end(), cmp);
    for (std::size_t i = 0; i < s; ++i) mask[idx[i]] = 1;
    return mask;
}

inline Vector hard_threshold(const Vector& x, std::size_t s) {
    auto mask = hard_threshold_mask(x, s);
    Vector y(x.size(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i)
        if (mask[i]) y[i] = x[i];
    return y;
}

inline double objective(const Matrix& A, const Vector& u, const Vector& f) {
    if (A.rows != f.size()) throw std::invalid_argument("objective: dimension mismatch");
    Vector r = matvec(A, u);
    double s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        double d = r[i] - f[i];
        s += d * d;
    }
    return s;
}

inline std::vector<std::size_t> support_of(const Vector& u) {
    std::vector<std::size_t> sup;
    for (std::size_t i = 0; i < u.size(); ++i)
        if (u[i] != 0.0) sup.push_back(i);
    return sup;
}

inline double resolve_tau(const Matrix& A, const std::optional<double>& tau) {
    if (tau) {
        if (*tau <= 0.0) throw std::invalid_argument("resolve_tau: tau must be positive");
        return *tau;
    }
    return 0.99 / spectral_norm_sq(A).value;
}

/// One IHT update is the affine map u -> W u + b followed by H_s, with
/// W = I - tau A^T A and b = tau A^T f. The same construction seeds the
/// unrolled network, so the two paths agree bit for bit.
struct AffineStep {
    Matrix W;
    Vector b;
};

inline AffineStep build_iht_affine(const Matrix& A, const Vector& f, double tau) {
    Matrix W = gram(A);
    const std::size_t n = W.rows;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) W(i, j) = (i == j ? 1.0 : 0.0) - tau * W(i, j);
    Vector b = matvec_transpose(A, f);
    for (double& v : b) v *= tau;
    return {std::move(W), std::move(b)};
}

inline Vector affine_apply(const Matrix& W, const Vector& b, const Vector& u) {
    Vector z = matvec(W, u);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += b[i];
    return z;
}

inline SolverResult run_iht(const ProblemInstance& p, const IhtConfig& cfg, const Vector& u0) {
    if (u0.size() != p.A.cols) throw std::invalid_argument("run_iht: u0 length mismatch");
    if (cfg.max_iters < 1) throw std::invalid_argument("run_iht: max_iters < 1");
    const double tau = resolve_tau(p.A, cfg.tau);
    AffineStep step = build_iht_affine(p.A, p.f, tau);

    Vector u = u0;
    int iters = 0;
    for (int k = 0; k < cfg.max_iters; ++k) {
        Vector z = affine_apply(step.W, step.b, u);
        Vector un = hard_threshold(z, p.s);
        ++iters;
        if (cfg.fixed_point_tol > 0.0) {
            double delta = 0.0;
            for (std::size_t i = 0; i < u.size(); ++i)
                delta = std::max(delta, std::abs(un[i] - u[i]));
            u = std::move(un);
            if (delta <= cfg.fixed_point_tol) break;
        } else {
            u = std::move(un);
        }
    }
    SolverResult r;
    r.support = support_of(u);
    r.objective = objective(p.A, u, p.f);
    r.u = std::move(u);
    r.iterations_run = iters;
    r.method = "iht";
    return r;
}

/// Restarted IHT: a fixed round schedule, each restart from the previous
/// outcome perturbed by dense i.i.d. Gaussian noise. No best-iterate
/// tracking; the final round's result is returned as is.
inline SolverResult run_noisy_iht(const ProblemInstance& p, const NoisyIhtConfig& cfg, Rng& rng) {
    if (cfg.rounds < 1) throw std::invalid_argument("run_noisy_iht: rounds < 1");
    if (cfg.sigma < 0.0) throw std::invalid_argument("run_noisy_iht: sigma < 0");
    IhtConfig inner = cfg.inner;
    inner.max_iters = cfg.iters_per_round;

    SolverResult r = run_iht(p, inner, Vector(p.A.cols, 0.0));
    int total_iters = r.iterations_run;
    for (int round = 1; round < cfg.rounds; ++round) {
        Vector u = r.u;
        if (cfg.sigma > 0.0)
            for (double& v : u) v += cfg.sigma * rng.normal();
        r = run_iht(p, inner, u);
        total_iters += r.iterations_run;
    }
    r.iterations_run = total_iters;
    r.method = "noisy_iht";
    return r;
}

/// Final least-squares solve on the returned support; exact zeros produced
/// by the solve are pruned from the support.
inline SolverResult refine(const ProblemInstance& p, const SolverResult& r) {
    SolverResult out;
    out.u = least_squares_on_support(p.A, p.f, r.support);
    out.support = support_of(out.u);
    out.objective = objective(p.A, out.u, p.f);
    out.iterations_run = r.iterations_run;
    out.method = r.method;
    return out;
}

}  // namespace iht
