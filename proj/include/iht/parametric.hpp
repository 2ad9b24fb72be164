#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "iht/linalg.hpp"
#include "iht/problems.hpp"
#include "iht/rng.hpp"
#include "iht/solvers.hpp"

namespace iht {

/// Two-layer unrolled IHT network: H_s(phi(H_s(drop(phi(u0; theta1))); theta2))
/// with phi(x; theta) = W x + b.
struct UnrolledParams {
    Matrix w1;
    Vector b1;
    Matrix w2;
    Vector b2;
};

/// Backward rule through H_s. `indicator` passes the gradient through on
/// kept entries; `literal` additionally scales it by the pre-threshold value.
enum class HsBackward { indicator, literal };

struct TrainConfig {
    double momentum = 0.9;
    double learning_rate = 1e-4;
    int iterations = 2000;
    double dropout_rate = 0.05;
    HsBackward hs_backward = HsBackward::indicator;
};

struct ForwardTape {
    Vector u0;
    Vector z1;      // first affine output
    Vector d;       // after dropout (== z1 when no mask)
    Vector h1;      // H_s(d)
    Vector z2;      // second affine output
    Vector u_out;   // H_s(z2)
    std::vector<std::uint8_t> dropout_mask;  // empty = inference path
    std::vector<std::uint8_t> m1, m2;        // H_s keep masks
};

struct ParamGradients {
    Matrix w1;
    Vector b1;
    Matrix w2;
    Vector b2;
};

struct TrainingDiverged : std::runtime_error {
    int iteration;
    explicit TrainingDiverged(int it)
        : std::runtime_error("training diverged: non-finite loss at iteration " +
                             std::to_string(it)),
          iteration(it) {}
};

/// Both layers start as one exact IHT update: W = I - tau A^T A, b = tau A^T f.
inline UnrolledParams init_params(const ProblemInstance& p, double tau) {
    if (tau < 0.0) throw std::invalid_argument("init_params: tau must be nonnegative");
    AffineStep step = build_iht_affine(p.A, p.f, tau);
    UnrolledParams params;
    params.w1 = step.W;
    params.b1 = step.b;
    params.w2 = std::move(step.W);
    params.b2 = std::move(step.b);
    return params;
}

inline ForwardTape forward(const UnrolledParams& params, const Vector& u0, std::size_t s,
                           const std::vector<std::uint8_t>* dropout_mask = nullptr) {
    const std::size_t n = u0.size();
    if (params.w1.cols != n) throw std::invalid_argument("forward: u0 length mismatch");
    if (dropout_mask && dropout_mask->size() != n)
        throw std::invalid_argument("forward: dropout mask length mismatch");

    ForwardTape t;
    t.u0 = u0;
    t.z1 = affine_apply(params.w1, params.b1, u0);
    if (dropout_mask) {
        t.dropout_mask = *dropout_mask;
        t.d = t.z1;
        for (std::size_t i = 0; i < n; ++i)
            if (!t.dropout_mask[i]) t.d[i] = 0.0;
    } else {
        t.d = t.z1;
    }
    t.m1 = hard_threshold_mask(t.d, s);
    t.h1.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        if (t.m1[i]) t.h1[i] = t.d[i];
    t.z2 = affine_apply(params.w2, params.b2, t.h1);
    t.m2 = hard_threshold_mask(t.z2, s);
    t.u_out.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        if (t.m2[i]) t.u_out[i] = t.z2[i];
    return t;
}

/// Reverse-mode gradients of ||A u_out - f||^2 with respect to all four
/// parameter blocks, treating the H_s keep masks as locally constant.
inline ParamGradients backward(const ForwardTape& t, const UnrolledParams& params,
                               const Matrix& A, const Vector& f,
                               HsBackward rule = HsBackward::indicator) {
    const std::size_t n = t.u0.size();
    Vector r = matvec(A, t.u_out);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= f[i];
    Vector g_out = matvec_transpose(A, r);
    for (double& v : g_out) v *= 2.0;

    Vector g_z2(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        if (t.m2[i]) g_z2[i] = (rule == HsBackward::literal) ? t.z2[i] * g_out[i] : g_out[i];

    ParamGradients g;
    g.b2 = g_z2;
    g.w2 = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        if (g_z2[i] == 0.0) continue;
        double* row = &g.w2.data[i * n];
        for (std::size_t j = 0; j < n; ++j) row[j] = g_z2[i] * t.h1[j];
    }
    Vector g_h1 = matvec_transpose(params.w2, g_z2);

    Vector g_z1(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (!t.m1[i]) continue;
        double v = (rule == HsBackward::literal) ? t.d[i] * g_h1[i] : g_h1[i];
        if (!t.dropout_mask.empty() && !t.dropout_mask[i]) v = 0.0;
        g_z1[i] = v;
    }
    g.b1 = g_z1;
    g.w1 = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        if (g_z1[i] == 0.0) continue;
        double* row = &g.w1.data[i * n];
        for (std::size_t j = 0; j < n; ++j) row[j] = g_z1[i] * t.u0[j];
    }
    return g;
}

/// Dropout mask zeroing exactly round(rate * n) uniformly chosen coordinates.
inline std::vector<std::uint8_t> draw_dropout_mask(std::size_t n, double rate, Rng& rng) {
    std::vector<std::uint8_t> mask(n, 1);
    const std::size_t zeros = round_half_up(rate * double(n));
    for (std::size_t i : rng.sample_without_replacement(n, zeros)) mask[i] = 0;
    return mask;
}

namespace detail {
inline void momentum_update(Matrix& theta, Matrix& vel, const Matrix& grad, double mu,
                            double lr) {
    for (std::size_t i = 0; i < theta.data.size(); ++i) {
        vel.data[i] = mu * vel.data[i] - lr * grad.data[i];
        theta.data[i] += vel.data[i];
    }
}
inline void momentum_update(Vector& theta, Vector& vel, const Vector& grad, double mu,
                            double lr) {
    for (std::size_t i = 0; i < theta.size(); ++i) {
        vel[i] = mu * vel[i] - lr * grad[i];
        theta[i] += vel[i];
    }
}
}  // namespace detail

/// Heavy-ball subgradient training of the unrolled network on a single
/// instance, fresh dropout mask every iteration. SGD under dropout noise
/// stalls in a noise ball rather than converging, so the dropout-free
/// prediction is evaluated after every update and the best one seen is
/// returned (the untrained network counts as the first candidate, making
/// the result never worse than two plain IHT steps from u0).
inline SolverResult train(const ProblemInstance& p, const Vector& u0, const TrainConfig& cfg,
                          double tau, Rng& rng) {
    if (cfg.learning_rate < 0.0) throw std::invalid_argument("train: negative learning rate");
    if (cfg.momentum < 0.0 || cfg.momentum >= 1.0)
        throw std::invalid_argument("train: momentum out of [0,1)");
    if (cfg.dropout_rate < 0.0 || cfg.dropout_rate >= 1.0)
        throw std::invalid_argument("train: dropout rate out of [0,1)");
    const std::size_t n = p.A.cols;

    UnrolledParams params = init_params(p, tau);
    Matrix vw1(n, n), vw2(n, n);
    Vector vb1(n, 0.0), vb2(n, 0.0);

    Vector best_u = forward(params, u0, p.s).u_out;
    double best_obj = objective(p.A, best_u, p.f);

    for (int it = 0; it < cfg.iterations; ++it) {
        auto mask = draw_dropout_mask(n, cfg.dropout_rate, rng);
        ForwardTape tape = forward(params, u0, p.s, &mask);
        double loss = objective(p.A, tape.u_out, p.f);
        if (!std::isfinite(loss)) throw TrainingDiverged(it);
        ParamGradients g = backward(tape, params, p.A, p.f, cfg.hs_backward);
        detail::momentum_update(params.w1, vw1, g.w1, cfg.momentum, cfg.learning_rate);
        detail::momentum_update(params.b1, vb1, g.b1, cfg.momentum, cfg.learning_rate);
        detail::momentum_update(params.w2, vw2, g.w2, cfg.momentum, cfg.learning_rate);
        detail::momentum_update(params.b2, vb2, g.b2, cfg.momentum, cfg.learning_rate);

        Vector pred = forward(params, u0, p.s).u_out;
        double obj = objective(p.A, pred, p.f);
        if (std::isfinite(obj) && obj < best_obj) {
            best_obj = obj;
            best_u = std::move(pred);
        }
    }

    SolverResult r;
    r.support = support_of(best_u);
    r.objective = best_obj;
    r.u = std::move(best_u);
    r.iterations_run = cfg.iterations;
    r.method = "parametric_iht";
    return r;
}

}  // namespace iht
