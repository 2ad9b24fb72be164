#pragma once

#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>

#include "iht/linalg.hpp"
#include "iht/rng.hpp"

namespace iht {

enum class Ensemble { gaussian, bernoulli, subsampled_dct };

inline const char* ensemble_name(Ensemble e) {
    switch (e) {
        case Ensemble::gaussian: return "gaussian";
        case Ensemble::bernoulli: return "bernoulli";
        case Ensemble::subsampled_dct: return "subsampled_dct";
    }
    return "?";
}

inline Ensemble ensemble_from_name(const std::string& s) {
    if (s == "gaussian") return Ensemble::gaussian;
    if (s == "bernoulli") return Ensemble::bernoulli;
    if (s == "subsampled_dct") return Ensemble::subsampled_dct;
    throw std::invalid_argument("unknown ensemble: " + s);
}

struct EnsembleSpec {
    Ensemble kind = Ensemble::gaussian;
    std::size_t m = 0;
    std::size_t n = 0;
};

/// One sparse-recovery instance: minimize ||Au - f||^2 subject to |u|_0 <= s.
/// When u_gen is present the data is exact, f = A u_gen.
struct ProblemInstance {
    Matrix A;
    Vector f;
    std::size_t s = 0;
    std::optional<Vector> u_gen;
};

inline std::size_t round_half_up(double x) { return std::size_t(std::floor(x + 0.5)); }

/// All ensembles are normalized to unit expected column norm (entries of
/// variance 1/m, DCT rows orthonormal up to the sqrt(n/m) subsampling
/// factor). The fixed perturbation scales elsewhere (noisy-IHT sigma,
/// dropout-era training rates) are calibrated against this normalization;
/// an unnormalized ensemble would shrink the recovered signal by sqrt(m)
/// and turn those perturbations from local kicks into full restarts.
inline Matrix gen_matrix(const EnsembleSpec& spec, Rng& rng) {
    if (spec.m == 0 || spec.n == 0) throw std::invalid_argument("gen_matrix: empty shape");
    Matrix A(spec.m, spec.n);
    const double col_scale = 1.0 / std::sqrt(double(spec.m));
    switch (spec.kind) {
        case Ensemble::gaussian:
            for (double& a : A.data) a = col_scale * rng.normal();
            break;
        case Ensemble::bernoulli:
            for (double& a : A.data) a = (rng.next_u64() & 1u) ? col_scale : -col_scale;
            break;
        case Ensemble::subsampled_dct: {
            if (spec.m > spec.n)
                throw std::invalid_argument("gen_matrix: subsampled_dct needs m <= n");
            const std::size_t n = spec.n;
            auto rows = rng.sample_without_replacement(n, spec.m);
            const double scale = std::sqrt(double(n) / double(spec.m));
            for (std::size_t i = 0; i < spec.m; ++i) {
                const std::size_t k = rows[i];
                const double c = (k == 0) ? std::sqrt(1.0 / double(n)) : std::sqrt(2.0 / double(n));
                for (std::size_t j = 0; j < n; ++j)
                    A(i, j) = scale * c *
                              std::cos(std::numbers::pi * double(k) * (2.0 * double(j) + 1.0) /
                                       (2.0 * double(n)));
            }
            break;
        }
    }
    return A;
}

/// Exactly s nonzeros at uniformly chosen positions, values standard normal
/// (a draw of exactly 0.0 is redrawn so the support count is exact).
inline Vector gen_sparse_signal(std::size_t n, std::size_t s, Rng& rng) {
    if (s < 1 || s > n) throw std::invalid_argument("gen_sparse_signal: need 1 <= s <= n");
    Vector u(n, 0.0);
    auto idx = rng.sample_without_replacement(n, s);
    for (std::size_t i : idx) u[i] = rng.normal_nonzero();
    return u;
}

/// Instance generator: s = round(mu*n), f = A u_gen rescaled to ||f|| = 1,
/// with u_gen scaled by the same constant so the data stays exact.
inline ProblemInstance make_instance(const EnsembleSpec& spec, double mu, Rng& rng) {
    if (!(mu > 0.0 && mu <= 1.0)) throw std::invalid_argument("make_instance: mu out of range");
    const std::size_t s = round_half_up(mu * double(spec.n));
    if (s < 1) throw std::invalid_argument("make_instance: round(mu*n) < 1");
    for (int attempt = 0; attempt < 10; ++attempt) {
        Rng sub = rng.child(std::uint64_t(attempt));
        Matrix A = gen_matrix(spec, sub);
        Vector u_raw = gen_sparse_signal(spec.n, s, sub);
        Vector f0 = matvec(A, u_raw);
        double nf = norm2(f0);
        if (nf == 0.0) continue;
        const double c = 1.0 / nf;
        for (double& v : f0) v *= c;
        for (double& v : u_raw) v *= c;
        return ProblemInstance{std::move(A), std::move(f0), s, std::move(u_raw)};
    }
    throw std::runtime_error("make_instance: degenerate ensemble, ||A u_gen|| = 0 after 10 retries");
}

/// 2x2 setting for the basin study: Gaussian A with columns rescaled to norm
/// two, Gaussian f rescaled to norm one, s = 1.
inline ProblemInstance gen_basin2d_setting(Rng& rng) {
    for (std::uint64_t attempt = 0;; ++attempt) {
        Rng sub = rng.child(attempt);
        Matrix A(2, 2);
        for (double& a : A.data) a = sub.normal();
        Vector f{sub.normal(), sub.normal()};
        double c0 = std::hypot(A(0, 0), A(1, 0));
        double c1 = std::hypot(A(0, 1), A(1, 1));
        double nf = norm2(f);
        if (c0 == 0.0 || c1 == 0.0 || nf == 0.0) continue;
        A(0, 0) *= 2.0 / c0;
        A(1, 0) *= 2.0 / c0;
        A(0, 1) *= 2.0 / c1;
        A(1, 1) *= 2.0 / c1;
        f[0] /= nf;
        f[1] /= nf;
        return ProblemInstance{std::move(A), std::move(f), 1, std::nullopt};
    }
}

// --- text serialization (debugging / golden tests) ---

namespace detail {
inline void write_scalar(std::ostream& os, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
}
inline void write_vector(std::ostream& os, const Vector& v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << ' ';
        write_scalar(os, v[i]);
    }
    os << '\n';
}
}  // namespace detail

inline void write_instance(std::ostream& os, const ProblemInstance& p) {
    os << p.A.rows << ' ' << p.A.cols << ' ' << p.s << ' ' << (p.u_gen ? 1 : 0) << '\n';
    for (std::size_t i = 0; i < p.A.rows; ++i) {
        Vector row(p.A.data.begin() + i * p.A.cols, p.A.data.begin() + (i + 1) * p.A.cols);
        detail::write_vector(os, row);
    }
    detail::write_vector(os, p.f);
    if (p.u_gen) detail::write_vector(os, *p.u_gen);
}

inline ProblemInstance read_instance(std::istream& is) {
    std::size_t m, n, s;
    int has_gen;
    if (!(is >> m >> n >> s >> has_gen)) throw std::runtime_error("read_instance: bad header");
    Matrix A(m, n);
    for (double& a : A.data)
        if (!(is >> a)) throw std::runtime_error("read_instance: truncated matrix");
    Vector f(m);
    for (double& v : f)
        if (!(is >> v)) throw std::runtime_error("read_instance: truncated data vector");
    std::optional<Vector> u_gen;
    if (has_gen) {
        Vector u(n);
        for (double& v : u)
            if (!(is >> v)) throw std::runtime_error("read_instance: truncated u_gen");
        u_gen = std::move(u);
    }
    return ProblemInstance{std::move(A), std::move(f), s, std::move(u_gen)};
}

}  // namespace iht
