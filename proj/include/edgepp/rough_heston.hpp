#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "edgepp/error.hpp"

namespace edgepp {

using cplx = std::complex<double>;

// Piecewise forward variance: level k on [tau_k, tau_{k+1}), tau_0 = 0;
// the last level is held past the last tenor.
struct ForwardVariance {
    std::vector<double> tenors;
    std::vector<double> levels;

    void validate() const {
        require(!tenors.empty() && tenors.size() == levels.size(), "forward variance needs one level per tenor");
        double prev = 0.0;
        for (std::size_t k = 0; k < tenors.size(); ++k) {
            require(tenors[k] > prev, "forward variance tenors must be positive and increasing");
            require(std::isfinite(levels[k]) && levels[k] > 0.0, "forward variance levels must be positive");
            prev = tenors[k];
        }
    }

    double at(double t) const {
        for (std::size_t k = 0; k < tenors.size(); ++k)
            if (t < tenors[k]) return levels[k];
        return levels.back();
    }

    static ForwardVariance flat(double v, double tenor = 1.0) { return {{tenor}, {v}}; }
};

struct RoughHestonParams {
    double hurst = 0.1;
    double nu = 0.3;
    double rho = -0.7;
    ForwardVariance xi0 = ForwardVariance::flat(0.04);
    double lambda = 0.0;  // Merton jumps, raw log-return units
    double mu_j = 0.0;
    double sigma_j = 0.0;

    void validate() const {
        require(hurst > 0.0 && hurst <= 0.5, "hurst must lie in (0, 1/2]");
        require(nu > 0.0, "nu must be positive");
        require(rho >= -1.0 && rho <= 1.0, "rho must lie in [-1, 1]");
        require(lambda >= 0.0 && sigma_j >= 0.0 && std::isfinite(mu_j), "invalid jump parameters");
        xi0.validate();
    }
};

struct RoughSolverConfig {
    int steps = 256;
    std::size_t batch = 16;
};

namespace detail {

// Riemann-Liouville integral of order beta of the piecewise-linear
// interpolant of h on the grid j*dt, evaluated at r (0 <= r <= n*dt).
inline void fractional_integral(const std::vector<double>& hr, const std::vector<double>& hi, std::size_t M,
                                double dt, double beta, double r, double* out_re, double* out_im) {
    std::fill(out_re, out_re + M, 0.0);
    std::fill(out_im, out_im + M, 0.0);
    if (r <= 0.0) return;
    const std::size_t cells = static_cast<std::size_t>(std::ceil(r / dt - 1e-12));
    const double norm = 1.0 / std::tgamma(beta);
    for (std::size_t j = 0; j < cells; ++j) {
        const double p = j * dt;
        const double q = std::min((j + 1) * dt, r);
        const double yp = r - p, yq = r - q;
        // int (r-x)^(beta-1) dx and int (r-x)^(beta-1) (x-p) dx over [p, q]
        const double w0 = (std::pow(yp, beta) - std::pow(yq, beta)) / beta;
        const double w1 = yp * w0 - (std::pow(yp, beta + 1) - std::pow(yq, beta + 1)) / (beta + 1);
        const double wa = norm * (w0 - w1 / dt), wb = norm * w1 / dt;
        const double* a_re = &hr[j * M];
        const double* a_im = &hi[j * M];
        const double* b_re = &hr[(j + 1) * M];
        const double* b_im = &hi[(j + 1) * M];
        for (std::size_t m = 0; m < M; ++m) {
            out_re[m] += wa * a_re[m] + wb * b_re[m];
            out_im[m] += wa * a_im[m] + wb * b_im[m];
        }
    }
}

}  // namespace detail

// log E[exp(i w (X_tau - X_0))] for a batch of complex w, kappa = 0.
// h solves D^alpha h = F(w, h), alpha = H + 1/2, by the fractional Adams
// scheme with an implicit corrector; the log CF is int_0^tau F(w, h(tau - s)) xi0(s) ds.
inline void rough_heston_log_cf_batch(const cplx* w, std::size_t M, double tau, const RoughHestonParams& p,
                                      const RoughSolverConfig& cfg, cplx* out) {
    require(tau > 0.0, "tau must be positive");
    require(cfg.steps >= 2, "rough solver needs at least 2 steps");
    const int N = cfg.steps;
    const double alpha = p.hurst + 0.5;
    const double dt = tau / N;

    std::vector<double> c(N + 1), a0(N + 1);
    for (int m = 0; m <= N; ++m) {
        c[m] = std::pow(m + 2.0, alpha + 1) + std::pow(m, alpha + 1) - 2.0 * std::pow(m + 1.0, alpha + 1);
        a0[m] = std::pow(m, alpha + 1) - (m - alpha) * std::pow(m + 1.0, alpha);
    }
    const double corr_scale = std::pow(dt, alpha) / std::tgamma(alpha + 2);

    // F(w, h) = k0 + k1 h + k2 h^2
    std::vector<double> k0r(M), k0i(M), k1r(M), k1i(M);
    const double k2 = 0.5 * p.nu * p.nu;
    for (std::size_t m = 0; m < M; ++m) {
        const cplx iw = cplx(0.0, 1.0) * w[m];
        const cplx k0 = -0.5 * (w[m] * w[m] + iw);
        const cplx k1 = iw * (p.rho * p.nu);
        k0r[m] = k0.real();
        k0i[m] = k0.imag();
        k1r[m] = k1.real();
        k1i[m] = k1.imag();
    }

    std::vector<double> hr((N + 1) * M, 0.0), hi((N + 1) * M, 0.0);
    std::vector<double> fr((N + 1) * M), fi((N + 1) * M);
    auto eval_f = [&](const double* xr, const double* xi, double* yr, double* yi) {
        for (std::size_t m = 0; m < M; ++m) {
            const double sr = xr[m] * xr[m] - xi[m] * xi[m];
            const double si = 2.0 * xr[m] * xi[m];
            yr[m] = k0r[m] + k1r[m] * xr[m] - k1i[m] * xi[m] + k2 * sr;
            yi[m] = k0i[m] + k1r[m] * xi[m] + k1i[m] * xr[m] + k2 * si;
        }
    };
    eval_f(&hr[0], &hi[0], &fr[0], &fi[0]);

    // The corrector h = corr_scale (F(h) + S) is quadratic in h and is solved
    // exactly, taking the root that tends to corr_scale (k0 + S) as dt -> 0.
    std::vector<double> cr(M), ci(M);
    for (int k = 0; k < N; ++k) {
        for (std::size_t m0 = 0; m0 < M; m0 += 8) {
            double accr[8] = {}, acci[8] = {};
            const std::size_t width = std::min<std::size_t>(8, M - m0);
            if (width == 8) {
                for (int j = 0; j <= k; ++j) {
                    const double cw = j == 0 ? a0[k] : c[k - j];
                    const double* xr = &fr[j * M + m0];
                    const double* xi = &fi[j * M + m0];
                    for (int mm = 0; mm < 8; ++mm) {
                        accr[mm] += cw * xr[mm];
                        acci[mm] += cw * xi[mm];
                    }
                }
            } else {
                for (int j = 0; j <= k; ++j) {
                    const double cw = j == 0 ? a0[k] : c[k - j];
                    for (std::size_t mm = 0; mm < width; ++mm) {
                        accr[mm] += cw * fr[j * M + m0 + mm];
                        acci[mm] += cw * fi[j * M + m0 + mm];
                    }
                }
            }
            for (std::size_t mm = 0; mm < width; ++mm) {
                cr[m0 + mm] = accr[mm];
                ci[m0 + mm] = acci[mm];
            }
        }
        double* nr = &hr[(k + 1) * M];
        double* ni = &hi[(k + 1) * M];
        for (std::size_t m = 0; m < M; ++m) {
            const double qa = corr_scale * k2;
            const cplx qb = corr_scale * cplx(k1r[m], k1i[m]) - 1.0;
            const cplx qc = corr_scale * cplx(k0r[m] + cr[m], k0i[m] + ci[m]);
            cplx disc = std::sqrt(qb * qb - 4.0 * qa * qc);
            if ((disc * std::conj(-qb)).real() < 0.0) disc = -disc;
            const cplx h = 2.0 * qc / (disc - qb);
            if (!std::isfinite(h.real()) || !std::isfinite(h.imag()) || std::abs(h) > 1e12)
                throw NumericalError("fractional Riccati solution diverges at t = " + std::to_string((k + 1) * dt));
            nr[m] = h.real();
            ni[m] = h.imag();
        }
        eval_f(nr, ni, &fr[(k + 1) * M], &fi[(k + 1) * M]);
    }

    // G(r) = I^{1-alpha} h(r); for alpha = 1, G = h.
    const double beta = 1.0 - alpha;
    std::vector<double> gr_hi(M), gi_hi(M), gr_lo(M), gi_lo(M);
    auto G = [&](double r, double* yr, double* yi) {
        if (beta <= 1e-14) {
            const double x = std::clamp(r / dt, 0.0, static_cast<double>(N));
            const std::size_t j = std::min(static_cast<std::size_t>(x), static_cast<std::size_t>(N - 1));
            const double f = x - j;
            for (std::size_t m = 0; m < M; ++m) {
                yr[m] = (1 - f) * hr[j * M + m] + f * hr[(j + 1) * M + m];
                yi[m] = (1 - f) * hi[j * M + m] + f * hi[(j + 1) * M + m];
            }
        } else {
            detail::fractional_integral(hr, hi, M, dt, beta, r, yr, yi);
        }
    };

    for (std::size_t m = 0; m < M; ++m) out[m] = 0.0;
    const auto& xi = p.xi0;
    double start = 0.0;
    for (std::size_t k = 0; k < xi.tenors.size() && start < tau; ++k) {
        const double end = k + 1 == xi.tenors.size() ? tau : std::min(xi.tenors[k], tau);
        if (end > start) {
            G(tau - start, gr_hi.data(), gi_hi.data());
            G(tau - end, gr_lo.data(), gi_lo.data());
            for (std::size_t m = 0; m < M; ++m)
                out[m] += xi.levels[k] * cplx(gr_hi[m] - gr_lo[m], gi_hi[m] - gi_lo[m]);
        }
        start = end;
    }

    if (p.lambda > 0.0) {
        const double kbar = std::expm1(p.mu_j + 0.5 * p.sigma_j * p.sigma_j);
        for (std::size_t m = 0; m < M; ++m) {
            const cplx iw = cplx(0.0, 1.0) * w[m];
            const cplx jump = std::exp(iw * p.mu_j - 0.5 * w[m] * w[m] * p.sigma_j * p.sigma_j);
            out[m] += tau * p.lambda * (jump - 1.0 - iw * kbar);
        }
    }
}

inline cplx rough_heston_cf(cplx w, double tau, const RoughHestonParams& p, const RoughSolverConfig& cfg = {}) {
    p.validate();
    cplx out;
    rough_heston_log_cf_batch(&w, 1, tau, p, cfg, &out);
    return std::exp(out);
}

// Standardized CF of one tenor, reference vol = sqrt(xi0(0)).
struct RoughHestonTenorCf {
    RoughHestonParams params;
    double tau = 0.0;
    double sigma_ref = 0.0;
    RoughSolverConfig solver;

    double reference_vol() const { return sigma_ref; }

    void evaluate(const cplx* u, std::size_t n, cplx* out) const {
        const double scale = sigma_ref * std::sqrt(tau);
        std::vector<cplx> w(solver.batch);
        for (std::size_t s = 0; s < n; s += solver.batch) {
            const std::size_t M = std::min(solver.batch, n - s);
            for (std::size_t m = 0; m < M; ++m) w[m] = u[s + m] / scale;
            rough_heston_log_cf_batch(w.data(), M, tau, params, solver, out + s);
            for (std::size_t m = 0; m < M; ++m)
                out[s + m] = std::exp(out[s + m] + cplx(0.0, 1.0) * u[s + m] * (0.5 * scale));
        }
    }

    cplx operator()(cplx u) const {
        cplx out;
        evaluate(&u, 1, &out);
        return out;
    }
};

struct RoughHestonModel {
    RoughHestonParams params;
    RoughSolverConfig solver;

    RoughHestonTenorCf tenor_cf(double tau) const {
        params.validate();
        return {params, tau, std::sqrt(params.xi0.levels.front()), solver};
    }
};

}  // namespace edgepp
