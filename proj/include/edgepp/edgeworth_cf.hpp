#pragma once

#include <complex>
#include <cmath>
#include <optional>

#include "edgepp/edgeworth_params.hpp"
#include "edgepp/tenor_matrices.hpp"

namespace edgepp {

using cplx = std::complex<double>;

// Second-order CF expansion of the standardized continuous return:
//   exp(-u^2 v / 2) * (1 - i s3 u^3 + c2 u^2 + c4 u^4 + c6 u^6).
// Every closed form (with or without shift) reduces to these five numbers,
// which depend on tau but not on u.
struct EdgeworthExpansion {
    double variance = 1.0;
    double s3 = 0.0;
    double c2 = 0.0;
    double c4 = 0.0;
    double c6 = 0.0;

    cplx operator()(cplx u) const {
        const cplx u2 = u * u;
        const double decay = 0.5 * variance * u2.real();
        // exp(-745) underflows; the damped product is exactly zero past that point.
        if (decay > 740.0) return {0.0, 0.0};
        const cplx poly = 1.0 + u2 * (c2 + u2 * (c4 + u2 * c6)) - cplx(0.0, s3) * u2 * u;
        return std::polar(std::exp(-decay), -0.5 * variance * u2.imag()) * poly;
    }
};

// phi = 0 expansion.
inline EdgeworthExpansion no_shift_expansion(double tau, const EdgeworthParams& p) {
    require(tau > 0.0, "tau must be positive");
    p.validate();
    const double s = p.sigma0;
    const double b2 = p.beta_tilde0 * p.beta_tilde0;
    const double r2 = p.rho0 * p.rho0;
    EdgeworthExpansion e;
    e.variance = 1.0;
    e.s3 = p.beta_tilde0 * p.rho0 / (2.0 * s) * std::sqrt(tau);
    // (alpha0 + delta0) / 2 = alpha_prime0
    e.c2 = -(p.alpha_prime0 / s + b2 / (4.0 * s * s)) * tau;
    // (b2 / 24 s^2) u^2 (4u^2 - rho^2 u^2 (3u^2 - 8)) + (eta / 6 s) u^4
    e.c4 = (b2 / (24.0 * s * s) * (4.0 + 8.0 * r2) + p.eta0 / (6.0 * s)) * tau;
    e.c6 = -b2 / (24.0 * s * s) * 3.0 * r2 * tau;
    return e;
}

inline bool on_tenor_grid(const Displacement& d, double tau) {
    for (double t : d.tenors)
        if (std::abs(t - tau) <= 1e-12 * std::max(1.0, t)) return true;
    return false;
}

enum class OffGrid { reject, extend };

// Piecewise-shift closed form as the inner-product formula over the tenor
// matrices. Kept for comparison: it agrees with the exact nested integrals
// only when all shifts vanish.
inline EdgeworthExpansion inner_product_expansion(double tau, const EdgeworthParams& p, const Displacement& d,
                                              OffGrid off_grid = OffGrid::reject) {
    p.validate();
    d.validate(p.sigma0);
    require(tau > 0.0, "tau must be positive");
    if (off_grid == OffGrid::reject && !on_tenor_grid(d, tau))
        throw DomainError("tau is not on the displacement tenor grid");

    const Displacement local = truncate_displacement(d, tau);
    const TenorMatrices m = build_tenor_matrices(local, p.sigma0, 4);
    const double t = local.tenors.back();
    const double s = p.sigma0;
    const double b2 = p.beta_tilde0 * p.beta_tilde0;
    const double r2 = p.rho0 * p.rho0;

    const double p21 = m.inner(2, 1);
    const double p22 = m.inner(2, 2);
    const double p12 = m.inner(1, 2);
    const double p13 = m.inner(1, 3);
    const double p23 = m.inner(2, 3);
    const double p44 = m.inner(4, 4);

    const double rho_block = b2 * r2 / (8.0 * s * s * t);
    const double perp_block = b2 * (1.0 - r2) / (2.0 * s * s * t);

    EdgeworthExpansion e;
    e.variance = p21 / t;
    e.s3 = p.beta_tilde0 * p.rho0 / (2.0 * s * std::pow(t, 1.5)) * p22;
    // u^2: drift term, then the 2 tau^2 and tau^2/2 pieces of the two vol-of-vol blocks
    e.c2 = -p.alpha_prime0 / (s * t) * p12 - rho_block * 2.0 * t * t - perp_block * 0.5 * t * t;
    // u^4: eta term, rho block (2 p22 - 4 p23/t - 2 p23/t), orthogonal block
    e.c4 = p.eta0 / (6.0 * s * t * t) * p13 - rho_block * (2.0 * p22 - 6.0 * p23 / t) +
           perp_block * p23 / (3.0 * t);
    // u^6: the -12u^2/t * (-u^2 / 12t) p44 piece
    e.c6 = -rho_block * p44 / (t * t);
    return e;
}

// Nested integrals of phi~ = 1 + phi/sigma0 entering the general-shift expansion.
struct ShiftIntegrals {
    double tau = 0.0;
    double sq = 0.0;      // int phi~^2
    double skew = 0.0;    // int phi~(s) int_0^s phi~
    double delta = 0.0;   // int int_0^s phi~
    double alpha = 0.0;   // int s phi~(s)
    double eta = 0.0;     // int int int phi~
    double triple = 0.0;  // int phi~(s) int_0^s phi~(s1) int_0^s1 phi~
    double c1 = 0.0;      // int phi~(s) int_0^s s1 phi~(s1)
    double c2 = 0.0;      // int phi~(s) int_0^s phi~(s1) [int_0^s1 phi~(s2) int_0^s2 phi~]
};

// Exact values for a piecewise-constant phi~, by carrying every running
// integral across segments in closed form.
inline ShiftIntegrals piecewise_shift_integrals(double tau, double sigma0, const Displacement& d) {
    const Displacement local = truncate_displacement(d, tau);
    ShiftIntegrals r;
    r.tau = tau;
    double f1 = 0.0;  // int_0^s phi~
    double f2 = 0.0;  // int_0^s f1
    double g = 0.0;   // int_0^s phi~ f1
    double k = 0.0;   // int_0^s s1 phi~
    double b = 0.0;   // int_0^s phi~ g
    for (std::size_t seg = 0; seg < local.size(); ++seg) {
        const double t0 = local.start(seg);
        const double t1 = local.tenors[seg];
        const double h = t1 - t0;
        const double c = 1.0 + local.level(seg) / sigma0;
        const double h2 = h * h, h3 = h2 * h, h4 = h3 * h;

        r.sq += c * c * h;
        r.alpha += c * 0.5 * (t1 * t1 - t0 * t0);
        r.eta += f2 * h + f1 * h2 / 2.0 + c * h3 / 6.0;
        r.c1 += c * (k * h + c * (t0 * h2 / 2.0 + h3 / 6.0));
        r.c2 += c * (b * h + c * g * h2 / 2.0 + c * c * f1 * h3 / 6.0 + c * c * c * h4 / 24.0);

        const double b_new = b + c * (g * h + c * f1 * h2 / 2.0 + c * c * h3 / 6.0);
        const double g_new = g + c * (f1 * h + c * h2 / 2.0);
        const double f2_new = f2 + f1 * h + c * h2 / 2.0;
        const double f1_new = f1 + c * h;
        k += c * 0.5 * (t1 * t1 - t0 * t0);
        b = b_new;
        g = g_new;
        f2 = f2_new;
        f1 = f1_new;
    }
    r.skew = g;
    r.delta = f2;
    r.triple = b;
    return r;
}

// General-shift expansion assembled from the nested integrals. alpha0 and
// delta0 both enter as alpha_prime0.
inline EdgeworthExpansion general_shift_expansion(const EdgeworthParams& p, const ShiftIntegrals& in) {
    const double t = in.tau;
    const double s = p.sigma0;
    const double b0 = p.beta0();
    const double bp = p.beta0_prime();
    const double rho_block = b0 * b0 / (8.0 * s * s * t);
    const double perp_block = bp * bp / (2.0 * s * s * t);

    EdgeworthExpansion e;
    e.variance = in.sq / t;
    e.s3 = b0 / (s * std::pow(t, 1.5)) * in.skew;
    e.c2 = -p.alpha_prime0 / (s * t) * (in.delta + in.alpha) - rho_block * 2.0 * t * t - perp_block * 0.5 * t * t;
    e.c4 = p.eta0 / (s * t * t) * in.eta - rho_block * (4.0 * in.skew - 24.0 * in.triple / t - 12.0 * in.c1 / t) +
           perp_block * 2.0 * in.c1 / t;
    e.c6 = -rho_block * 24.0 * in.c2 / (t * t);
    return e;
}

inline cplx psi_c_no_shift(cplx u, double tau, const EdgeworthParams& p) {
    return no_shift_expansion(tau, p)(u);
}

inline EdgeworthExpansion piecewise_expansion(double tau, const EdgeworthParams& p, const Displacement& d,
                                              OffGrid off_grid = OffGrid::reject) {
    p.validate();
    d.validate(p.sigma0);
    require(tau > 0.0, "tau must be positive");
    if (off_grid == OffGrid::reject && !on_tenor_grid(d, tau))
        throw DomainError("tau is not on the displacement tenor grid");
    return general_shift_expansion(p, piecewise_shift_integrals(tau, p.sigma0, d));
}

inline cplx psi_c_piecewise(cplx u, double tau_k, const EdgeworthParams& p, const Displacement& d,
                            OffGrid off_grid = OffGrid::reject) {
    return piecewise_expansion(tau_k, p, d, off_grid)(u);
}

inline cplx psi_c_inner_product(cplx u, double tau_k, const EdgeworthParams& p, const Displacement& d,
                                OffGrid off_grid = OffGrid::reject) {
    return inner_product_expansion(tau_k, p, d, off_grid)(u);
}

// Gaussian compound-Poisson factor in standardized units.
inline cplx psi_jump(cplx u, double tau, const EdgeworthParams& p) {
    require(tau > 0.0, "tau must be positive");
    require(p.sigma0 > 0.0, "sigma0 must be positive");
    if (p.lambda0 == 0.0) return {1.0, 0.0};
    const double scale = p.sigma0 * std::sqrt(tau);
    const double m = p.mu_j / scale;
    const double v = p.sigma_j * p.sigma_j / (scale * scale);
    const double compensator = std::expm1(m + 0.5 * v);
    if (!std::isfinite(compensator)) throw NumericalError("jump compensator overflows at this tenor");
    const cplx i{0.0, 1.0};
    const cplx jump_cf = std::exp(i * u * m - 0.5 * u * u * v);
    return std::exp(tau * p.lambda0 * (jump_cf - 1.0 - i * u * compensator));
}

inline cplx psi_full(cplx u, double tau, const EdgeworthParams& p, const std::optional<Displacement>& d,
                     OffGrid off_grid = OffGrid::reject) {
    const cplx cont = d ? psi_c_piecewise(u, tau, p, *d, off_grid) : psi_c_no_shift(u, tau, p);
    return cont * psi_jump(u, tau, p);
}

// Per-tenor CF with the expansion coefficients computed once.
struct EdgeworthTenorCf {
    EdgeworthExpansion cont;
    double sigma0 = 0.2;
    double tau = 0.0;
    double lambda = 0.0;
    double jump_mean = 0.0;  // standardized
    double jump_var = 0.0;
    double compensator = 0.0;

    double reference_vol() const { return sigma0; }

    cplx operator()(cplx u) const {
        const cplx c = cont(u);
        if (lambda == 0.0) return c;
        const cplx i{0.0, 1.0};
        const cplx a = i * u * jump_mean - 0.5 * u * u * jump_var;
        const cplx jump_cf = std::polar(std::exp(a.real()), a.imag());
        const cplx b = tau * lambda * (jump_cf - 1.0 - i * u * compensator);
        return c * std::polar(std::exp(b.real()), b.imag());
    }

    // Batch form. Along runs of equally spaced u the Gaussian factors
    // exp(a u^2 + b u) follow a two-term multiplicative recurrence,
    // re-anchored every 64 nodes.
    void evaluate(const cplx* u, std::size_t n, cplx* out) const {
        std::size_t i = 0;
        while (i < n) {
            std::size_t e = i + 1;
            if (i + 1 < n) {
                const cplx d = u[i + 1] - u[i];
                e = i + 2;
                while (e < n && std::abs((u[e] - u[e - 1]) - d) <= 1e-12 * std::abs(d)) ++e;
            }
            evaluate_run(u + i, e - i, out + i);
            i = e;
        }
    }

private:
    static cplx cexp(cplx z) { return std::polar(std::exp(z.real()), z.imag()); }

    void evaluate_run(const cplx* u, std::size_t m, cplx* out) const {
        const cplx i{0.0, 1.0};
        const cplx d = m > 1 ? u[1] - u[0] : cplx{};
        const double ac = -0.5 * cont.variance;
        const double aj = -0.5 * jump_var;
        const cplx bj = i * jump_mean;
        const bool jumps = lambda != 0.0;
        const cplx qc = cexp(2.0 * ac * d * d), qj = cexp(2.0 * aj * d * d);
        cplx gc, rc, gj, rj;
        for (std::size_t k = 0; k < m; ++k) {
            const cplx x = u[k];
            const cplx x2 = x * x;
            const double decay = 0.5 * cont.variance * x2.real();
            if (k % 64 == 0 && decay <= 740.0) {
                gc = cexp(ac * x2);
                rc = cexp(ac * (2.0 * x * d + d * d));
                if (jumps) {
                    gj = cexp(aj * x2 + bj * x);
                    rj = cexp(aj * (2.0 * x * d + d * d) + bj * d);
                }
            }
            if (decay > 740.0) {
                out[k] = 0.0;
                continue;
            }
            const cplx poly = 1.0 + x2 * (cont.c2 + x2 * (cont.c4 + x2 * cont.c6)) - cplx(0.0, cont.s3) * x2 * x;
            out[k] = gc * poly;
            if (jumps) out[k] *= cexp(tau * lambda * (gj - 1.0 - i * x * compensator));
            gc *= rc;
            rc *= qc;
            if (jumps) {
                gj *= rj;
                rj *= qj;
            }
        }
    }
};

// Edgeworth++ (or plain Edgeworth when displacement is empty). Off-grid
// tenors are priced with the extra-breakpoint extension.
struct EdgeworthModel {
    EdgeworthParams params;
    std::optional<Displacement> displacement;

    EdgeworthTenorCf tenor_cf(double tau) const {
        EdgeworthTenorCf cf;
        cf.cont = displacement ? piecewise_expansion(tau, params, *displacement, OffGrid::extend)
                               : no_shift_expansion(tau, params);
        cf.sigma0 = params.sigma0;
        cf.tau = tau;
        cf.lambda = params.lambda0;
        if (cf.lambda > 0.0) {
            const double scale = params.sigma0 * std::sqrt(tau);
            cf.jump_mean = params.mu_j / scale;
            cf.jump_var = params.sigma_j * params.sigma_j / (scale * scale);
            cf.compensator = std::expm1(cf.jump_mean + 0.5 * cf.jump_var);
            if (!std::isfinite(cf.compensator)) throw NumericalError("jump compensator overflows at this tenor");
        }
        return cf;
    }
};

}  // namespace edgepp
