#pragma once

#include <cmath>
#include <complex>
#include <optional>

#include "edgepp/dopri.hpp"
#include "edgepp/edgeworth_params.hpp"
#include "edgepp/error.hpp"
#include "edgepp/tenor_matrices.hpp"

namespace edgepp {

using cplx = std::complex<double>;

// Affine 1F/2F Heston model with self-exciting Merton jumps,
// intensity c0 + c1 v1 + c2 v2, jump sizes z_v ~ Exp(m_v), z_x | z_v ~ N(mu_x + rho_jump z_v, sigma_x^2).
struct HestonMertonParams {
    double v1_0 = 0.04, v2_0 = 0.0;
    double kappa1 = 1.0, kappa2 = 0.0;
    double theta1 = 0.04, theta2 = 0.0;
    double zeta1 = 0.3, zeta2 = 0.0;
    double rho1 = -0.5, rho2 = 0.0;
    double rho_jump = 0.0;
    double mu_x = 0.0, sigma_x = 0.0;
    double m_v = 0.0;
    double c0 = 0.0, c1 = 0.0, c2 = 0.0;
    int factor_count = 2;
    bool feller_enforced = false;
    std::optional<Displacement> shifts;  // deterministic shift of factor-1 variance

    void validate() const {
        require(factor_count == 1 || factor_count == 2, "factor_count must be 1 or 2");
        require(v1_0 >= 0.0 && v2_0 >= 0.0, "initial variances must be non-negative");
        require(theta1 >= 0.0 && theta2 >= 0.0, "long-run variances must be non-negative");
        require(zeta1 >= 0.0 && zeta2 >= 0.0, "vol-of-var must be non-negative");
        require(c0 >= 0.0 && c1 >= 0.0 && c2 >= 0.0, "intensity loadings must be non-negative");
        require(std::abs(rho1) <= 1.0 && std::abs(rho2) <= 1.0 && std::abs(rho_jump) <= 1.0,
                "correlations must lie in [-1, 1]");
        require(m_v >= 0.0 && sigma_x >= 0.0, "jump size parameters must be non-negative");
        require(m_v * rho_jump < 1.0, "m_v * rho_jump must be below 1");
        require(std::isfinite(kappa1) && std::isfinite(kappa2) && std::isfinite(mu_x), "parameters must be finite");
        if (feller_enforced) {
            require(2.0 * kappa1 * theta1 >= zeta1 * zeta1, "Feller condition violated for factor 1");
            if (factor_count == 2)
                require(2.0 * kappa2 * theta2 >= zeta2 * zeta2, "Feller condition violated for factor 2");
        }
        if (shifts) shifts->validate();
    }

    double spot_variance() const { return v1_0 + (factor_count == 2 ? v2_0 : 0.0); }

    // E[e^{z_x}] - 1
    double jump_compensator() const {
        return std::exp(mu_x + 0.5 * sigma_x * sigma_x) / (1.0 - m_v * rho_jump) - 1.0;
    }
};

inline double shift_integral(const Displacement& d, double tau) {
    const Displacement local = truncate_displacement(d, tau);
    double total = 0.0;
    for (std::size_t k = 0; k < local.size(); ++k) total += local.level(k) * (local.tenors[k] - local.start(k));
    return total;
}

// log E[exp(i w (X_tau - X_0))] for complex w.
inline cplx heston_merton_log_cf(cplx w, double tau, const HestonMertonParams& p, const DopriConfig& cfg = {}) {
    require(tau > 0.0, "tau must be positive");
    const bool two = p.factor_count == 2;
    const cplx i{0.0, 1.0};
    const cplx iw = i * w;
    const cplx diffusion = -0.5 * (w * w + iw);
    const double kbar = p.jump_compensator();
    const bool jumps = p.c0 > 0.0 || p.c1 > 0.0 || (two && p.c2 > 0.0);
    const cplx price_jump = std::exp(iw * p.mu_x - 0.5 * w * w * p.sigma_x * p.sigma_x);

    auto theta = [&](cplx b1) -> cplx {
        const cplx denom = 1.0 - p.m_v * (iw * p.rho_jump + b1);
        if (std::abs(denom) < 1e-12) throw NumericalError("jump transform pole: 1 - m_v (i w rho + B1) = 0");
        return price_jump / denom - 1.0 - iw * kbar;
    };

    // y = (A, B1, B2), t = time to maturity
    auto rhs = [&](double, const std::array<cplx, 3>& y) {
        const cplx b1 = y[1], b2 = y[2];
        const cplx j = jumps ? theta(b1) : cplx{0.0, 0.0};
        std::array<cplx, 3> d;
        d[0] = p.kappa1 * p.theta1 * b1 + p.c0 * j;
        d[1] = diffusion + (iw * p.rho1 * p.zeta1 - p.kappa1) * b1 + 0.5 * p.zeta1 * p.zeta1 * b1 * b1 + p.c1 * j;
        if (two) {
            d[0] += p.kappa2 * p.theta2 * b2;
            d[2] = diffusion + (iw * p.rho2 * p.zeta2 - p.kappa2) * b2 + 0.5 * p.zeta2 * p.zeta2 * b2 * b2 + p.c2 * j;
        } else {
            d[2] = 0.0;
        }
        return d;
    };

    const auto y = dopri_solve<3>(rhs, {cplx{}, cplx{}, cplx{}}, tau, cfg);
    cplx out = y[0] + y[1] * p.v1_0 + (two ? y[2] * p.v2_0 : cplx{});
    if (p.shifts) out += diffusion * shift_integral(*p.shifts, tau);
    return out;
}

inline cplx heston_merton_cf(cplx w, double tau, const HestonMertonParams& p, const DopriConfig& cfg = {}) {
    p.validate();
    return std::exp(heston_merton_log_cf(w, tau, p, cfg));
}

// Closed-form one-factor Heston log CF (rotation-safe branch), no jumps.
inline cplx heston_closed_form_log_cf(cplx w, double tau, double v0, double kappa, double theta, double zeta,
                                      double rho) {
    require(zeta > 0.0, "closed-form Heston needs zeta > 0");
    if (w == cplx(0.0)) return 0.0;
    const cplx i{0.0, 1.0};
    const cplx beta = kappa - rho * zeta * i * w;
    const cplx d = std::sqrt(beta * beta + zeta * zeta * (i * w + w * w));
    const cplx g = (beta - d) / (beta + d);
    const cplx e = std::exp(-d * tau);
    const cplx C = kappa * theta / (zeta * zeta) * ((beta - d) * tau - 2.0 * std::log((1.0 - g * e) / (1.0 - g)));
    const cplx D = (beta - d) / (zeta * zeta) * (1.0 - e) / (1.0 - g * e);
    return C + D * v0;
}

// Standardized CF of one tenor, reference vol = spot vol.
struct HestonMertonTenorCf {
    HestonMertonParams params;
    double tau = 0.0;
    double sigma_ref = 0.0;
    DopriConfig ode;

    double reference_vol() const { return sigma_ref; }

    cplx operator()(cplx u) const {
        const double scale = sigma_ref * std::sqrt(tau);
        const cplx i{0.0, 1.0};
        return std::exp(heston_merton_log_cf(u / scale, tau, params, ode) + i * u * (0.5 * scale));
    }
};

struct HestonMertonModel {
    HestonMertonParams params;
    DopriConfig ode;

    HestonMertonTenorCf tenor_cf(double tau) const {
        params.validate();
        const double v = params.spot_variance();
        require(v > 0.0, "spot variance must be positive");
        return {params, tau, std::sqrt(v), ode};
    }
};

}  // namespace edgepp
