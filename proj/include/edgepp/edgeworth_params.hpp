#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "edgepp/error.hpp"

namespace edgepp {

// Spot state of the Edgeworth++ model. All rates annualized.
struct EdgeworthParams {
    double sigma0 = 0.2;        // spot volatility
    double beta_tilde0 = 0.0;   // spot vol-of-vol
    double rho0 = 0.0;          // spot leverage
    double eta0 = 0.0;          // vol-of-vol-of-vol loading on the price Brownian
    double alpha_prime0 = 0.0;  // (alpha0 + delta0) / 2
    double lambda0 = 0.0;       // jump intensity
    double mu_j = 0.0;          // mean log jump
    double sigma_j = 0.0;       // jump size volatility

    // beta0 = beta_tilde0 * rho0, beta0' = beta_tilde0 * sqrt(1 - rho0^2)
    double beta0() const { return beta_tilde0 * rho0; }
    double beta0_prime() const { return beta_tilde0 * std::sqrt(std::max(0.0, 1.0 - rho0 * rho0)); }

    void validate() const {
        require(std::isfinite(sigma0) && sigma0 > 0.0, "sigma0 must be positive");
        require(std::isfinite(beta_tilde0), "beta_tilde0 must be finite");
        require(rho0 >= -1.0 && rho0 <= 1.0, "rho0 must lie in [-1, 1]");
        require(std::isfinite(eta0) && std::isfinite(alpha_prime0), "eta0/alpha_prime0 must be finite");
        require(std::isfinite(lambda0) && lambda0 >= 0.0, "lambda0 must be non-negative");
        require(std::isfinite(mu_j), "mu_j must be finite");
        require(std::isfinite(sigma_j) && sigma_j >= 0.0, "sigma_j must be non-negative");
    }
};

// Piecewise-constant volatility shift: phi(t) = a_k on [tau_k, tau_{k+1}),
// with tau_0 = 0 and a_0 = 0. shifts holds a_1..a_{n-1}.
struct Displacement {
    std::vector<double> tenors;
    std::vector<double> shifts;

    std::size_t size() const { return tenors.size(); }

    // a_k with the implicit a_0 = 0.
    double level(std::size_t k) const { return k == 0 ? 0.0 : shifts[k - 1]; }

    // Left edge of segment k.
    double start(std::size_t k) const { return k == 0 ? 0.0 : tenors[k - 1]; }

    void validate() const {
        require(!tenors.empty(), "displacement needs at least one tenor");
        require(shifts.size() + 1 == tenors.size(), "displacement needs n-1 shifts for n tenors");
        double prev = 0.0;
        for (double t : tenors) {
            require(std::isfinite(t) && t > prev, "displacement tenors must be positive and strictly increasing");
            prev = t;
        }
        for (double a : shifts) require(std::isfinite(a), "displacement shifts must be finite");
    }

    void validate(double sigma0) const {
        validate();
        require(sigma0 > 0.0, "sigma0 must be positive");
        for (double a : shifts)
            require(1.0 + a / sigma0 > 0.0, "shift makes volatility non-positive (1 + a_k/sigma0 <= 0)");
    }

    // phi(t) under the indicator definition; beyond the last tenor the last level is held.
    double phi(double t) const {
        std::size_t k = 0;
        while (k + 1 < tenors.size() && t >= tenors[k]) ++k;
        if (t >= tenors.back()) k = tenors.size() - 1;
        return level(k);
    }

    static Displacement none(double tenor) { return Displacement{{tenor}, {}}; }
};

}  // namespace edgepp
