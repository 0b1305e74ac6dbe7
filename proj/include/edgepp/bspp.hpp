#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "edgepp/edgeworth_cf.hpp"
#include "edgepp/error.hpp"

namespace edgepp {

struct AtmTermStructure {
    std::vector<double> tenors;
    std::vector<double> atm_vols;

    void validate() const {
        require(!tenors.empty(), "ATM term structure is empty");
        require(tenors.size() == atm_vols.size(), "tenors and atm_vols differ in length");
        double prev = 0.0;
        for (std::size_t i = 0; i < tenors.size(); ++i) {
            require(std::isfinite(tenors[i]) && tenors[i] > prev, "ATM tenors must be positive and increasing");
            require(std::isfinite(atm_vols[i]) && atm_vols[i] > 0.0, "ATM vols must be positive");
            prev = tenors[i];
        }
    }
};

// ATM implied vol of the displaced Black-Scholes model: the root of the
// average shifted variance over [0, tau].
inline double bspp_atm_vol(double tau, double sigma0, const Displacement& d) {
    require(tau > 0.0, "tau must be positive");
    d.validate(sigma0);
    if (tau < d.tenors.front()) return sigma0;
    const Displacement local = truncate_displacement(d, tau);
    const TenorMatrices m = build_tenor_matrices(local, sigma0, 4);
    return std::sqrt(sigma0 * sigma0 * m.inner(2, 1) / tau);
}

struct BsppFit {
    double sigma0 = 0.0;
    Displacement displacement;
};

// Recursive extraction of (sigma0, a_1..a_{n-1}) from ATM vols.
// Throws CalendarArbitrage (0-based tenor indices) when total variance decreases.
inline BsppFit calibrate_shift_from_atm(const AtmTermStructure& ts) {
    ts.validate();
    BsppFit fit;
    fit.sigma0 = ts.atm_vols.front();
    fit.displacement.tenors = ts.tenors;
    for (std::size_t k = 0; k + 1 < ts.tenors.size(); ++k) {
        const double w0 = ts.atm_vols[k] * ts.atm_vols[k] * ts.tenors[k];
        const double w1 = ts.atm_vols[k + 1] * ts.atm_vols[k + 1] * ts.tenors[k + 1];
        double fwd = (w1 - w0) / (ts.tenors[k + 1] - ts.tenors[k]);
        if (fwd < 0.0 && fwd > -1e-12) fwd = 0.0;
        if (fwd < 0.0)
            throw CalendarArbitrage(k, k + 1,
                                    "calendar arbitrage: total variance decreases between tenor " +
                                        std::to_string(k) + " (tau=" + std::to_string(ts.tenors[k]) + ") and tenor " +
                                        std::to_string(k + 1) + " (tau=" + std::to_string(ts.tenors[k + 1]) + ")");
        fit.displacement.shifts.push_back(std::sqrt(fwd) - fit.sigma0);
    }
    return fit;
}

// Remark-1 CF of the raw log return X_tau - X_0 under BS++.
inline cplx bspp_log_return_cf(cplx u, double tau, double sigma0, const Displacement& d) {
    const double v = bspp_atm_vol(tau, sigma0, d);
    const double w = v * v * tau;
    const cplx i{0.0, 1.0};
    return std::exp(-0.5 * i * u * w - 0.5 * u * u * w);
}

}  // namespace edgepp
