#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "edgepp/edgeworth_params.hpp"

namespace edgepp {

// Row j-1 holds powers j = 1..m; column k holds segment [tau_k, tau_{k+1}).
struct TenorMatrices {
    Eigen::MatrixXd delta_t;    // tau_{k+1}^j - tau_k^j
    Eigen::MatrixXd phi_tilde;  // (1 + a_k / sigma0)^j

    int max_power() const { return static_cast<int>(delta_t.rows()); }
    int segments() const { return static_cast<int>(delta_t.cols()); }

    // <Phi~_p, DeltaT_q> over the first `k` segments (k = n by default).
    double inner(int p, int q, int k = -1) const {
        if (k < 0) k = segments();
        return phi_tilde.row(p - 1).head(k).dot(delta_t.row(q - 1).head(k));
    }
};

inline TenorMatrices build_tenor_matrices(const Displacement& d, double sigma0, int max_power) {
    require(max_power >= 4, "tenor matrices need powers up to at least 4");
    require(sigma0 > 0.0, "sigma0 must be positive");
    d.validate();

    const auto n = static_cast<Eigen::Index>(d.size());
    TenorMatrices out{Eigen::MatrixXd(max_power, n), Eigen::MatrixXd(max_power, n)};
    for (Eigen::Index k = 0; k < n; ++k) {
        const double lo = d.start(static_cast<std::size_t>(k));
        const double hi = d.tenors[static_cast<std::size_t>(k)];
        const double level = 1.0 + d.level(static_cast<std::size_t>(k)) / sigma0;
        double plo = 1.0, phi = 1.0, pl = 1.0;
        for (int j = 1; j <= max_power; ++j) {
            plo *= lo;
            phi *= hi;
            pl *= level;
            out.delta_t(j - 1, k) = phi - plo;
            out.phi_tilde(j - 1, k) = pl;
        }
    }
    return out;
}

// Displacement restricted to [0, tau]. An off-grid tau becomes an extra
// breakpoint carrying the level of the segment it falls in; past the last
// tenor the last level is held.
inline Displacement truncate_displacement(const Displacement& d, double tau) {
    require(tau > 0.0, "tau must be positive");
    Displacement out;
    for (std::size_t k = 0; k < d.size(); ++k) {
        const double end = d.tenors[k];
        out.tenors.push_back(std::min(end, tau));
        if (k > 0) out.shifts.push_back(d.level(k));
        if (end >= tau) return out;
    }
    out.tenors.push_back(tau);
    out.shifts.push_back(d.level(d.size() - 1));
    return out;
}

}  // namespace edgepp
