#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "edgepp/edgeworth_cf.hpp"

namespace edgepp {

struct ShiftQuadratureConfig {
    int nodes = 20000;
    // Points where phi may jump; they become grid nodes so piecewise
    // constants are integrated without splitting a cell.
    std::vector<double> breakpoints;
};

// Nested integrals of phi~ = 1 + phi/sigma0 on [0, tau] by composite
// trapezoid, with every inner integral accumulated as a running sum.
// phi is sampled at cell midpoints.
inline ShiftIntegrals quadrature_shift_integrals(double tau, double sigma0, const std::function<double(double)>& phi,
                                                 const ShiftQuadratureConfig& cfg = {}) {
    require(tau > 0.0, "tau must be positive");
    require(sigma0 > 0.0, "sigma0 must be positive");
    require(cfg.nodes >= 2, "quadrature needs at least two nodes");

    std::vector<double> edges{0.0};
    for (double b : cfg.breakpoints)
        if (b > 0.0 && b < tau) edges.push_back(b);
    edges.push_back(tau);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    std::vector<double> grid{0.0};
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
        const double len = edges[p + 1] - edges[p];
        const int cells = std::max(1, static_cast<int>(std::lround(cfg.nodes * len / tau)));
        for (int c = 1; c <= cells; ++c)
            grid.push_back(c == cells ? edges[p + 1] : edges[p] + len * c / cells);
    }

    ShiftIntegrals r;
    r.tau = tau;
    double f1 = 0, f2 = 0, g = 0, k = 0, b = 0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double s0 = grid[i], s1 = grid[i + 1], h = s1 - s0;
        const double sample = phi(0.5 * (s0 + s1));
        if (!std::isfinite(sample)) throw DomainError("displacement function returned a non-finite value");
        const double c = 1.0 + sample / sigma0;

        const double f1n = f1 + c * h;
        const double f2n = f2 + 0.5 * h * (f1 + f1n);
        const double gn = g + 0.5 * c * h * (f1 + f1n);
        const double kn = k + 0.5 * c * h * (s0 + s1);
        const double bn = b + 0.5 * c * h * (g + gn);

        r.sq += c * c * h;
        r.alpha += 0.5 * c * h * (s0 + s1);
        r.eta += 0.5 * h * (f2 + f2n);
        r.c1 += 0.5 * c * h * (k + kn);
        r.c2 += 0.5 * c * h * (b + bn);

        f1 = f1n;
        f2 = f2n;
        g = gn;
        k = kn;
        b = bn;
    }
    r.skew = g;
    r.delta = f2;
    r.triple = b;
    return r;
}

// General-shift expansion with every nested integral done numerically.
// Works for any bounded, piecewise-continuous phi with phi(0) = 0.
inline cplx psi_c_quadrature(cplx u, double tau, const EdgeworthParams& p, const std::function<double(double)>& phi,
                             const ShiftQuadratureConfig& cfg = {}) {
    p.validate();
    return general_shift_expansion(p, quadrature_shift_integrals(tau, p.sigma0, phi, cfg))(u);
}

inline ShiftQuadratureConfig breakpoints_of(const Displacement& d, int nodes = 20000) {
    return ShiftQuadratureConfig{nodes, d.tenors};
}

}  // namespace edgepp
