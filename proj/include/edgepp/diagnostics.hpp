#pragma once

#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include "edgepp/black_scholes.hpp"
#include "edgepp/edgeworth_cf.hpp"
#include "edgepp/fourier_pricer.hpp"
#include "edgepp/mc_oracle.hpp"
#include "edgepp/model_registry.hpp"

namespace edgepp {

struct SmileExpansion {
    double theta3 = 0.0;
    double theta4 = 0.0;
    double iv_level = 0.0;
    double iv_skew = 0.0;
    double iv_convexity = 0.0;

    // I(x) to second order in raw log-moneyness x.
    double implied_vol(double x) const { return iv_level + iv_skew * x + 0.5 * iv_convexity * x * x; }
};

inline SmileExpansion smile_expansion(const EdgeworthParams& p) {
    require(p.sigma0 > 0.0, "sigma0 must be positive");
    const double s = p.sigma0;
    const double b2 = p.beta_tilde0 * p.beta_tilde0;
    SmileExpansion e;
    e.theta3 = 3.0 * p.beta_tilde0 * p.rho0 / s;
    e.theta4 = 4.0 * (p.eta0 / s + b2 / (s * s) * (1.0 + 2.0 * p.rho0 * p.rho0));
    e.iv_level = s;
    e.iv_skew = e.theta3 / 6.0;
    e.iv_convexity = e.theta4 / (12.0 * s) - e.theta3 * e.theta3 / (6.0 * s);
    return e;
}

// Leading-order cumulants of X^c_tau - X^c_0.
inline Cumulants leading_cumulants(const EdgeworthParams& p, double tau) {
    const auto e = smile_expansion(p);
    const double s = p.sigma0;
    return {-0.5 * s * s * tau, s * s * tau, s * s * s * e.theta3 * tau * tau, s * s * s * s * e.theta4 * tau * tau * tau};
}

// Small-time smile of one-factor Heston (dv = ... + zeta sqrt(v) dB, d<B,W> = rho dt),
// written directly in (v0, zeta, rho).
struct AffineSmallTimeSmile {
    double level = 0.0;
    double skew = 0.0;
    double convexity = 0.0;
};

inline AffineSmallTimeSmile heston_small_time_smile(double v0, double zeta, double rho) {
    require(v0 > 0.0, "v0 must be positive");
    const double s = std::sqrt(v0);
    return {s, rho * zeta / (4.0 * s), (2.0 - 5.0 * rho * rho) * zeta * zeta / (24.0 * s * s * s)};
}

// sigma_t = sqrt(v_t): vol-of-vol zeta/2, same leverage, no eta term.
inline EdgeworthParams heston_as_edgeworth(double v0, double zeta, double rho) {
    EdgeworthParams p;
    p.sigma0 = std::sqrt(v0);
    p.beta_tilde0 = 0.5 * zeta;
    p.rho0 = rho;
    p.eta0 = 0.0;
    p.alpha_prime0 = 0.0;
    p.lambda0 = 0.0;
    p.mu_j = 0.0;
    p.sigma_j = 0.0;
    return p;
}

struct SmileCheck {
    double tau = 0.0;
    double level = 0.0;
    double skew = 0.0;
    double convexity = 0.0;
    double level_error = 0.0;  // relative
    double skew_error = 0.0;
    double convexity_error = 0.0;
};

inline double relative_error(double value, double target) {
    return target == 0.0 ? std::abs(value) : std::abs(value - target) / std::abs(target);
}

// Central differences of the priced smile at x = 0 with x-step 0.01 sigma0 sqrt(tau).
inline std::vector<SmileCheck> verify_smile_against_pricer(const EdgeworthParams& p, const std::vector<double>& taus,
                                                           double spot = 100.0, const QuadratureConfig& q = {}) {
    p.validate();
    require(p.lambda0 == 0.0, "smile verification needs lambda0 = 0");
    const auto target = smile_expansion(p);
    const EdgeworthModel model{p, std::nullopt};
    std::vector<SmileCheck> out;
    for (double tau : taus) {
        require(tau > 0.0 && tau <= 1.0 / 52.0, "smile verification tenors must lie in (0, 1/52]");
        const auto slice = build_slice(model.tenor_cf(tau), tau, q);
        const double dx = 0.01 * p.sigma0 * std::sqrt(tau);
        double iv[3];
        for (int k = 0; k < 3; ++k) {
            const double strike = spot * std::exp((k - 1) * dx);
            const double price = call_from_slice(slice, spot, strike, 0.0).price;
            iv[k] = implied_vol(price, spot, strike, tau, 0.0, true);
        }
        SmileCheck c;
        c.tau = tau;
        c.level = iv[1];
        c.skew = (iv[2] - iv[0]) / (2.0 * dx);
        c.convexity = (iv[2] - 2.0 * iv[1] + iv[0]) / (dx * dx);
        c.level_error = relative_error(c.level, target.iv_level);
        c.skew_error = relative_error(c.skew, target.iv_skew);
        c.convexity_error = relative_error(c.convexity, target.iv_convexity);
        out.push_back(c);
    }
    return out;
}

struct TimingStat {
    double mean = 0.0;
    double half_width = 0.0;  // 1.96 * sd of the mean; 0 for a single trial
};

inline TimingStat timing_stat(const std::vector<double>& xs) {
    TimingStat t;
    if (xs.empty()) return t;
    for (double x : xs) t.mean += x;
    t.mean /= xs.size();
    if (xs.size() < 2) return t;
    double ss = 0.0;
    for (double x : xs) ss += (x - t.mean) * (x - t.mean);
    t.half_width = 1.96 * std::sqrt(ss / (xs.size() - 1) / xs.size());
    return t;
}

struct TimingEntry {
    std::string model;
    TimingStat zero_dte;  // first tenor, 3 contracts
    TimingStat surface;   // all tenors
};

struct TimingReport {
    std::vector<TimingEntry> entries;
    int trials = 0;
};

inline const std::vector<double>& bench_tenors() {
    static const std::vector<double> t{5.5 / 24.0 / 365.0, (1 + 5.5 / 24.0) / 365.0, (2 + 5.5 / 24.0) / 365.0,
                                       (3 + 5.5 / 24.0) / 365.0, (4 + 5.5 / 24.0) / 365.0, (7 + 5.5 / 24.0) / 365.0};
    return t;
}

// ATM put, OTM put at m = -0.15 and OTM call at m = +0.15 per tenor, m
// standardized by the reference vol sigma.
inline std::vector<Contract> bench_fixture(double spot, double sigma, const std::vector<double>& tenors) {
    std::vector<Contract> grid;
    for (double tau : tenors) {
        const double sd = sigma * std::sqrt(tau);
        grid.push_back({spot * std::exp(-0.15 * sd), tau, false});
        grid.push_back({spot, tau, false});
        grid.push_back({spot * std::exp(0.15 * sd), tau, true});
    }
    return grid;
}

struct BenchModel {
    std::string name;
    AnyModel model;
};

inline TimingReport timing_bench(const std::vector<BenchModel>& models, int trials, double spot = 100.0,
                                 double sigma = 0.15, const QuadratureConfig& q = {},
                                 const std::vector<double>& tenors = bench_tenors()) {
    require(trials >= 1, "trials must be at least 1");
    require(!tenors.empty(), "bench needs at least one tenor");
    const auto full = bench_fixture(spot, sigma, tenors);
    const std::vector<Contract> first(full.begin(), full.begin() + 3);
    using clock = std::chrono::steady_clock;
    auto time_once = [&](const std::vector<Contract>& grid, const AnyModel& m) {
        const auto t0 = clock::now();
        const auto r = price_surface(grid, m, spot, 0.0, q);
        const auto t1 = clock::now();
        for (const auto& c : r)
            if (c.error) throw NumericalError("bench pricing failed: " + *c.error);
        return std::chrono::duration<double>(t1 - t0).count();
    };
    TimingReport rep;
    rep.trials = trials;
    for (const auto& bm : models) {
        std::vector<double> a, b;
        for (int t = 0; t < trials; ++t) {
            a.push_back(time_once(first, bm.model));
            b.push_back(time_once(full, bm.model));
        }
        rep.entries.push_back({bm.name, timing_stat(a), timing_stat(b)});
    }
    return rep;
}

}  // namespace edgepp
