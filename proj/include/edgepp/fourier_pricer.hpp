#pragma once

#include <cmath>
#include <complex>
#include <concepts>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "edgepp/black_scholes.hpp"
#include "edgepp/error.hpp"

namespace edgepp {

using cplx = std::complex<double>;

// Standardized CF of one tenor: psi(u) = E[exp(i u Z)] with
// Z = (X_tau - X_0 - (r - s^2/2) tau) / (s sqrt(tau)), s = reference_vol().
template <class C>
concept TenorCf = requires(const C& c, cplx u) {
    { c(u) } -> std::convertible_to<cplx>;
    { c.reference_vol() } -> std::convertible_to<double>;
};

// Optional vectorized evaluation, used when building a slice.
template <class C>
concept BatchCf = requires(const C& c, const cplx* u, std::size_t n, cplx* out) { c.evaluate(u, n, out); };

template <class M>
concept CfModel = requires(const M& m, double tau) {
    { m.tenor_cf(tau) } -> TenorCf;
};

struct PricingRequest {
    double spot = 100.0;
    double strike = 100.0;
    double tau = 1.0 / 12.0;
    double rate = 0.0;
    bool is_call = true;

    void validate() const {
        require(spot > 0.0 && strike > 0.0 && tau > 0.0, "spot, strike and tau must be positive");
        require(std::isfinite(rate), "rate must be finite");
    }
};

struct QuadratureConfig {
    int node_count = 10000;
    std::optional<double> u_max;  // empty: adaptive
    double u_min = 1e-8;
    double u_cap = 2000.0;
    double tail_tol = 1e-12;

    void validate() const {
        require(node_count >= 100, "node_count must be at least 100");
        if (u_max) require(*u_max > 0.0, "u_max must be positive");
    }
};

// Trapezoid nodes and CF values for one tenor, shared by every strike at
// that tenor. The integrands are even in u, so the half-weighted node at 0
// (evaluated at u_min) keeps the rule spectrally accurate.
struct FourierSlice {
    double tau = 0.0;
    double sigma_ref = 0.0;
    double h = 0.0;
    std::vector<double> u;
    std::vector<cplx> psi;        // psi(u_j)
    std::vector<cplx> psi_share;  // psi(u_j - i s sqrt(tau)) / psi(-i s sqrt(tau))
    // trapezoid weight * value / u_j, split into parts for the strike loop
    std::vector<double> share_re, share_im, spot_re, spot_im;

    void finalize() {
        const std::size_t n = u.size();
        share_re.resize(n), share_im.resize(n), spot_re.resize(n), spot_im.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double w = (j == 0 || j + 1 == n ? 0.5 : 1.0) / u[j];
            share_re[j] = w * psi_share[j].real();
            share_im[j] = w * psi_share[j].imag();
            spot_re[j] = w * psi[j].real();
            spot_im[j] = w * psi[j].imag();
        }
    }
};

template <TenorCf Cf>
double adaptive_u_max(const Cf& cf, double tau, const QuadratureConfig& q) {
    const double shift = cf.reference_vol() * std::sqrt(tau);
    const cplx norm = cf(cplx(0.0, -shift));
    auto small = [&](double U) {
        const double a = std::abs(cf(cplx(U, -shift)) / norm) / U;
        const double b = std::abs(cf(cplx(U, 0.0))) / U;
        return a < q.tail_tol && b < q.tail_tol;
    };
    for (double U = 0.5; U < q.u_cap; U += 0.5)
        if (small(U) && small(1.5 * U) && small(2.0 * U)) return U;
    return q.u_cap;
}

template <TenorCf Cf>
FourierSlice build_slice(const Cf& cf, double tau, const QuadratureConfig& q = {}) {
    q.validate();
    require(tau > 0.0, "tau must be positive");
    FourierSlice s;
    s.tau = tau;
    s.sigma_ref = cf.reference_vol();
    require(s.sigma_ref > 0.0, "reference volatility must be positive");
    const double shift = s.sigma_ref * std::sqrt(tau);
    const cplx norm = cf(cplx(0.0, -shift));
    if (!(std::abs(norm) >= 1e-12) || !std::isfinite(norm.real()))
        throw NumericalError("degenerate CF normalization |psi(-i s sqrt(tau))| < 1e-12");

    const double U = q.u_max ? *q.u_max : adaptive_u_max(cf, tau, q);
    const int n = q.node_count;
    s.h = U / (n - 1);
    s.u.resize(n);
    s.psi.resize(n);
    s.psi_share.resize(n);
    for (int j = 0; j < n; ++j) s.u[j] = j == 0 ? q.u_min : j * s.h;
    if constexpr (BatchCf<Cf>) {
        std::vector<cplx> args(2 * n), vals(2 * n);
        for (int j = 0; j < n; ++j) {
            args[j] = cplx(s.u[j], 0.0);
            args[n + j] = cplx(s.u[j], -shift);
        }
        cf.evaluate(args.data(), args.size(), vals.data());
        for (int j = 0; j < n; ++j) {
            s.psi[j] = vals[j];
            s.psi_share[j] = vals[n + j] / norm;
        }
    } else {
        for (int j = 0; j < n; ++j) {
            s.psi[j] = cf(cplx(s.u[j], 0.0));
            s.psi_share[j] = cf(cplx(s.u[j], -shift)) / norm;
        }
    }
    for (int j = 0; j < n; ++j)
        if (!std::isfinite(s.psi[j].real()) || !std::isfinite(s.psi[j].imag()) ||
            !std::isfinite(s.psi_share[j].real()) || !std::isfinite(s.psi_share[j].imag()))
            throw NumericalError("non-finite CF value at u = " + std::to_string(s.u[j]));
    s.finalize();
    return s;
}

struct PriceDetail {
    double price = 0.0;
    double raw = 0.0;  // before flooring/capping
    bool floored = false;
    bool capped = false;
};

// Exercise probabilities P(X_tau > log K) under the share and spot measures.
inline std::pair<double, double> exercise_probabilities(const FourierSlice& s, double spot, double strike,
                                                        double rate) {
    const double sd = s.sigma_ref * std::sqrt(s.tau);
    const double d2 = (std::log(spot / strike) + (rate - 0.5 * s.sigma_ref * s.sigma_ref) * s.tau) / sd;
    const std::size_t n = s.u.size();
    // Re[e^{i u d2} z / (i u)] = Im[e^{i u d2} z] / u; node j >= 1 sits at j h.
    const double c0 = std::cos(s.u[0] * d2), s0 = std::sin(s.u[0] * d2);
    double i1 = c0 * s.share_im[0] + s0 * s.share_re[0];
    double i2 = c0 * s.spot_im[0] + s0 * s.spot_re[0];

    // four interleaved phasor recurrences, re-anchored every 256 nodes
    constexpr std::size_t lanes = 4, block = 256;
    double a1[lanes] = {}, a2[lanes] = {};
    const double sr = std::cos(lanes * s.h * d2), si = std::sin(lanes * s.h * d2);
    for (std::size_t base = 1; base < n; base += block) {
        const std::size_t end = std::min(base + block, n);
        double cr[lanes], ci[lanes];
        for (std::size_t l = 0; l < lanes; ++l) {
            const double theta = static_cast<double>(base + l) * s.h * d2;
            cr[l] = std::cos(theta);
            ci[l] = std::sin(theta);
        }
        std::size_t j = base;
        for (; j + lanes <= end; j += lanes) {
            for (std::size_t l = 0; l < lanes; ++l) {
                a1[l] += cr[l] * s.share_im[j + l] + ci[l] * s.share_re[j + l];
                a2[l] += cr[l] * s.spot_im[j + l] + ci[l] * s.spot_re[j + l];
                const double nr = cr[l] * sr - ci[l] * si;
                ci[l] = cr[l] * si + ci[l] * sr;
                cr[l] = nr;
            }
        }
        for (; j < end; ++j) {
            const double theta = static_cast<double>(j) * s.h * d2;
            const double c = std::cos(theta), sn = std::sin(theta);
            i1 += c * s.share_im[j] + sn * s.share_re[j];
            i2 += c * s.spot_im[j] + sn * s.spot_re[j];
        }
    }
    for (std::size_t l = 0; l < lanes; ++l) {
        i1 += a1[l];
        i2 += a2[l];
    }
    return {0.5 + s.h * i1 / M_PI, 0.5 + s.h * i2 / M_PI};
}

inline PriceDetail call_from_slice(const FourierSlice& s, double spot, double strike, double rate) {
    const auto [p1, p2] = exercise_probabilities(s, spot, strike, rate);
    const double df = std::exp(-rate * s.tau);
    PriceDetail out;
    out.raw = spot * p1 - strike * df * p2;
    const double intrinsic = std::max(spot - strike * df, 0.0);
    if (out.raw < intrinsic - 1e-4 * spot)
        throw NumericalError("call price far below intrinsic value; check the Fourier quadrature");
    out.price = out.raw;
    if (out.price < intrinsic) {
        out.price = intrinsic;
        out.floored = true;
    }
    if (out.price > spot) {
        out.price = spot;
        out.capped = true;
    }
    return out;
}

enum class PutRoute { parity, direct };

inline PriceDetail put_from_slice(const FourierSlice& s, double spot, double strike, double rate,
                                  PutRoute route = PutRoute::parity) {
    const double df = std::exp(-rate * s.tau);
    const double intrinsic = std::max(strike * df - spot, 0.0);
    PriceDetail out;
    if (route == PutRoute::parity) {
        const PriceDetail c = call_from_slice(s, spot, strike, rate);
        out.raw = c.raw - spot + strike * df;
        out.price = c.price - spot + strike * df;
    } else {
        const auto [p1, p2] = exercise_probabilities(s, spot, strike, rate);
        out.raw = strike * df * (1.0 - p2) - spot * (1.0 - p1);
        out.price = out.raw;
    }
    if (out.price < intrinsic) {
        out.price = intrinsic;
        out.floored = true;
    }
    if (out.price > strike * df) {
        out.price = strike * df;
        out.capped = true;
    }
    return out;
}

template <TenorCf Cf>
double call_price(const PricingRequest& req, const Cf& cf, const QuadratureConfig& q = {}) {
    req.validate();
    return call_from_slice(build_slice(cf, req.tau, q), req.spot, req.strike, req.rate).price;
}

template <TenorCf Cf>
double put_price(const PricingRequest& req, const Cf& cf, const QuadratureConfig& q = {}) {
    req.validate();
    return put_from_slice(build_slice(cf, req.tau, q), req.spot, req.strike, req.rate).price;
}

template <TenorCf Cf>
double option_price(const PricingRequest& req, const Cf& cf, const QuadratureConfig& q = {}) {
    return req.is_call ? call_price(req, cf, q) : put_price(req, cf, q);
}

struct Contract {
    double strike = 100.0;
    double tau = 1.0 / 365.0;
    bool is_call = true;
};

struct ContractResult {
    double price = 0.0;
    double iv = 0.0;
    bool floored = false;
    std::optional<std::string> error;
};

// Prices a list of contracts; one CF slice per distinct tenor. Failures are
// recorded per contract.
template <CfModel Model>
std::vector<ContractResult> price_surface(const std::vector<Contract>& grid, const Model& model, double spot,
                                          double rate = 0.0, const QuadratureConfig& q = {}) {
    require(!grid.empty(), "surface grid is empty");
    std::map<double, std::optional<FourierSlice>> slices;
    std::map<double, std::string> slice_errors;
    for (const auto& c : grid) {
        if (slices.count(c.tau)) continue;
        try {
            slices[c.tau] = build_slice(model.tenor_cf(c.tau), c.tau, q);
        } catch (const std::exception& e) {
            slices[c.tau] = std::nullopt;
            slice_errors[c.tau] = e.what();
        }
    }
    std::vector<ContractResult> out;
    out.reserve(grid.size());
    for (const auto& c : grid) {
        ContractResult r;
        const auto& slice = slices[c.tau];
        if (!slice) {
            r.error = slice_errors[c.tau];
            out.push_back(r);
            continue;
        }
        try {
            const PriceDetail d = c.is_call ? call_from_slice(*slice, spot, c.strike, rate)
                                            : put_from_slice(*slice, spot, c.strike, rate);
            r.price = d.price;
            r.floored = d.floored;
            r.iv = implied_vol(d.price, spot, c.strike, c.tau, rate, c.is_call);
        } catch (const std::exception& e) {
            r.error = e.what();
        }
        out.push_back(r);
    }
    return out;
}

}  // namespace edgepp
