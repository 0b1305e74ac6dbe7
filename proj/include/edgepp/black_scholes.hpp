#pragma once

#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdint>
#include <string>

#include "edgepp/error.hpp"

namespace edgepp {

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline double bs_price(double spot, double strike, double tau, double rate, double vol, bool is_call) {
    require(spot > 0.0 && strike > 0.0 && tau > 0.0, "spot, strike and tau must be positive");
    require(vol >= 0.0, "vol must be non-negative");
    const double df = std::exp(-rate * tau);
    if (vol == 0.0) return is_call ? std::max(spot - strike * df, 0.0) : std::max(strike * df - spot, 0.0);
    const double sd = vol * std::sqrt(tau);
    const double d1 = (std::log(spot / strike) + rate * tau) / sd + 0.5 * sd;
    const double d2 = d1 - sd;
    if (is_call) return spot * norm_cdf(d1) - strike * df * norm_cdf(d2);
    return strike * df * norm_cdf(-d2) - spot * norm_cdf(-d1);
}

inline double bs_vega(double spot, double strike, double tau, double rate, double vol) {
    const double sd = vol * std::sqrt(tau);
    const double d1 = (std::log(spot / strike) + rate * tau) / sd + 0.5 * sd;
    return spot * std::sqrt(tau) * std::exp(-0.5 * d1 * d1) / std::sqrt(2.0 * M_PI);
}

struct IvBracket {
    double lo = 1e-6;
    double hi = 10.0;
};

// Black-Scholes implied volatility by TOMS 748 on a fixed bracket.
// Prices outside (intrinsic, upper bound) throw BoundViolation.
inline double implied_vol(double price, double spot, double strike, double tau, double rate, bool is_call,
                          IvBracket bracket = {}) {
    require(spot > 0.0 && strike > 0.0 && tau > 0.0, "spot, strike and tau must be positive");
    if (!std::isfinite(price)) throw BoundViolation("price is not finite");
    const double df = std::exp(-rate * tau);
    const double intrinsic = is_call ? std::max(spot - strike * df, 0.0) : std::max(strike * df - spot, 0.0);
    const double upper = is_call ? spot : strike * df;
    if (price <= intrinsic) throw BoundViolation("price at or below intrinsic value");
    if (price >= upper) throw BoundViolation("price at or above the no-arbitrage upper bound");

    auto f = [&](double v) { return bs_price(spot, strike, tau, rate, v, is_call) - price; };
    const double flo = f(bracket.lo), fhi = f(bracket.hi);
    if (flo > 0.0) throw BoundViolation("implied vol below the lower end of the bracket");
    if (fhi < 0.0) throw BoundViolation("implied vol above the upper end of the bracket");
    if (flo == 0.0) return bracket.lo;
    if (fhi == 0.0) return bracket.hi;

    std::uintmax_t iters = 200;
    const auto root = boost::math::tools::toms748_solve(f, bracket.lo, bracket.hi, flo, fhi,
                                                        boost::math::tools::eps_tolerance<double>(50), iters);
    return 0.5 * (root.first + root.second);
}

}  // namespace edgepp
