#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <string>

#include "edgepp/error.hpp"

namespace edgepp {

struct DopriConfig {
    double rtol = 1e-10;
    double atol = 1e-13;
    int max_steps = 100000;
    double blowup = 1e12;
};

// Dormand-Prince 5(4) for y' = f(t, y) on [0, T], complex state of size N.
// Returns y(T). Throws NumericalError naming the time reached when the
// solution explodes or the step size collapses.
template <std::size_t N, class F>
std::array<std::complex<double>, N> dopri_solve(F&& f, std::array<std::complex<double>, N> y, double T,
                                                const DopriConfig& cfg = {}) {
    using V = std::array<std::complex<double>, N>;
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;

    auto axpy = [](const V& base, std::initializer_list<std::pair<double, const V*>> terms, double h) {
        V out = base;
        for (std::size_t i = 0; i < N; ++i) {
            std::complex<double> acc{0.0, 0.0};
            for (const auto& [c, k] : terms) acc += c * (*k)[i];
            out[i] += h * acc;
        }
        return out;
    };

    double t = 0.0;
    double h = T / 16.0;
    V k1 = f(t, y);
    for (int step = 0; step < cfg.max_steps; ++step) {
        if (t >= T) return y;
        h = std::min(h, T - t);
        const V k2 = f(t + c2 * h, axpy(y, {{a21, &k1}}, h));
        const V k3 = f(t + c3 * h, axpy(y, {{a31, &k1}, {a32, &k2}}, h));
        const V k4 = f(t + c4 * h, axpy(y, {{a41, &k1}, {a42, &k2}, {a43, &k3}}, h));
        const V k5 = f(t + c5 * h, axpy(y, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}, h));
        const V k6 = f(t + h, axpy(y, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}, h));
        const V y5 = axpy(y, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}}, h);
        const V k7 = f(t + h, y5);

        double err = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const std::complex<double> e =
                h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double scale = cfg.atol + cfg.rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
            err = std::max(err, std::abs(e) / scale);
        }
        if (!std::isfinite(err)) err = 1e10;

        if (err <= 1.0) {
            t += h;
            y = y5;
            k1 = k7;
            for (const auto& v : y)
                if (!std::isfinite(v.real()) || !std::isfinite(v.imag()) || std::abs(v) > cfg.blowup)
                    throw NumericalError("Riccati solution explodes at t = " + std::to_string(t));
        }
        const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        h *= factor;
        if (h < 1e-14 * std::max(T, 1e-300))
            throw NumericalError("Riccati step size collapsed at t = " + std::to_string(t));
    }
    throw NumericalError("Riccati integration exceeded the step budget at t = " + std::to_string(t));
}

}  // namespace edgepp
