#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "edgepp/error.hpp"

namespace edgepp {

struct NelderMeadConfig {
    int max_evals = 20000;
    int restarts = 3;
    double initial_step = 0.05;  // in unit-box coordinates
    double xtol = 1e-7;
    double ftol = 1e-10;
    std::uint64_t seed = 42;
};

struct TracePoint {
    int evals;
    double best;
};

struct NelderMeadResult {
    std::vector<double> x;
    double fx = std::numeric_limits<double>::infinity();
    int evals = 0;
    bool converged = false;
    std::vector<TracePoint> trace;
};

// Bounded Nelder-Mead on the unit box [0,1]^n with dimension-adapted
// coefficients. Points are clamped into the box before every evaluation.
// After the first run, `restarts` more runs start from randomly perturbed
// copies of the incumbent; if a restart stalls, a uniform population around
// the incumbent seeds the next one.
inline NelderMeadResult nelder_mead_box(const std::function<double(const std::vector<double>&)>& f,
                                        std::vector<double> x0, const NelderMeadConfig& cfg = {}) {
    const std::size_t n = x0.size();
    require(n >= 1, "nothing to optimise");
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);

    const double nd = static_cast<double>(n);
    const double alpha = 1.0, gamma = 1.0 + 2.0 / nd, rho = 0.75 - 0.5 / nd, sigma = 1.0 - 1.0 / nd;

    NelderMeadResult res;
    auto clamp = [](std::vector<double> x) {
        for (auto& v : x) v = std::clamp(v, 0.0, 1.0);
        return x;
    };
    auto eval = [&](const std::vector<double>& x) {
        double v = f(x);
        if (!std::isfinite(v)) v = std::numeric_limits<double>::max();
        ++res.evals;
        if (v < res.fx) {
            res.fx = v;
            res.x = x;
            res.trace.push_back({res.evals, v});
        }
        return v;
    };

    auto run = [&](std::vector<double> start, double step) {
        std::vector<std::vector<double>> pts{clamp(start)};
        for (std::size_t i = 0; i < n; ++i) {
            auto p = pts[0];
            p[i] = p[i] + step <= 1.0 ? p[i] + step : p[i] - step;
            pts.push_back(clamp(p));
        }
        std::vector<double> fv;
        for (const auto& p : pts) {
            if (res.evals >= cfg.max_evals) return false;
            fv.push_back(eval(p));
        }
        std::vector<std::size_t> idx(n + 1);
        while (res.evals < cfg.max_evals) {
            std::iota(idx.begin(), idx.end(), 0);
            std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
            const std::size_t best = idx[0], worst = idx[n], second = idx[n - 1];

            double size = 0.0;
            for (std::size_t i = 0; i <= n; ++i)
                for (std::size_t d = 0; d < n; ++d) size = std::max(size, std::abs(pts[i][d] - pts[best][d]));
            if (size < cfg.xtol || std::abs(fv[worst] - fv[best]) <= cfg.ftol * (1.0 + std::abs(fv[best])))
                return true;

            std::vector<double> c(n, 0.0);
            for (std::size_t i = 0; i <= n; ++i)
                if (i != worst)
                    for (std::size_t d = 0; d < n; ++d) c[d] += pts[i][d] / nd;
            auto along = [&](double t) {
                std::vector<double> p(n);
                for (std::size_t d = 0; d < n; ++d) p[d] = c[d] + t * (pts[worst][d] - c[d]);
                return clamp(p);
            };

            const auto xr = along(-alpha);
            const double fr = eval(xr);
            if (fr < fv[best]) {
                const auto xe = along(-alpha * gamma);
                const double fe = eval(xe);
                if (fe < fr) pts[worst] = xe, fv[worst] = fe;
                else pts[worst] = xr, fv[worst] = fr;
                continue;
            }
            if (fr < fv[second]) {
                pts[worst] = xr, fv[worst] = fr;
                continue;
            }
            const bool outside = fr < fv[worst];
            const auto xc = along(outside ? -alpha * rho : rho);
            const double fc = eval(xc);
            if (fc < (outside ? fr : fv[worst])) {
                pts[worst] = xc, fv[worst] = fc;
                continue;
            }
            for (std::size_t i = 0; i <= n; ++i) {
                if (i == best) continue;
                for (std::size_t d = 0; d < n; ++d) pts[i][d] = pts[best][d] + sigma * (pts[i][d] - pts[best][d]);
                pts[i] = clamp(pts[i]);
                if (res.evals >= cfg.max_evals) return false;
                fv[i] = eval(pts[i]);
            }
        }
        return false;
    };

    res.converged = run(x0, cfg.initial_step);
    for (int r = 0; r < cfg.restarts && res.evals < cfg.max_evals; ++r) {
        const double before = res.fx;
        auto start = res.x;
        const double spread = cfg.initial_step / (r + 1);
        for (auto& v : start) v += spread * unif(rng);
        res.converged = run(clamp(start), cfg.initial_step / (r + 1));
        if (res.fx < before * (1.0 - 1e-9)) continue;

        // stalled: scatter a population around the incumbent
        auto anchor = res.x;
        const std::size_t pop = 4 * n;
        for (std::size_t k = 0; k < pop && res.evals < cfg.max_evals; ++k) {
            auto p = anchor;
            for (auto& v : p) v += 2.0 * spread * unif(rng);
            eval(clamp(p));
        }
    }
    return res;
}

}  // namespace edgepp
