#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <boost/random/normal_distribution.hpp>

#include "edgepp/edgeworth_params.hpp"
#include "edgepp/heston_merton.hpp"
#include "edgepp/model_registry.hpp"
#include "edgepp/rough_heston.hpp"

namespace edgepp {

struct SimConfig {
    std::size_t paths = 100000;
    int steps_per_tenor = 64;
    std::uint64_t rng_seed = 42;
    bool antithetic = false;
    unsigned threads = 1;
    double max_negative_fraction = 0.1;  // of simulated steps, square-root factors only

    void validate() const {
        require(paths >= 1, "paths must be at least 1");
        require(steps_per_tenor >= 1, "steps must be at least 1");
    }
};

namespace detail {

// Independent stream for chunk `index` of a run seeded with `seed`.
inline std::mt19937_64 chunk_rng(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), 0x9e3779b9u};
    return std::mt19937_64(seq);
}

// Runs body(first, last, rng) over fixed chunks of [0, n). Chunk boundaries
// and seeds depend only on n and seed, so results do not depend on threads.
template <class Body>
void for_chunks(std::size_t n, std::uint64_t seed, unsigned threads, Body&& body) {
    constexpr std::size_t chunk = 1 << 14;
    const std::size_t chunks = (n + chunk - 1) / chunk;
    auto run = [&](std::size_t c) {
        auto rng = chunk_rng(seed, c);
        body(c * chunk, std::min(n, (c + 1) * chunk), rng);
    };
    threads = std::max(1u, threads);
    if (threads == 1 || chunks == 1) {
        for (std::size_t c = 0; c < chunks; ++c) run(c);
        return;
    }
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            for (std::size_t c = t; c < chunks; c += threads) run(c);
        });
    for (auto& th : pool) th.join();
}

// Uniform grid on [0, tau] with every breakpoint as a node.
inline std::vector<double> time_grid(double tau, int steps, const std::vector<double>& breakpoints) {
    std::vector<double> edges{0.0};
    for (double b : breakpoints)
        if (b > 0.0 && b < tau) edges.push_back(b);
    edges.push_back(tau);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    std::vector<double> grid{0.0};
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
        const double len = edges[p + 1] - edges[p];
        const int cells = std::max(1, static_cast<int>(std::lround(steps * len / tau)));
        for (int c = 1; c <= cells; ++c) grid.push_back(c == cells ? edges[p + 1] : edges[p] + len * c / cells);
    }
    return grid;
}

}  // namespace detail

enum class DriftMode {
    frozen,      // mu_t = mu_0 + delta_0 W_t, the sub-model behind the CF expansion
    martingale,  // mu_t = -sigma_t^2/2 - lambda * E[e^x - 1], so E[e^{X_tau - X_0}] = 1
};

struct EdgeworthSimOptions {
    DriftMode drift = DriftMode::frozen;
    bool eta_dynamics = true;  // beta_t = beta_0 + eta_0 W_t
};

struct EdgeworthSamples {
    std::vector<double> z_continuous;  // standardized continuous return Z^c
    std::vector<double> log_return;    // X_tau - X_0 including jumps
    std::size_t negative_vol_paths = 0;
};

// Euler scheme for the frozen-coefficient sub-model
//   sigma_t = sigma0 + phi(t) + alpha0 t + int beta dW + beta0' W'_t
// with alpha0 = delta0 = alpha_prime0. Within each step the return picks up
// the second-order terms of int (sigma_s - sigma_i) dW_s.
inline EdgeworthSamples simulate_edgeworth_submodel(const EdgeworthParams& p, const std::optional<Displacement>& d,
                                                    double tau, const SimConfig& cfg,
                                                    const EdgeworthSimOptions& opt = {}) {
    p.validate();
    cfg.validate();
    require(tau > 0.0, "tau must be positive");
    if (d) d->validate(p.sigma0);

    const auto grid = detail::time_grid(tau, cfg.steps_per_tenor, d ? d->tenors : std::vector<double>{});
    const std::size_t steps = grid.size() - 1;
    std::vector<double> phi(grid.size(), 0.0);
    if (d)
        for (std::size_t i = 0; i < grid.size(); ++i) phi[i] = d->phi(grid[i]);

    const double s0 = p.sigma0;
    const double mu0 = -0.5 * s0 * s0;
    const double alpha = p.alpha_prime0, delta = p.alpha_prime0;
    const double b0 = p.beta0(), bp = p.beta0_prime();
    const double eta = opt.eta_dynamics ? p.eta0 : 0.0;
    const double jump_mean = std::expm1(p.mu_j + 0.5 * p.sigma_j * p.sigma_j);

    EdgeworthSamples out;
    out.z_continuous.resize(cfg.paths);
    out.log_return.resize(cfg.paths);
    std::vector<std::size_t> negatives((cfg.paths + (1 << 14) - 1) / (1 << 14), 0);

    detail::for_chunks(cfg.paths, cfg.rng_seed, cfg.threads, [&](std::size_t first, std::size_t last, auto& rng) {
        boost::random::normal_distribution<double> normal;
        std::vector<double> dw(steps), dwp(steps), area(steps);
        std::size_t neg = 0;
        for (std::size_t path = first; path < last; ++path) {
            const bool mirror = cfg.antithetic && (path % 2 == 1);
            if (!mirror) {
                for (std::size_t i = 0; i < steps; ++i) {
                    const double sq = std::sqrt(grid[i + 1] - grid[i]);
                    dw[i] = normal(rng) * sq;
                    dwp[i] = normal(rng) * sq;
                    area[i] = bp != 0.0 ? normal(rng) * sq * sq / std::sqrt(12.0) : 0.0;
                }
            } else {
                for (std::size_t i = 0; i < steps; ++i) {
                    dw[i] = -dw[i];
                    dwp[i] = -dwp[i];
                    area[i] = -area[i];
                }
            }
            double w = 0.0, sigma = s0, beta = b0, xc = 0.0, jumps = 0.0;
            bool went_negative = false;
            for (std::size_t i = 0; i < steps; ++i) {
                const double dt = grid[i + 1] - grid[i];
                double mu;
                if (opt.drift == DriftMode::frozen)
                    mu = mu0 + delta * w;
                else
                    mu = -0.5 * sigma * sigma - p.lambda0 * jump_mean;
                // int (sigma_s - sigma_i) dW over the step: W-W part exact, W'-W part
                // as its symmetric piece plus a moment-matched Levy area
                xc += mu * dt + sigma * dw[i] + beta * 0.5 * (dw[i] * dw[i] - dt) +
                      bp * (0.5 * dw[i] * dwp[i] + area[i]);
                if (p.lambda0 > 0.0) {
                    std::poisson_distribution<int> count(p.lambda0 * dt);
                    const int n = count(rng);
                    if (n > 0) jumps += n * p.mu_j + std::sqrt(static_cast<double>(n)) * p.sigma_j * normal(rng);
                }
                sigma += (phi[i + 1] - phi[i]) + alpha * dt + beta * dw[i] + bp * dwp[i] +
                         eta * 0.5 * (dw[i] * dw[i] - dt);
                beta += eta * dw[i];
                w += dw[i];
                if (sigma <= 0.0) went_negative = true;
            }
            if (went_negative) ++neg;
            out.z_continuous[path] = (xc - mu0 * tau) / (s0 * std::sqrt(tau));
            out.log_return[path] = xc + jumps;
        }
        negatives[first >> 14] = neg;
    });
    for (auto n : negatives) out.negative_vol_paths += n;
    return out;
}

struct EmpiricalCf {
    std::vector<double> u;
    std::vector<std::complex<double>> value;
    std::vector<double> std_error;  // standard error of |estimate - truth|, per u
};

// (1/N) sum exp(i u z_j) with standard errors from the sample variances of
// cos and sin.
inline EmpiricalCf empirical_cf(const std::vector<double>& samples, const std::vector<double>& u_grid) {
    require(!samples.empty(), "empirical CF needs at least one sample");
    EmpiricalCf out{u_grid, {}, {}};
    const double n = static_cast<double>(samples.size());
    for (double u : u_grid) {
        double sc = 0, ss = 0, sc2 = 0, ss2 = 0;
        for (double z : samples) {
            const double c = std::cos(u * z), s = std::sin(u * z);
            sc += c;
            ss += s;
            sc2 += c * c;
            ss2 += s * s;
        }
        const double mc = sc / n, ms = ss / n;
        out.value.emplace_back(mc, ms);
        if (samples.size() > 1) {
            const double vc = std::max(0.0, (sc2 / n - mc * mc)) * n / (n - 1);
            const double vs = std::max(0.0, (ss2 / n - ms * ms)) * n / (n - 1);
            out.std_error.push_back(std::sqrt((vc + vs) / n));
        } else {
            out.std_error.push_back(0.0);
        }
    }
    return out;
}

struct Cumulants {
    double mean = 0.0;
    double k2 = 0.0;
    double k3 = 0.0;
    double k4 = 0.0;
};

// Sample cumulants from central moments (not bias corrected).
inline Cumulants sample_cumulants(const std::vector<double>& x) {
    require(x.size() >= 2, "cumulants need at least two samples");
    const double n = static_cast<double>(x.size());
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double m2 = 0, m3 = 0, m4 = 0;
    for (double v : x) {
        const double d = v - mean, d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    return {mean, m2, m3, m4 - 3.0 * m2 * m2};
}

struct BenchmarkSamples {
    std::vector<double> log_return;
    std::size_t negative_variance_paths = 0;
    std::size_t negative_variance_steps = 0;
};

namespace detail {

// Fraction of simulated steps that ended with negative variance.
inline void check_negative_fraction(std::size_t negative_steps, std::size_t total_steps, double limit) {
    if (static_cast<double>(negative_steps) > limit * static_cast<double>(total_steps))
        throw NumericalError("negative variance on " + std::to_string(negative_steps) + " of " +
                             std::to_string(total_steps) + " steps; increase the step count");
}

}  // namespace detail

// Full-truncation Euler for the 1F/2F Heston Merton model. Jump counts per
// step are Poisson with the intensity frozen at the start of the step.
inline BenchmarkSamples simulate_heston_merton(const HestonMertonParams& p, double tau, const SimConfig& cfg) {
    p.validate();
    cfg.validate();
    require(tau > 0.0, "tau must be positive");
    const bool two = p.factor_count == 2;
    const auto grid = detail::time_grid(tau, cfg.steps_per_tenor, p.shifts ? p.shifts->tenors : std::vector<double>{});
    const std::size_t steps = grid.size() - 1;
    std::vector<double> shift(steps, 0.0);
    if (p.shifts)
        for (std::size_t i = 0; i < steps; ++i) shift[i] = p.shifts->phi(0.5 * (grid[i] + grid[i + 1]));
    const double kbar = p.jump_compensator();
    const bool jumps = p.c0 > 0.0 || p.c1 > 0.0 || (two && p.c2 > 0.0);
    const double r1 = std::sqrt(std::max(0.0, 1.0 - p.rho1 * p.rho1));
    const double r2 = std::sqrt(std::max(0.0, 1.0 - p.rho2 * p.rho2));

    BenchmarkSamples out;
    out.log_return.resize(cfg.paths);
    const std::size_t chunks = (cfg.paths + (1 << 14) - 1) / (1 << 14);
    std::vector<std::size_t> negatives(chunks, 0), negative_steps(chunks, 0);

    detail::for_chunks(cfg.paths, cfg.rng_seed, cfg.threads, [&](std::size_t first, std::size_t last, auto& rng) {
        boost::random::normal_distribution<double> normal;
        std::size_t bad_steps = 0;
        std::exponential_distribution<double> expo(p.m_v > 0.0 ? 1.0 / p.m_v : 1.0);
        std::size_t neg = 0;
        for (std::size_t path = first; path < last; ++path) {
            double v1 = p.v1_0, v2 = two ? p.v2_0 : 0.0, x = 0.0;
            bool negative = false;
            for (std::size_t i = 0; i < steps; ++i) {
                const double dt = grid[i + 1] - grid[i], sq = std::sqrt(dt);
                const double a = std::max(v1, 0.0), b = std::max(v2, 0.0);
                const double var = std::max(a + b + shift[i], 0.0);
                const double z1 = normal(rng), z2 = normal(rng);
                const double y1 = normal(rng), y2 = two ? normal(rng) : 0.0;
                // price shocks: z1 from factor 1, z2 from factor 2, both correlated with the variance shocks
                // a positive shift is an independent Gaussian variance; a negative one scales factor 1 down
                double dx1 = std::sqrt(a) * (p.rho1 * y1 + r1 * z1);
                if (shift[i] > 0.0)
                    dx1 += std::sqrt(shift[i]) * normal(rng);
                else if (shift[i] < 0.0)
                    dx1 *= a > 0.0 ? std::sqrt(std::max(a + shift[i], 0.0) / a) : 0.0;
                const double dx2 = two ? std::sqrt(b) * (p.rho2 * y2 + r2 * z2) : 0.0;
                const double c = p.c0 + p.c1 * a + (two ? p.c2 * b : 0.0);
                x += (-0.5 * var - kbar * c) * dt + (dx1 + dx2) * sq;
                v1 += p.kappa1 * (p.theta1 - a) * dt + p.zeta1 * std::sqrt(a) * y1 * sq;
                if (two) v2 += p.kappa2 * (p.theta2 - b) * dt + p.zeta2 * std::sqrt(b) * y2 * sq;
                if (jumps && c > 0.0) {
                    std::poisson_distribution<int> count(c * dt);
                    for (int n = count(rng); n > 0; --n) {
                        const double zv = p.m_v > 0.0 ? expo(rng) : 0.0;
                        x += p.mu_x + p.rho_jump * zv + p.sigma_x * normal(rng);
                        v1 += zv;
                    }
                }
                if (v1 < 0.0 || v2 < 0.0) {
                    negative = true;
                    ++bad_steps;
                }
            }
            if (negative) ++neg;
            out.log_return[path] = x;
        }
        negatives[first >> 14] = neg;
        negative_steps[first >> 14] = bad_steps;
    });
    for (std::size_t c = 0; c < chunks; ++c) {
        out.negative_variance_paths += negatives[c];
        out.negative_variance_steps += negative_steps[c];
    }
    detail::check_negative_fraction(out.negative_variance_steps, cfg.paths * steps, cfg.max_negative_fraction);
    return out;
}

// Hybrid scheme (kappa = 1) for the rough Heston Volterra equation
//   V_t = xi0(t) + nu / Gamma(alpha) int (t-s)^{alpha-1} sqrt(V_s) dB_s,
// with the nearest kernel cell integrated exactly and the rest evaluated at
// the optimal points b_k. Negative V is truncated at zero.
inline BenchmarkSamples simulate_rough_heston(const RoughHestonParams& p, double tau, const SimConfig& cfg) {
    p.validate();
    cfg.validate();
    require(tau > 0.0, "tau must be positive");
    const std::size_t n = static_cast<std::size_t>(cfg.steps_per_tenor);
    const double dt = tau / static_cast<double>(n), sq = std::sqrt(dt);
    const double alpha = p.hurst + 0.5;
    const double scale = p.nu / std::tgamma(alpha);
    std::vector<double> kernel(n + 1, 0.0);  // kernel[k] = g(b_k dt) for k >= 2
    for (std::size_t k = 2; k <= n; ++k) {
        const double kk = static_cast<double>(k);
        const double b = alpha == 1.0 ? kk : std::pow((std::pow(kk, alpha) - std::pow(kk - 1.0, alpha)) / alpha,
                                                      1.0 / (alpha - 1.0));
        kernel[k] = std::pow(b * dt, alpha - 1.0);
    }
    // (dB, int_{cell} (t_i - s)^{alpha-1} dB) covariance
    const double c11 = dt, c12 = std::pow(dt, alpha) / alpha, c22 = std::pow(dt, 2.0 * alpha - 1.0) / (2.0 * alpha - 1.0);
    const double l21 = c12 / std::sqrt(c11), l22 = std::sqrt(std::max(0.0, c22 - l21 * l21));
    std::vector<double> xi(n + 1);
    for (std::size_t i = 0; i <= n; ++i) xi[i] = p.xi0.at(i * dt);
    const double rho_perp = std::sqrt(std::max(0.0, 1.0 - p.rho * p.rho));
    const double kbar = std::expm1(p.mu_j + 0.5 * p.sigma_j * p.sigma_j);

    BenchmarkSamples out;
    out.log_return.resize(cfg.paths);
    const std::size_t chunks = (cfg.paths + (1 << 14) - 1) / (1 << 14);
    std::vector<std::size_t> negatives(chunks, 0), negative_steps(chunks, 0);

    detail::for_chunks(cfg.paths, cfg.rng_seed, cfg.threads, [&](std::size_t first, std::size_t last, auto& rng) {
        boost::random::normal_distribution<double> normal;
        std::size_t bad_steps = 0;
        std::vector<double> vol_db(n);  // sqrt(V_j) dB_{j+1}
        std::size_t neg = 0;
        for (std::size_t path = first; path < last; ++path) {
            double v = xi[0], x = 0.0;
            bool negative = false;
            for (std::size_t i = 0; i < n; ++i) {
                const double vp = std::max(v, 0.0), s = std::sqrt(vp);
                const double g1 = normal(rng), g2 = normal(rng), g3 = normal(rng);
                const double db = g1 * sq;
                const double wtilde = l21 * g1 + l22 * g2;
                x += -0.5 * vp * dt + s * (p.rho * db + rho_perp * g3 * sq);
                vol_db[i] = s * db;
                // V at t_{i+1}
                double acc = s * wtilde;
                for (std::size_t k = 2; k <= i + 1; ++k) acc += kernel[k] * vol_db[i + 1 - k];
                v = xi[i + 1] + scale * acc;
                if (v < 0.0) {
                    negative = true;
                    ++bad_steps;
                }
            }
            if (p.lambda > 0.0) {
                std::poisson_distribution<int> count(p.lambda * tau);
                const int k = count(rng);
                x += -p.lambda * kbar * tau + k * p.mu_j + (k > 0 ? std::sqrt(double(k)) * p.sigma_j * normal(rng) : 0.0);
            }
            if (negative) ++neg;
            out.log_return[path] = x;
        }
        negatives[first >> 14] = neg;
        negative_steps[first >> 14] = bad_steps;
    });
    for (std::size_t c = 0; c < chunks; ++c) {
        out.negative_variance_paths += negatives[c];
        out.negative_variance_steps += negative_steps[c];
    }
    // reported only: near H = 0.1 the fraction does not shrink with the step count
    return out;
}

// Terminal log-returns X_tau - X_0 of any registry model. Edgeworth models
// run the sub-model with the martingale drift.
inline BenchmarkSamples simulate_model(const AnyModel& model, double tau, const SimConfig& cfg) {
    return std::visit(
        [&](const auto& m) -> BenchmarkSamples {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, EdgeworthModel>) {
                auto s = simulate_edgeworth_submodel(m.params, m.displacement, tau, cfg, {DriftMode::martingale, true});
                return {std::move(s.log_return), s.negative_vol_paths, 0};
            } else if constexpr (std::is_same_v<M, HestonMertonModel>) {
                return simulate_heston_merton(m.params, tau, cfg);
            } else {
                return simulate_rough_heston(m.params, tau, cfg);
            }
        },
        model);
}

struct MartingaleCheck {
    double mean = 0.0;       // sample mean of e^{X_tau - X_0}
    double std_error = 0.0;
    bool passes(double k = 3.0) const { return std::abs(mean - 1.0) <= k * std_error; }
};

inline MartingaleCheck martingale_check(const std::vector<double>& log_returns) {
    require(log_returns.size() >= 2, "martingale check needs at least two samples");
    const double n = static_cast<double>(log_returns.size());
    double s = 0, s2 = 0;
    for (double x : log_returns) {
        const double e = std::exp(x);
        s += e;
        s2 += e * e;
    }
    const double mean = s / n;
    const double var = std::max(0.0, s2 / n - mean * mean) * n / (n - 1);
    return {mean, std::sqrt(var / n)};
}

// Count header (uint64) followed by the samples as little-endian doubles.
inline void write_samples(const std::string& path, const std::vector<double>& samples) {
    static_assert(std::endian::native == std::endian::little, "samples.bin writer assumes a little-endian host");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DomainError("cannot open " + path + " for writing");
    const std::uint64_t count = samples.size();
    f.write(reinterpret_cast<const char*>(&count), sizeof count);
    f.write(reinterpret_cast<const char*>(samples.data()), static_cast<std::streamsize>(samples.size() * sizeof(double)));
    if (!f) throw DomainError("failed writing " + path);
}

inline std::vector<double> read_samples(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DomainError("cannot open " + path);
    std::uint64_t count = 0;
    f.read(reinterpret_cast<char*>(&count), sizeof count);
    std::vector<double> out(count);
    f.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(count * sizeof(double)));
    if (!f) throw DomainError("truncated samples file " + path);
    return out;
}

}  // namespace edgepp
