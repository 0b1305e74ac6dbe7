#include <gtest/gtest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>

#include "edgepp/edgeworth_cf.hpp"
#include "edgepp/mc_oracle.hpp"
#include "edgepp/model_registry.hpp"

using namespace edgepp;

namespace {

std::vector<double> u_grid() { return {0.5, 1.0, 2.0, 3.0}; }

// two-sample Kolmogorov-Smirnov statistic
double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
    }
    return d;
}

}  // namespace

TEST(EmpiricalCf, Trivial) {
    const auto one = empirical_cf({0.7}, {0.0, 2.0});
    EXPECT_EQ(one.value[0], cplx(1.0, 0.0));
    EXPECT_NEAR(std::abs(one.value[1] - std::exp(cplx(0.0, 1.4))), 0.0, 1e-15);
    EXPECT_THROW(empirical_cf({}, {1.0}), DomainError);
}

TEST(Submodel, GaussianWhenCoefficientsVanish) {
    EdgeworthParams p;
    p.sigma0 = 0.2;
    SimConfig cfg;
    cfg.paths = 200000;
    cfg.steps_per_tenor = 8;
    const auto s = simulate_edgeworth_submodel(p, std::nullopt, 0.02, cfg);
    const auto e = empirical_cf(s.z_continuous, u_grid());
    EXPECT_EQ(empirical_cf(s.z_continuous, {0.0}).value[0], cplx(1.0, 0.0));
    for (std::size_t k = 0; k < e.u.size(); ++k)
        EXPECT_LE(std::abs(e.value[k] - std::exp(-0.5 * e.u[k] * e.u[k])), 3.0 * e.std_error[k]);
    EXPECT_EQ(s.negative_vol_paths, 0u);
}

TEST(Submodel, DeterministicShiftVariance) {
    EdgeworthParams p;
    p.sigma0 = 0.2;
    const Displacement d{{0.01, 0.02}, {0.1}};
    SimConfig cfg;
    cfg.paths = 200000;
    cfg.steps_per_tenor = 4;
    const auto s = simulate_edgeworth_submodel(p, d, 0.02, cfg);
    // <Phi2, dT1> / tau = (1 * 0.01 + 2.25 * 0.01) / 0.02
    const auto c = sample_cumulants(s.z_continuous);
    EXPECT_NEAR(c.k2, 1.625, 3.0 * 1.625 * std::sqrt(2.0 / cfg.paths));
    const auto e = empirical_cf(s.z_continuous, u_grid());
    for (std::size_t k = 0; k < e.u.size(); ++k)
        EXPECT_LE(std::abs(e.value[k] - psi_c_piecewise(e.u[k], 0.02, p, d)), 3.0 * e.std_error[k] + 1e-12);
}

TEST(Submodel, SeedDeterminismAndAntithetic) {
    EdgeworthParams p;
    p.sigma0 = 0.2;
    p.beta_tilde0 = 0.5;
    p.rho0 = -0.5;
    SimConfig cfg;
    cfg.paths = 40000;
    cfg.steps_per_tenor = 16;
    const auto a = simulate_edgeworth_submodel(p, std::nullopt, 0.01, cfg);
    const auto b = simulate_edgeworth_submodel(p, std::nullopt, 0.01, cfg);
    EXPECT_EQ(a.z_continuous, b.z_continuous);
    cfg.threads = 3;
    EXPECT_EQ(simulate_edgeworth_submodel(p, std::nullopt, 0.01, cfg).z_continuous, a.z_continuous);
    cfg.threads = 1;
    cfg.rng_seed = 43;
    EXPECT_NE(simulate_edgeworth_submodel(p, std::nullopt, 0.01, cfg).z_continuous, a.z_continuous);

    // Gaussian sub-model: antithetic pairs cancel up to rounding
    EdgeworthParams g;
    g.sigma0 = 0.2;
    cfg.antithetic = true;
    const auto anti = simulate_edgeworth_submodel(g, std::nullopt, 0.01, cfg);
    double mean = 0.0;
    for (double z : anti.z_continuous) mean += z;
    EXPECT_NEAR(mean / cfg.paths, 0.0, 1e-12);
    for (std::size_t i = 0; i + 1 < anti.z_continuous.size(); i += 2)
        EXPECT_NEAR(anti.z_continuous[i], -anti.z_continuous[i + 1], 1e-14);
}

TEST(Martingale, AllSimulableModels) {
    const auto tenors = std::vector<double>{2.0 / 365.0, 5.0 / 365.0, 9.0 / 365.0};
    SimConfig cfg;
    cfg.paths = 200000;
    cfg.steps_per_tenor = 32;
    for (const auto& id : model_ids()) {
        const auto spec = make_model_spec(id, tenors);
        const auto s = simulate_model(spec.build(spec.defaults()), tenors.back(), cfg);
        const auto m = martingale_check(s.log_return);
        EXPECT_TRUE(m.passes()) << id << ": mean " << m.mean << " se " << m.std_error;
    }
}

TEST(Martingale, EdgeworthWithJumps) {
    EdgeworthParams p;
    p.sigma0 = 0.15;
    p.beta_tilde0 = 0.8;
    p.rho0 = -0.6;
    p.lambda0 = 30.0;
    p.mu_j = -0.02;
    p.sigma_j = 0.03;
    SimConfig cfg;
    cfg.paths = 400000;
    cfg.steps_per_tenor = 32;
    const auto s = simulate_model(EdgeworthModel{p, std::nullopt}, 0.05, cfg);
    EXPECT_TRUE(martingale_check(s.log_return).passes());
}

TEST(Benchmarks, ZeroVolOfVolIsDeterministicVariance) {
    HestonMertonParams p;
    p.factor_count = 1;
    p.v1_0 = 0.05, p.kappa1 = 2.0, p.theta1 = 0.03, p.zeta1 = 0.0;
    SimConfig cfg;
    cfg.paths = 100000;
    cfg.steps_per_tenor = 64;
    const double tau = 0.1;
    const auto s = simulate_heston_merton(p, tau, cfg);
    const double iv = p.theta1 * tau + (p.v1_0 - p.theta1) * (1.0 - std::exp(-p.kappa1 * tau)) / p.kappa1;
    const auto c = sample_cumulants(s.log_return);
    EXPECT_NEAR(c.k2, iv, 3.0 * iv * std::sqrt(2.0 / cfg.paths) + 1e-5);
    EXPECT_NEAR(c.mean, -0.5 * iv, 3.0 * std::sqrt(iv / cfg.paths) + 1e-5);
}

TEST(Benchmarks, NegativeVarianceFractionGuard) {
    EXPECT_NO_THROW(detail::check_negative_fraction(10, 100, 0.1));
    EXPECT_THROW(detail::check_negative_fraction(11, 100, 0.1), NumericalError);
}

TEST(Benchmarks, RoughHalfHurstMatchesHestonLaw) {
    RoughHestonParams r;
    r.hurst = 0.5, r.nu = 0.2, r.rho = -0.7;
    r.xi0 = ForwardVariance::flat(0.04);
    HestonMertonParams h;
    h.factor_count = 1;
    h.v1_0 = 0.04, h.kappa1 = 0.0, h.theta1 = 0.0, h.zeta1 = 0.2, h.rho1 = -0.7;
    SimConfig cfg;
    cfg.paths = 100000;
    cfg.steps_per_tenor = 64;
    const auto a = simulate_rough_heston(r, 0.1, cfg);
    cfg.rng_seed = 1234;  // independent streams
    const auto b = simulate_heston_merton(h, 0.1, cfg);
    // KS critical value at p = 0.01 for two samples of size n: 1.628 sqrt(2/n)
    EXPECT_LT(ks_statistic(a.log_return, b.log_return), 1.628 * std::sqrt(2.0 / cfg.paths));
}

TEST(Samples, BinaryRoundTrip) {
    const auto path = (std::filesystem::temp_directory_path() / "edgepp_samples_test.bin").string();
    const std::vector<double> x{1.5, -2.25, 3e-300, 0.0};
    write_samples(path, x);
    EXPECT_EQ(std::filesystem::file_size(path), 8u + 4u * 8u);
    EXPECT_EQ(read_samples(path), x);
    std::remove(path.c_str());
}

TEST(Samples, CumulantsOfKnownSet) {
    const auto c = sample_cumulants({1.0, 2.0, 3.0, 4.0});
    EXPECT_DOUBLE_EQ(c.mean, 2.5);
    EXPECT_DOUBLE_EQ(c.k2, 1.25);
    EXPECT_DOUBLE_EQ(c.k3, 0.0);
    // m4 - 3 m2^2 = 2.5625 - 4.6875
    EXPECT_DOUBLE_EQ(c.k4, -2.125);
}
