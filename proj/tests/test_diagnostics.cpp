#include <gtest/gtest.h>

#include "edgepp/diagnostics.hpp"

using namespace edgepp;

namespace {

EdgeworthParams smile_params() {
    EdgeworthParams p;
    p.sigma0 = 0.2;
    p.beta_tilde0 = 0.4;
    p.rho0 = -0.7;
    p.eta0 = 0.1;
    return p;
}

}  // namespace

TEST(SmileExpansion, WorkedExample) {
    const auto e = smile_expansion(smile_params());
    EXPECT_NEAR(e.theta3, -4.2, 1e-14);
    EXPECT_NEAR(e.theta4, 33.68, 1e-12);
    EXPECT_NEAR(e.iv_skew, -0.7, 1e-14);
    EXPECT_DOUBLE_EQ(e.iv_level, 0.2);
    EXPECT_NEAR(e.iv_convexity, 33.68 / 2.4 - 4.2 * 4.2 / 1.2, 1e-12);
}

TEST(SmileExpansion, Identities) {
    auto p = smile_params();
    p.rho0 = 0.0;
    EXPECT_EQ(smile_expansion(p).iv_skew, 0.0);
    p.beta_tilde0 = 0.0;
    p.eta0 = 0.0;
    const auto flat = smile_expansion(p);
    for (double x : {-0.1, 0.0, 0.05}) EXPECT_EQ(flat.implied_vol(x), 0.2);
    p.sigma0 = 0.0;
    EXPECT_THROW(smile_expansion(p), DomainError);
}

TEST(SmileExpansion, HestonSpecializationMatchesAffineFormula) {
    for (double rho : {-0.9, -0.3, 0.0, 0.5})
        for (double zeta : {0.2, 0.6, 1.5}) {
            const auto affine = heston_small_time_smile(0.04, zeta, rho);
            const auto e = smile_expansion(heston_as_edgeworth(0.04, zeta, rho));
            EXPECT_DOUBLE_EQ(e.iv_level, affine.level);
            EXPECT_NEAR(e.iv_skew, affine.skew, 1e-15);
            EXPECT_NEAR(e.iv_convexity, affine.convexity, 1e-12);
        }
}

TEST(SmileVerification, BlackScholesLimitIsFlat) {
    EdgeworthParams p;
    p.sigma0 = 0.25;
    for (const auto& c : verify_smile_against_pricer(p, {1.0 / 52.0, 1.0 / 252.0})) {
        EXPECT_LE(std::abs(c.level - 0.25), 1e-6);
        EXPECT_LE(std::abs(c.skew), 1e-4);
    }
}

TEST(SmileVerification, LeverageSkewConverges) {
    auto p = smile_params();
    p.eta0 = 0.0;
    const auto c = verify_smile_against_pricer(p, {1.0 / 252.0, 1.0 / 1008.0});
    EXPECT_LE(c[0].skew_error, 0.1);
    EXPECT_LE(c[1].skew_error, 0.03);
    EXPECT_LT(c[1].skew_error, c[0].skew_error);
}

TEST(SmileVerification, AllThreeWithinThreePercentAtShortTenor) {
    const auto c = verify_smile_against_pricer(smile_params(), {1.0 / 52.0, 1.0 / 1008.0});
    EXPECT_LE(c[1].level_error, 0.03);
    EXPECT_LE(c[1].skew_error, 0.03);
    EXPECT_LE(c[1].convexity_error, 0.03);
    EXPECT_LT(c[1].convexity_error, c[0].convexity_error);
}

TEST(SmileVerification, Preconditions) {
    auto p = smile_params();
    EXPECT_THROW(verify_smile_against_pricer(p, {0.1}), DomainError);
    p.lambda0 = 5.0;
    EXPECT_THROW(verify_smile_against_pricer(p, {0.01}), DomainError);
}

TEST(Cumulants, MonteCarloMatchesLeadingOrder) {
    // frozen sub-model without eta; third cumulant is leading order in tau
    auto p = smile_params();
    p.eta0 = 0.0;
    const double tau = 1.0 / 252.0;
    SimConfig cfg;
    cfg.paths = 1000000;
    cfg.steps_per_tenor = 32;
    const auto s = simulate_edgeworth_submodel(p, std::nullopt, tau, cfg, {DriftMode::frozen, false});
    std::vector<double> x(s.z_continuous.size());
    const double scale = p.sigma0 * std::sqrt(tau), mu0 = -0.5 * p.sigma0 * p.sigma0;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = s.z_continuous[i] * scale + mu0 * tau;
    const auto mc = sample_cumulants(x);
    const auto lead = leading_cumulants(p, tau);
    EXPECT_NEAR(mc.k2 / lead.k2, 1.0, 0.02);
    EXPECT_NEAR(mc.k3 / lead.k3, 1.0, 0.2);
}

TEST(Timing, StatEdgeCases) {
    EXPECT_EQ(timing_stat({0.5}).half_width, 0.0);
    EXPECT_DOUBLE_EQ(timing_stat({0.5}).mean, 0.5);
    const auto t = timing_stat({1.0, 2.0, 3.0});
    EXPECT_DOUBLE_EQ(t.mean, 2.0);
    EXPECT_NEAR(t.half_width, 1.96 * 1.0 / std::sqrt(3.0), 1e-15);
}

TEST(Timing, FixtureAndReport) {
    const auto grid = bench_fixture(100.0, 0.15, bench_tenors());
    ASSERT_EQ(grid.size(), 18u);
    EXPECT_FALSE(grid[0].is_call);
    EXPECT_EQ(grid[1].strike, 100.0);
    EXPECT_TRUE(grid[2].is_call);
    EXPECT_NEAR(bench_tenors()[0] * 365.0 * 24.0, 5.5, 1e-12);

    EdgeworthParams p;
    const AnyModel m = EdgeworthModel{p, std::nullopt};
    const auto rep = timing_bench({{"a", m}, {"b", m}}, 5);
    ASSERT_EQ(rep.entries.size(), 2u);
    EXPECT_EQ(rep.trials, 5);
    for (const auto& e : rep.entries) {
        EXPECT_GT(e.surface.mean, 0.0);
        EXPECT_GE(e.surface.half_width, 0.0);
        EXPECT_GE(e.zero_dte.half_width, 0.0);
    }
    EXPECT_THROW(timing_bench({{"a", m}}, 0), DomainError);
}
