#include <gtest/gtest.h>

#include <random>

#include "edgepp/bspp.hpp"

using namespace edgepp;

TEST(BsppAtmVol, FlatWithoutShifts) {
    const Displacement d{{0.01, 0.02, 0.05}, {0.0, 0.0}};
    for (double t : {0.005, 0.01, 0.015, 0.02, 0.05}) EXPECT_NEAR(bspp_atm_vol(t, 0.2, d), 0.2, 1e-15);
}

TEST(BsppAtmVol, HandValue) {
    // sqrt(0.04 * (0.5 + 2.25 * 0.5) / 1.0)
    EXPECT_NEAR(bspp_atm_vol(1.0, 0.2, {{0.5, 1.0}, {0.1}}), std::sqrt(0.04 * 1.625), 1e-15);
    EXPECT_NEAR(bspp_atm_vol(1.0, 0.2, {{0.5, 1.0}, {0.1}}), 0.2550, 1e-4);
}

TEST(BsppAtmVol, BeforeFirstTenor) {
    EXPECT_EQ(bspp_atm_vol(0.2, 0.17, {{0.5, 1.0}, {0.1}}), 0.17);
}

TEST(BsppBootstrap, FlatStructure) {
    const auto fit = calibrate_shift_from_atm({{0.01, 0.02, 0.03}, {0.2, 0.2, 0.2}});
    EXPECT_DOUBLE_EQ(fit.sigma0, 0.2);
    for (double a : fit.displacement.shifts) EXPECT_NEAR(a, 0.0, 1e-15);
}

TEST(BsppBootstrap, CalendarArbitrageNamesPair) {
    try {
        calibrate_shift_from_atm({{0.01, 0.02, 0.03}, {0.2, 0.2, 0.1}});
        FAIL() << "expected CalendarArbitrage";
    } catch (const CalendarArbitrage& e) {
        EXPECT_EQ(e.first_tenor, 1u);
        EXPECT_EQ(e.second_tenor, 2u);
    }
}

TEST(BsppBootstrap, RoundTrip) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const double s0 = 0.05 + u(rng);
        const int n = 1 + static_cast<int>(u(rng) * 8);
        Displacement d;
        double t = 0.0;
        for (int k = 0; k < n; ++k) {
            t += (0.1 + u(rng)) / 365.0;
            d.tenors.push_back(t);
            if (k > 0) d.shifts.push_back(s0 * (-0.9 + 2.9 * u(rng)));
        }
        AtmTermStructure ts{d.tenors, {}};
        for (double tau : d.tenors) ts.atm_vols.push_back(bspp_atm_vol(tau, s0, d));
        const auto fit = calibrate_shift_from_atm(ts);
        EXPECT_NEAR(fit.sigma0, s0, 1e-10);
        for (std::size_t k = 0; k < d.shifts.size(); ++k) EXPECT_NEAR(fit.displacement.shifts[k], d.shifts[k], 1e-10);
        for (std::size_t k = 0; k < d.tenors.size(); ++k)
            EXPECT_NEAR(bspp_atm_vol(d.tenors[k], fit.sigma0, fit.displacement), ts.atm_vols[k], 1e-12);
    }
}

TEST(BsppBootstrap, SucceedsIffTotalVarianceNonDecreasing) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.05, 0.4);
    for (int trial = 0; trial < 500; ++trial) {
        AtmTermStructure ts;
        for (int k = 0; k < 4; ++k) {
            ts.tenors.push_back((k + 1) / 365.0);
            ts.atm_vols.push_back(u(rng));
        }
        bool monotone = true;
        for (int k = 0; k + 1 < 4; ++k)
            monotone &= ts.atm_vols[k + 1] * ts.atm_vols[k + 1] * ts.tenors[k + 1] >=
                        ts.atm_vols[k] * ts.atm_vols[k] * ts.tenors[k];
        if (monotone)
            EXPECT_NO_THROW(calibrate_shift_from_atm(ts));
        else
            EXPECT_THROW(calibrate_shift_from_atm(ts), CalendarArbitrage);
    }
}

TEST(BsppCf, MatchesPiecewiseExpansion) {
    EdgeworthParams p;
    p.sigma0 = 0.2;
    const Displacement d{{0.01, 0.02, 0.04}, {0.05, -0.03}};
    for (double tau : d.tenors)
        for (double u : {0.5, 3.0, 12.0}) {
            // de-standardize: X = s sqrt(tau) Z - w / 2, w the total variance
            const double s = p.sigma0 * std::sqrt(tau);
            const double w = std::pow(bspp_atm_vol(tau, p.sigma0, d), 2) * tau;
            const cplx viaz = psi_c_piecewise(u * s, tau, p, d) * std::exp(cplx(0.0, -0.5 * u * w));
            EXPECT_LE(std::abs(viaz - bspp_log_return_cf(u, tau, p.sigma0, d)), 1e-12);
        }
}

TEST(BsppBootstrap, RejectsMalformedInput) {
    EXPECT_THROW(calibrate_shift_from_atm({{}, {}}), DomainError);
    EXPECT_THROW(calibrate_shift_from_atm({{0.02, 0.01}, {0.2, 0.2}}), DomainError);
    EXPECT_THROW(calibrate_shift_from_atm({{0.01}, {-0.2}}), DomainError);
}
