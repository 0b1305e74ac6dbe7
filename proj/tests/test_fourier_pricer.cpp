#include <gtest/gtest.h>

#include "edgepp/black_scholes.hpp"
#include "edgepp/fourier_pricer.hpp"
#include "edgepp/model_registry.hpp"

using namespace edgepp;

namespace {

EdgeworthModel bs_model(double sigma) {
    EdgeworthParams p;
    p.sigma0 = sigma;
    return {p, std::nullopt};
}

EdgeworthModel rich_model() {
    EdgeworthParams p;
    p.sigma0 = 0.15;
    p.beta_tilde0 = 0.8;
    p.rho0 = -0.6;
    p.eta0 = 0.5;
    p.alpha_prime0 = 0.5;
    p.lambda0 = 30.0;
    p.mu_j = -0.005;
    p.sigma_j = 0.005;
    return {p, Displacement{{0.001, 0.003, 0.006}, {0.01, 0.02}}};
}

}  // namespace

TEST(BlackScholes, Reference) {
    // standard normal CDF at d1 = 0.1, d2 = -0.1
    EXPECT_NEAR(bs_price(100, 100, 1.0, 0.0, 0.2, true), 7.9655674554058, 1e-10);
    EXPECT_NEAR(bs_price(100, 90, 0.5, 0.03, 0.0, true), 100 - 90 * std::exp(-0.015), 1e-12);
    EXPECT_EQ(bs_price(100, 110, 0.5, 0.0, 0.0, true), 0.0);
    for (double k : {60.0, 95.0, 100.0, 130.0}) {
        const double c = bs_price(100, k, 0.3, 0.02, 0.25, true), p = bs_price(100, k, 0.3, 0.02, 0.25, false);
        EXPECT_NEAR(c - p - 100 + k * std::exp(-0.006), 0.0, 1e-12);
    }
}

TEST(ImpliedVol, RoundTripAndBounds) {
    for (double k : {70.0, 100.0, 125.0})
        for (bool call : {true, false}) {
            const double price = bs_price(100, k, 0.1, 0.0, 0.2, call);
            EXPECT_NEAR(implied_vol(price, 100, k, 0.1, 0.0, call), 0.2, 1e-8);
        }
    EXPECT_THROW(implied_vol(9.0, 100, 90, 0.1, 0.0, true), BoundViolation);
    EXPECT_THROW(implied_vol(100.5, 100, 90, 0.1, 0.0, true), BoundViolation);
}

TEST(FourierPricer, BlackScholesReductionAtm) {
    const PricingRequest req{100.0, 100.0, 1.0 / 12.0, 0.0, true};
    const auto cf = bs_model(0.2).tenor_cf(req.tau);
    // closed form 2.30297446780243 (40-digit evaluation)
    EXPECT_NEAR(call_price(req, cf), 2.30297446780243, 1e-8);
    EXPECT_NEAR(call_price(req, cf), bs_price(100, 100, req.tau, 0.0, 0.2, true), 1e-8);
}

TEST(FourierPricer, BlackScholesReductionWings) {
    const double tau = 1.0 / 12.0;
    const auto cf = bs_model(0.2).tenor_cf(tau);
    EXPECT_NEAR(call_price({100, 120, tau, 0.0, true}, cf), 0.00136803618734244, 1e-8);
    EXPECT_NEAR(put_price({100, 80, tau, 0.0, false}, cf), 6.65526875686572e-5, 1e-8);
    EXPECT_NEAR(call_price({100, 1e-6, tau, 0.0, true}, cf), 100.0, 1e-6 * 100);
    EXPECT_NEAR(put_price({100, 1e-6, tau, 0.0, false}, cf), 0.0, 1e-8 * 100);
}

TEST(FourierPricer, AtmPutEqualsCall) {
    const auto cf = rich_model().tenor_cf(0.003);
    EXPECT_NEAR(call_price({100, 100, 0.003, 0.0, true}, cf), put_price({100, 100, 0.003, 0.0, false}, cf), 1e-12);
}

TEST(FourierPricer, ParityRoutes) {
    const auto m = rich_model();
    const double tau = 0.006;
    const auto slice = build_slice(m.tenor_cf(tau), tau);
    for (double k : {97.0, 99.0, 100.0, 101.0, 103.0}) {
        const double c = call_from_slice(slice, 100, k, 0.01).price;
        const double p = put_from_slice(slice, 100, k, 0.01).price;
        EXPECT_LE(std::abs(c - p - 100 + k * std::exp(-0.01 * tau)), 1e-10 * 100);
        const double pd = put_from_slice(slice, 100, k, 0.01, PutRoute::direct).price;
        EXPECT_LE(std::abs(pd - p), 1e-9);
    }
}

TEST(FourierPricer, MonotoneConvexAndBounded) {
    const auto m = rich_model();
    for (double tau : {0.001, 0.003, 0.006}) {
        const auto slice = build_slice(m.tenor_cf(tau), tau);
        std::vector<double> ks, cs;
        for (double k = 90.0; k <= 110.0; k += 0.25) {
            ks.push_back(k);
            cs.push_back(call_from_slice(slice, 100, k, 0.0).price);
        }
        for (std::size_t i = 0; i < cs.size(); ++i) {
            EXPECT_GE(cs[i], std::max(100 - ks[i], 0.0));
            EXPECT_LE(cs[i], 100.0);
            if (i > 0) {
                EXPECT_LE(cs[i] - cs[i - 1], 1e-8 * 100);
            }
            if (i > 1) {
                EXPECT_GE(cs[i] - 2 * cs[i - 1] + cs[i - 2], -1e-7 * 100);
            }
        }
    }
}

TEST(FourierPricer, DegenerateNormalizationRejected) {
    struct ZeroCf {
        cplx operator()(cplx u) const { return u == cplx(0.0) ? cplx(1.0) : cplx(0.0); }
        double reference_vol() const { return 0.2; }
    };
    EXPECT_THROW(call_price({100, 100, 0.01, 0.0, true}, ZeroCf{}), NumericalError);
}

TEST(FourierPricer, ConfigValidation) {
    QuadratureConfig q;
    q.node_count = 50;
    EXPECT_THROW(call_price({100, 100, 0.01, 0.0, true}, bs_model(0.2).tenor_cf(0.01), q), DomainError);
    EXPECT_THROW(call_price({100, -1, 0.01, 0.0, true}, bs_model(0.2).tenor_cf(0.01)), DomainError);
}

TEST(PriceSurface, CacheAndPurity) {
    const auto m = rich_model();
    const std::vector<Contract> grid{{100, 0.003, true}, {101, 0.003, true}, {100, 0.003, true}, {99, 0.006, false}};
    const auto r = price_surface(grid, m, 100.0);
    ASSERT_EQ(r.size(), 4u);
    EXPECT_EQ(r[0].price, r[2].price);
    EXPECT_EQ(r[0].iv, r[2].iv);
    EXPECT_NEAR(r[1].price, call_price({100, 101, 0.003, 0.0, true}, m.tenor_cf(0.003)), 1e-14);
    for (const auto& c : r) EXPECT_FALSE(c.error);
}

TEST(PriceSurface, ErrorsAreCollected) {
    const std::vector<Contract> grid{{100, 0.01, true}, {1e-9, 0.01, true}};
    const auto r = price_surface(grid, bs_model(0.2), 100.0);
    EXPECT_FALSE(r[0].error);
    EXPECT_TRUE(r[1].error.has_value());  // deep ITM: price equals intrinsic, IV undefined
}

TEST(PriceSurface, EighteenContractsAllFamilies) {
    std::vector<double> tenors;
    for (int k = 0; k < 6; ++k) tenors.push_back((5.5 / 24.0 + k) / 365.0);
    std::vector<Contract> grid;
    for (double t : tenors) {
        const double sd = 0.15 * std::sqrt(t);
        grid.push_back({100 * std::exp(-0.15 * sd), t, false});
        grid.push_back({100, t, false});
        grid.push_back({100 * std::exp(0.15 * sd), t, true});
    }
    for (const char* id : {"edgeworth_pp", "heston_merton_2f", "rough_heston_pp"}) {
        const auto spec = make_model_spec(id, tenors);
        const auto r = price_surface(grid, spec.build(spec.defaults()), 100.0);
        for (const auto& c : r) EXPECT_FALSE(c.error) << id << ": " << c.error.value_or("");
    }
}
