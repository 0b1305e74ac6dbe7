#include <gtest/gtest.h>

#include "edgepp/calibration.hpp"

using namespace edgepp;

namespace {

std::vector<double> short_tenors(int n) {
    std::vector<double> t;
    for (int k = 0; k < n; ++k) t.push_back((5.5 / 24.0 + k) / 365.0);
    return t;
}

Surface synthetic_surface(const AnyModel& model, const std::vector<double>& tenors, int strikes = 12) {
    std::vector<double> mg;
    for (int i = 0; i < strikes; ++i) mg.push_back(-4.0 + 7.0 * i / (strikes - 1));
    std::vector<std::vector<double>> ks;
    for (double t : tenors) ks.push_back(moneyness_strikes(100.0, 0.15, t, mg));
    return filter_surface(synthetic_quotes(model, 100.0, tenors, ks, 0.01)).surface;
}

}  // namespace

TEST(Rmse, NestedAverageExamples) {
    // one tenor, errors of one vol point each
    EXPECT_NEAR(rmse_of_errors({{0.01, -0.01, 0.01}}), 1.0, 1e-12);
    // tenor means 1 and 4 (vol points squared): sqrt(2.5)
    EXPECT_NEAR(rmse_of_errors({{0.01}, {0.02, -0.02}}), 1.5811, 1e-4);
    EXPECT_THROW(rmse_of_errors({}), DomainError);
    EXPECT_THROW(rmse_of_errors({{}}), DomainError);
}

TEST(Rmse, BidAskFraction) {
    Surface s;
    s.spot = 100.0;
    TenorSlice slice;
    slice.tenor = 0.01;
    slice.forward = 100.0;
    slice.atm_vol = 0.2;
    for (double k : {98.0, 100.0, 102.0}) {
        OptionQuote q;
        q.strike = k;
        q.tenor = 0.01;
        q.is_call = k >= 100.0;
        const double p = bs_price(100, k, 0.01, 0.0, 0.2, q.is_call);
        q.bid = 0.99 * p;
        q.ask = 1.01 * p;
        q.mid_iv = 0.2;
        q.moneyness = log_moneyness(k, 100.0, 0.2, 0.01);
        slice.quotes.push_back(q);
    }
    s.slices.push_back(slice);
    EdgeworthParams p;
    p.sigma0 = 0.2;
    EXPECT_DOUBLE_EQ(bid_ask_fraction(s, EdgeworthModel{p, std::nullopt}), 1.0);
    EXPECT_NEAR(rmse(s, EdgeworthModel{p, std::nullopt}), 0.0, 1e-6);
    p.sigma0 = 0.3;
    EXPECT_DOUBLE_EQ(bid_ask_fraction(s, EdgeworthModel{p, std::nullopt}), 0.0);
    EXPECT_NEAR(rmse(s, EdgeworthModel{p, std::nullopt}), 10.0, 1e-6);

    // half the quotes inside the spread
    s.slices[0].quotes.pop_back();
    p.sigma0 = 0.2;
    s.slices[0].quotes[0].bid *= 1.05;
    s.slices[0].quotes[0].ask *= 1.05;
    EXPECT_DOUBLE_EQ(bid_ask_fraction(s, EdgeworthModel{p, std::nullopt}), 0.5);
}

TEST(Calibrate, EmptySurfaceRejected) {
    EXPECT_THROW(calibrate(Surface{}, "edgeworth"), DomainError);
    Surface s;
    s.slices.push_back(TenorSlice{0.01, 100.0, 0.2, {}});
    EXPECT_THROW(calibrate(s, "edgeworth"), DomainError);
}

TEST(Calibrate, UnknownModelListsRegistry) {
    const auto s = synthetic_surface(EdgeworthModel{EdgeworthParams{}, std::nullopt}, short_tenors(2), 6);
    try {
        calibrate(s, "heston_merton_3f");
        FAIL() << "expected DomainError";
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("rough_heston_merton_pp"), std::string::npos);
    }
}

TEST(Registry, ParameterCountLedger) {
    const auto t = short_tenors(6);
    const std::size_t n = t.size();
    EXPECT_EQ(make_model_spec("edgeworth_pp", t).parameter_count(), 7 + n);
    EXPECT_EQ(make_model_spec("rough_heston_pp", t).parameter_count(), 3 + n);
    EXPECT_EQ(make_model_spec("heston_merton_2f", t).parameter_count(), 17u);
    EXPECT_EQ(make_model_spec("heston_merton_2f_pp", t).parameter_count(), 22u);
    EXPECT_EQ(make_model_spec("rough_heston_merton_pp", t).parameter_count(), 12u);
    EXPECT_EQ(make_model_spec("heston_merton_1f_pp", t).parameter_count(), 13u);
    EXPECT_EQ(make_model_spec("heston_merton_1f", t).parameter_count(), 8u);
    EXPECT_EQ(make_model_spec("edgeworth", t).parameter_count(), 8u);
    EXPECT_EQ(make_model_spec("bs_pp", t).parameter_count(), n);
}

TEST(Registry, JsonRoundTripAndDefaultsBuild) {
    const auto t = short_tenors(4);
    for (const auto& id : model_ids()) {
        const auto spec = make_model_spec(id, t);
        auto x = spec.defaults();
        EXPECT_NO_THROW(spec.build(x)) << id;
        const auto [back, y] = model_from_json(spec.to_json(x));
        EXPECT_EQ(back.id, id);
        EXPECT_EQ(y, x) << id;
    }
}

TEST(Calibrate, SmallRoundTripDeterministicAndConsistent) {
    const auto tenors = short_tenors(3);
    EdgeworthParams truth;
    truth.sigma0 = 0.15;
    truth.beta_tilde0 = 0.8;
    truth.rho0 = -0.6;
    truth.eta0 = 0.5;
    truth.lambda0 = 0.0;
    truth.mu_j = 0.0;
    truth.sigma_j = 0.0;
    const AnyModel model = EdgeworthModel{truth, std::nullopt};
    const auto s = synthetic_surface(model, tenors);
    EXPECT_NEAR(rmse(s, model), 0.0, 1e-6);

    CalibrationConfig cfg;
    cfg.optimizer.max_evals = 1500;
    cfg.optimizer.restarts = 1;
    const auto a = calibrate(s, "edgeworth", std::nullopt, std::nullopt, cfg);
    const auto b = calibrate(s, "edgeworth", std::nullopt, std::nullopt, cfg);
    EXPECT_EQ(a.params, b.params);
    EXPECT_EQ(a.rmse, b.rmse);
    EXPECT_LT(a.rmse, 0.05);
    EXPECT_NEAR(a.params[0], 0.15, 0.05 * 0.15);

    // reported RMSE is the RMSE of the returned parameters
    EXPECT_DOUBLE_EQ(a.rmse, rmse(s, a.spec.build(a.params)));
    // the best-so-far trace never increases
    for (std::size_t i = 1; i < a.trace.size(); ++i) EXPECT_LE(a.trace[i].best, a.trace[i - 1].best);
    for (std::size_t i = 0; i < a.params.size(); ++i) {
        EXPECT_GE(a.params[i], a.spec.parameters()[i].lower);
        EXPECT_LE(a.params[i], a.spec.parameters()[i].upper);
    }
}

TEST(Calibrate, BsppSeedIsExactFit) {
    const auto tenors = short_tenors(4);
    const auto spec = make_model_spec("bs_pp", tenors);
    const std::vector<double> x{0.15, 0.02, -0.01, 0.03};
    const auto s = synthetic_surface(spec.build(x), tenors, 8);
    CalibrationConfig cfg;
    cfg.optimizer.max_evals = 200;
    const auto r = calibrate(s, "bs_pp", std::nullopt, std::nullopt, cfg);
    EXPECT_LT(r.rmse, 1e-4);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(r.params[i], x[i], 1e-5);
}

TEST(Calibrate, JsonReportHasBucketGrid) {
    CalibrationResult r;
    r.spec = make_model_spec("edgeworth");
    r.params = r.spec.defaults();
    r.bucket_rmse[{0, MoneynessBucket::ATM}] = 0.3;
    const auto j = to_json(r, 6);
    ASSERT_EQ(j.at("bucket_rmse").size(), 5u);
    EXPECT_EQ(j.at("bucket_rmse").at("ATM").size(), 6u);
    EXPECT_DOUBLE_EQ(j.at("bucket_rmse").at("ATM")[0].get<double>(), 0.3);
    EXPECT_TRUE(j.at("bucket_rmse").at("DOTMP")[0].is_null());
}
