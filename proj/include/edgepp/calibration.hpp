#pragma once

#include <chrono>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "edgepp/bspp.hpp"
#include "edgepp/fourier_pricer.hpp"
#include "edgepp/market_data.hpp"
#include "edgepp/model_registry.hpp"
#include "edgepp/nelder_mead.hpp"

namespace edgepp {

// Squared IV error charged to a contract the model cannot price or invert
// (equivalent to a 100 vol-point miss).
inline constexpr double kFailedContractPenalty = 1.0;

struct ModelQuote {
    double price = 0.0;
    double iv = 0.0;
    bool ok = false;
};

// Model prices and IVs for every quote, slice by slice, each slice priced
// against its implied forward.
inline std::vector<std::vector<ModelQuote>> model_quotes(const Surface& s, const AnyModel& model,
                                                         const QuadratureConfig& q = {}) {
    std::vector<std::vector<ModelQuote>> out;
    for (const auto& slice : s.slices) {
        std::vector<Contract> grid;
        for (const auto& quote : slice.quotes) grid.push_back({quote.strike, slice.tenor, quote.is_call});
        std::vector<ModelQuote> row(grid.size());
        if (!grid.empty()) {
            const double spot_eff = slice.forward * std::exp(-s.rate * slice.tenor);
            const auto res = price_surface(grid, model, spot_eff, s.rate, q);
            for (std::size_t i = 0; i < res.size(); ++i) row[i] = {res[i].price, res[i].iv, !res[i].error};
        }
        out.push_back(std::move(row));
    }
    return out;
}

inline void require_surface(const Surface& s) {
    require(!s.slices.empty(), "surface is empty");
    for (const auto& slice : s.slices) {
        require(!slice.quotes.empty(), "surface has an empty tenor bucket");
        for (const auto& q : slice.quotes)
            require(std::isfinite(q.mid_iv), "every quote needs a finite mid implied vol");
    }
}

// 100 * sqrt(mean over tenors of mean over strikes of squared IV error).
inline double rmse_from(const Surface& s, const std::vector<std::vector<ModelQuote>>& mq) {
    double total = 0.0;
    for (std::size_t k = 0; k < s.slices.size(); ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i < s.slices[k].quotes.size(); ++i) {
            const double e = mq[k][i].ok ? mq[k][i].iv - s.slices[k].quotes[i].mid_iv : 0.0;
            acc += mq[k][i].ok ? e * e : kFailedContractPenalty;
        }
        total += acc / static_cast<double>(s.slices[k].quotes.size());
    }
    return 100.0 * std::sqrt(total / static_cast<double>(s.slices.size()));
}

inline double rmse(const Surface& s, const AnyModel& model, const QuadratureConfig& q = {}) {
    require_surface(s);
    return rmse_from(s, model_quotes(s, model, q));
}

// Nested-average RMSE from raw IV errors grouped by tenor.
inline double rmse_of_errors(const std::vector<std::vector<double>>& errors) {
    require(!errors.empty(), "no tenors");
    double total = 0.0;
    for (const auto& row : errors) {
        require(!row.empty(), "empty tenor bucket");
        double acc = 0.0;
        for (double e : row) acc += e * e;
        total += acc / static_cast<double>(row.size());
    }
    return 100.0 * std::sqrt(total / static_cast<double>(errors.size()));
}

inline double bid_ask_fraction_from(const Surface& s, const std::vector<std::vector<ModelQuote>>& mq) {
    std::size_t hit = 0, n = 0;
    for (std::size_t k = 0; k < s.slices.size(); ++k)
        for (std::size_t i = 0; i < s.slices[k].quotes.size(); ++i, ++n) {
            const auto& q = s.slices[k].quotes[i];
            if (mq[k][i].ok && q.bid <= mq[k][i].price && mq[k][i].price <= q.ask) ++hit;
        }
    return n ? static_cast<double>(hit) / static_cast<double>(n) : 0.0;
}

inline double bid_ask_fraction(const Surface& s, const AnyModel& model, const QuadratureConfig& q = {}) {
    return bid_ask_fraction_from(s, model_quotes(s, model, q));
}

using BucketKey = std::pair<std::size_t, MoneynessBucket>;

inline std::map<BucketKey, double> bucket_rmse_from(const Surface& s, const std::vector<std::vector<ModelQuote>>& mq) {
    std::map<BucketKey, std::pair<double, std::size_t>> acc;
    for (std::size_t k = 0; k < s.slices.size(); ++k)
        for (std::size_t i = 0; i < s.slices[k].quotes.size(); ++i) {
            const auto& q = s.slices[k].quotes[i];
            const double e = mq[k][i].iv - q.mid_iv;
            auto& cell = acc[{k, bucket(q.moneyness)}];
            cell.first += mq[k][i].ok ? e * e : kFailedContractPenalty;
            cell.second += 1;
        }
    std::map<BucketKey, double> out;
    for (const auto& [key, v] : acc) out[key] = 100.0 * std::sqrt(v.first / static_cast<double>(v.second));
    return out;
}

struct ParamBounds {
    std::vector<double> lower;
    std::vector<double> upper;

    void validate(std::size_t n) const {
        require(lower.size() == n && upper.size() == n, "bounds do not match the parameter count");
        for (std::size_t i = 0; i < n; ++i) require(lower[i] < upper[i], "each lower bound must be below its upper bound");
    }

    static ParamBounds defaults(const ModelSpec& spec) {
        ParamBounds b;
        for (const auto& p : spec.parameters()) {
            b.lower.push_back(p.lower);
            b.upper.push_back(p.upper);
        }
        return b;
    }
};

struct CalibrationConfig {
    NelderMeadConfig optimizer;
    QuadratureConfig quadrature;
    bool seed_from_atm = true;
};

struct CalibrationResult {
    ModelSpec spec;
    std::vector<double> params;
    double rmse = 0.0;
    std::map<BucketKey, double> bucket_rmse;
    double bid_ask_fraction = 0.0;
    int iterations = 0;
    double wall_time = 0.0;
    bool converged = false;
    std::vector<TracePoint> trace;
    std::optional<std::string> seed_note;
};

inline AtmTermStructure atm_term_structure(const Surface& s) {
    AtmTermStructure ts;
    for (const auto& slice : s.slices) {
        ts.tenors.push_back(slice.tenor);
        ts.atm_vols.push_back(slice.atm_vol);
    }
    return ts;
}

// Minimises the RMSE over the parameter box. Starting values: seed_params if
// given, else the registry defaults with (sigma0, shifts) from a BS++ fit
// of the ATM term structure.
inline CalibrationResult calibrate(const Surface& surface, const std::string& model_id,
                                   const std::optional<ParamBounds>& bounds = std::nullopt,
                                   const std::optional<std::vector<double>>& seed_params = std::nullopt,
                                   const CalibrationConfig& cfg = {}, bool feller_enforced = false) {
    require_surface(surface);
    const auto t0 = std::chrono::steady_clock::now();
    CalibrationResult out;
    out.spec = make_model_spec(model_id, surface.tenors(), feller_enforced);
    const ModelSpec& spec = out.spec;
    const std::size_t n = spec.parameter_count();
    const ParamBounds box = bounds ? *bounds : ParamBounds::defaults(spec);
    box.validate(n);

    std::vector<double> start = seed_params ? *seed_params : spec.defaults();
    require(start.size() == n, "seed parameters have the wrong length");
    if (!seed_params && cfg.seed_from_atm) {
        try {
            start = spec.seed_from_bspp(start, calibrate_shift_from_atm(atm_term_structure(surface)));
        } catch (const CalendarArbitrage& e) {
            out.seed_note = std::string("BS++ seed skipped: ") + e.what();
            start[0] = spec.family() == Family::heston_merton ? surface.slices[0].atm_vol * surface.slices[0].atm_vol
                                                               : surface.slices[0].atm_vol;
        }
    }

    auto to_params = [&](const std::vector<double>& z) {
        std::vector<double> x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = box.lower[i] + z[i] * (box.upper[i] - box.lower[i]);
        return spec.repair(x);
    };
    std::vector<double> z0(n);
    for (std::size_t i = 0; i < n; ++i)
        z0[i] = std::clamp((start[i] - box.lower[i]) / (box.upper[i] - box.lower[i]), 0.0, 1.0);

    auto objective = [&](const std::vector<double>& z) {
        try {
            return rmse_from(surface, model_quotes(surface, spec.build(to_params(z)), cfg.quadrature));
        } catch (const std::exception&) {
            return 1e6;
        }
    };
    const auto nm = nelder_mead_box(objective, z0, cfg.optimizer);

    out.params = to_params(nm.x);
    const auto mq = model_quotes(surface, spec.build(out.params), cfg.quadrature);
    out.rmse = rmse_from(surface, mq);
    out.bucket_rmse = bucket_rmse_from(surface, mq);
    out.bid_ask_fraction = bid_ask_fraction_from(surface, mq);
    out.iterations = nm.evals;
    out.converged = nm.converged;
    out.trace = nm.trace;
    out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

inline nlohmann::json to_json(const CalibrationResult& r, std::size_t tenor_count) {
    nlohmann::json j = r.spec.to_json(r.params);
    j["rmse"] = r.rmse;
    j["bid_ask_fraction"] = r.bid_ask_fraction;
    j["iterations"] = r.iterations;
    j["wall_time"] = r.wall_time;
    j["converged"] = r.converged;
    j["parameter_count"] = r.params.size();
    if (r.seed_note) j["seed_note"] = *r.seed_note;
    nlohmann::json grid = nlohmann::json::object();
    for (auto b : {MoneynessBucket::DOTMP, MoneynessBucket::OTMP, MoneynessBucket::ATM, MoneynessBucket::OTMC,
                   MoneynessBucket::DOTMC}) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t k = 0; k < tenor_count; ++k) {
            const auto it = r.bucket_rmse.find({k, b});
            row.push_back(it == r.bucket_rmse.end() ? nlohmann::json(nullptr) : nlohmann::json(it->second));
        }
        grid[bucket_name(b)] = row;
    }
    j["bucket_rmse"] = grid;
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& t : r.trace) trace.push_back({{"evals", t.evals}, {"rmse", t.best}});
    j["trace"] = trace;
    return j;
}

inline std::vector<double> moneyness_strikes(double spot, double sigma, double tau, const std::vector<double>& m_grid) {
    std::vector<double> out;
    for (double m : m_grid) out.push_back(spot * std::exp(m * sigma * std::sqrt(tau)));
    return out;
}

// Quotes generated from a model with bid/ask at price -/+ half_spread * price.
// Out-of-the-money options only, plus a call/put pair at the strike nearest
// the spot so the forward can be implied.
inline std::vector<OptionQuote> synthetic_quotes(const AnyModel& model, double spot, const std::vector<double>& tenors,
                                                 const std::vector<std::vector<double>>& strikes,
                                                 double half_spread = 0.01, const QuadratureConfig& q = {}) {
    require(strikes.size() == tenors.size(), "need one strike list per tenor");
    std::vector<OptionQuote> out;
    for (std::size_t t = 0; t < tenors.size(); ++t) {
        const double tau = tenors[t];
        std::vector<Contract> grid;
        std::size_t nearest = 0;
        for (std::size_t i = 0; i < strikes[t].size(); ++i)
            if (std::abs(strikes[t][i] - spot) < std::abs(strikes[t][nearest] - spot)) nearest = i;
        for (std::size_t i = 0; i < strikes[t].size(); ++i) {
            const double k = strikes[t][i];
            if (i == nearest) {
                grid.push_back({k, tau, true});
                grid.push_back({k, tau, false});
            } else {
                grid.push_back({k, tau, k > spot});
            }
        }
        const auto res = price_surface(grid, model, spot, 0.0, q);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (res[i].error) continue;
            OptionQuote o;
            o.strike = grid[i].strike;
            o.tenor = tau;
            o.is_call = grid[i].is_call;
            o.bid = res[i].price * (1.0 - half_spread);
            o.ask = res[i].price * (1.0 + half_spread);
            o.underlying = spot;
            out.push_back(o);
        }
    }
    return out;
}

}  // namespace edgepp
