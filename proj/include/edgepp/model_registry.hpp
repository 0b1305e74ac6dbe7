#pragma once

#include <algorithm>
#include <json.hpp>
#include <string>
#include <variant>
#include <vector>

#include "edgepp/bspp.hpp"
#include "edgepp/edgeworth_cf.hpp"
#include "edgepp/error.hpp"
#include "edgepp/fourier_pricer.hpp"
#include "edgepp/heston_merton.hpp"
#include "edgepp/rough_heston.hpp"

namespace edgepp {

using AnyModel = std::variant<EdgeworthModel, HestonMertonModel, RoughHestonModel>;

enum class Family { edgeworth, bs_pp, heston_merton, rough };

struct ParamInfo {
    std::string name;
    double lower;
    double upper;
    double start;
};

inline const std::vector<std::string>& model_ids() {
    static const std::vector<std::string> ids{"edgeworth",         "edgeworth_pp",        "bs_pp",
                                              "heston_merton_1f",  "heston_merton_1f_pp", "heston_merton_2f",
                                              "heston_merton_2f_pp", "rough_heston_pp",   "rough_heston_merton_pp"};
    return ids;
}

inline std::string model_id_list() {
    std::string out;
    for (const auto& id : model_ids()) out += (out.empty() ? "" : ", ") + id;
    return out;
}

// A registry entry bound to a surface tenor grid (needed by the shifted
// variants, whose parameter vectors carry one level per extra tenor).
struct ModelSpec {
    std::string id;
    std::vector<double> tenors;
    bool feller_enforced = false;

    Family family() const {
        if (id.rfind("edgeworth", 0) == 0) return Family::edgeworth;
        if (id == "bs_pp") return Family::bs_pp;
        if (id.rfind("heston_merton", 0) == 0) return Family::heston_merton;
        return Family::rough;
    }
    bool shifted() const { return id.size() > 3 && id.compare(id.size() - 3, 3, "_pp") == 0; }
    bool two_factor() const { return id.rfind("heston_merton_2f", 0) == 0; }
    bool rough_jumps() const { return id == "rough_heston_merton_pp"; }
    std::size_t shift_count() const { return shifted() ? tenors.size() - 1 : 0; }

    void validate() const {
        if (std::find(model_ids().begin(), model_ids().end(), id) == model_ids().end())
            throw DomainError("unknown model id '" + id + "'; registry: " + model_id_list());
        if (shifted()) {
            require(!tenors.empty(), "model " + id + " needs the surface tenor grid");
            Displacement{tenors, std::vector<double>(tenors.size() - 1, 0.0)}.validate();
        }
    }

    std::vector<ParamInfo> parameters() const {
        std::vector<ParamInfo> out;
        switch (family()) {
        case Family::edgeworth:
            out = {{"sigma0", 0.01, 3.0, 0.2},      {"beta_tilde0", 0.0, 10.0, 0.5}, {"rho0", -1.0, 1.0, -0.5},
                   {"eta0", -20.0, 20.0, 0.0},      {"alpha_prime0", -20.0, 20.0, 0.0}, {"lambda0", 0.0, 500.0, 10.0},
                   {"mu_J", -0.2, 0.2, -0.01},      {"sigma_J", 0.0, 0.2, 0.01}};
            break;
        case Family::bs_pp:
            out = {{"sigma0", 0.01, 3.0, 0.2}};
            break;
        case Family::heston_merton:
            if (two_factor())
                out = {{"v1_0", 1e-5, 2.0, 0.03},   {"v2_0", 1e-5, 2.0, 0.01},    {"kappa1", 0.0, 50.0, 2.0},
                       {"kappa2", 0.0, 50.0, 0.5},  {"theta1", 1e-5, 2.0, 0.04},  {"theta2", 1e-5, 2.0, 0.01},
                       {"zeta1", 0.01, 5.0, 0.5},   {"zeta2", 0.01, 5.0, 0.2},    {"rho_jump", -1.0, 1.0, 0.0},
                       {"rho1", -1.0, 1.0, -0.7},   {"rho2", -1.0, 1.0, -0.3},    {"mu_x", -0.2, 0.2, -0.02},
                       {"sigma_x", 0.0, 0.2, 0.02}, {"m_v", 0.0, 0.5, 0.01},      {"c0", 0.0, 500.0, 5.0},
                       {"c1", 0.0, 500.0, 0.0},     {"c2", 0.0, 500.0, 0.0}};
            else
                out = {{"v1_0", 1e-5, 2.0, 0.04}, {"kappa1", 0.0, 50.0, 2.0}, {"theta1", 1e-5, 2.0, 0.04},
                       {"zeta1", 0.01, 5.0, 0.5}, {"rho1", -1.0, 1.0, -0.7}, {"mu_x", -0.2, 0.2, -0.02},
                       {"sigma_x", 0.0, 0.2, 0.02}, {"c0", 0.0, 500.0, 5.0}};
            break;
        case Family::rough:
            out = {{"sigma0", 0.01, 3.0, 0.2}, {"rho", -1.0, 1.0, -0.7}, {"nu", 0.01, 5.0, 0.3},
                   {"hurst", 0.01, 0.5, 0.1}};
            if (rough_jumps())
                out.insert(out.end(),
                           {{"lambda", 0.0, 500.0, 10.0}, {"mu_J", -0.2, 0.2, -0.01}, {"sigma_J", 0.0, 0.2, 0.01}});
            break;
        }
        for (std::size_t k = 1; k <= shift_count(); ++k) {
            const std::string name = "a" + std::to_string(k);
            if (family() == Family::rough)
                out.push_back({name, 1e-4, 9.0, 0.04});  // forward variance level
            else if (family() == Family::heston_merton)
                out.push_back({name, -2.0, 2.0, 0.0});  // variance shift
            else
                out.push_back({name, -3.0, 5.0, 0.0});  // volatility shift
        }
        return out;
    }

    std::size_t parameter_count() const { return parameters().size(); }

    std::vector<double> defaults() const {
        std::vector<double> x;
        for (const auto& p : parameters()) x.push_back(p.start);
        return x;
    }

    std::size_t index_of(const std::string& name) const {
        const auto ps = parameters();
        for (std::size_t i = 0; i < ps.size(); ++i)
            if (ps[i].name == name) return i;
        throw DomainError("model " + id + " has no parameter '" + name + "'");
    }

    // Box projection plus the bounds that depend on other parameters.
    std::vector<double> repair(std::vector<double> x) const {
        const auto ps = parameters();
        require(x.size() == ps.size(), "parameter vector has the wrong length for " + id);
        for (std::size_t i = 0; i < ps.size(); ++i) x[i] = std::clamp(x[i], ps[i].lower, ps[i].upper);
        const std::size_t first_shift = ps.size() - shift_count();
        if (family() == Family::edgeworth || family() == Family::bs_pp)
            for (std::size_t i = first_shift; i < ps.size(); ++i) x[i] = std::max(x[i], -x[0] * (1.0 - 1e-3));
        if (family() == Family::heston_merton)
            for (std::size_t i = first_shift; i < ps.size(); ++i) x[i] = std::max(x[i], -x[0] * (1.0 - 1e-3));
        return x;
    }

    Displacement displacement_from(const std::vector<double>& x) const {
        Displacement d{tenors, {}};
        d.shifts.assign(x.end() - static_cast<std::ptrdiff_t>(shift_count()), x.end());
        return d;
    }

    AnyModel build(const std::vector<double>& x) const {
        validate();
        require(x.size() == parameter_count(), "parameter vector has the wrong length for " + id);
        switch (family()) {
        case Family::edgeworth: {
            EdgeworthModel m;
            m.params = {x[0], x[1], x[2], x[3], x[4], x[5], x[6], x[7]};
            m.params.validate();
            if (shifted()) {
                m.displacement = displacement_from(x);
                m.displacement->validate(m.params.sigma0);
            }
            return m;
        }
        case Family::bs_pp: {
            EdgeworthModel m;
            m.params.sigma0 = x[0];
            m.params.validate();
            m.displacement = displacement_from(x);
            m.displacement->validate(x[0]);
            return m;
        }
        case Family::heston_merton: {
            HestonMertonModel m;
            auto& p = m.params;
            p.feller_enforced = feller_enforced;
            if (two_factor()) {
                p.factor_count = 2;
                p.v1_0 = x[0], p.v2_0 = x[1], p.kappa1 = x[2], p.kappa2 = x[3], p.theta1 = x[4], p.theta2 = x[5];
                p.zeta1 = x[6], p.zeta2 = x[7], p.rho_jump = x[8], p.rho1 = x[9], p.rho2 = x[10];
                p.mu_x = x[11], p.sigma_x = x[12], p.m_v = x[13], p.c0 = x[14], p.c1 = x[15], p.c2 = x[16];
            } else {
                p.factor_count = 1;
                p.v1_0 = x[0], p.kappa1 = x[1], p.theta1 = x[2], p.zeta1 = x[3], p.rho1 = x[4];
                p.mu_x = x[5], p.sigma_x = x[6], p.c0 = x[7];
                p.v2_0 = p.kappa2 = p.theta2 = p.zeta2 = p.rho2 = 0.0;
            }
            if (shifted()) p.shifts = displacement_from(x);
            p.validate();
            return m;
        }
        case Family::rough: {
            RoughHestonModel m;
            auto& p = m.params;
            p.rho = x[1], p.nu = x[2], p.hurst = x[3];
            if (rough_jumps()) p.lambda = x[4], p.mu_j = x[5], p.sigma_j = x[6];
            p.xi0.tenors = tenors;
            p.xi0.levels = {x[0] * x[0]};
            for (double a : displacement_from(x).shifts) p.xi0.levels.push_back(a);
            p.validate();
            return m;
        }
        }
        throw DomainError("unknown model family");
    }

    // Starting values from a BS++ fit of the ATM term structure.
    std::vector<double> seed_from_bspp(std::vector<double> x, const BsppFit& fit) const {
        const std::size_t first_shift = parameter_count() - shift_count();
        const double s = fit.sigma0;
        switch (family()) {
        case Family::edgeworth:
        case Family::bs_pp:
            x[0] = s;
            for (std::size_t k = 0; k < shift_count(); ++k) x[first_shift + k] = fit.displacement.shifts[k];
            break;
        case Family::heston_merton:
            x[0] = s * s;
            for (std::size_t k = 0; k < shift_count(); ++k) {
                const double v = s + fit.displacement.shifts[k];
                x[first_shift + k] = v * v - s * s;
            }
            break;
        case Family::rough:
            x[0] = s;
            for (std::size_t k = 0; k < shift_count(); ++k) {
                const double v = s + fit.displacement.shifts[k];
                x[first_shift + k] = std::max(v * v, 1e-4);
            }
            break;
        }
        return repair(x);
    }

    nlohmann::json to_json(const std::vector<double>& x) const {
        const auto ps = parameters();
        require(x.size() == ps.size(), "parameter vector has the wrong length for " + id);
        nlohmann::json j;
        j["model"] = id;
        nlohmann::json params = nlohmann::json::object();
        const std::size_t first_shift = ps.size() - shift_count();
        for (std::size_t i = 0; i < first_shift; ++i) params[ps[i].name] = x[i];
        j["params"] = params;
        if (shifted()) {
            j["displacement"]["tenors"] = tenors;
            j["displacement"]["shifts"] = std::vector<double>(x.begin() + first_shift, x.end());
        }
        if (family() == Family::heston_merton) j["feller_enforced"] = feller_enforced;
        return j;
    }

    // Reads named parameters; missing ones keep their default start values.
    std::vector<double> from_json(const nlohmann::json& j) const {
        const auto ps = parameters();
        std::vector<double> x = defaults();
        const std::size_t first_shift = ps.size() - shift_count();
        const auto& params = j.contains("params") ? j.at("params") : j;
        for (auto it = params.begin(); it != params.end(); ++it) {
            bool known = false;
            for (std::size_t i = 0; i < first_shift; ++i)
                if (ps[i].name == it.key()) {
                    require(it->is_number(), "parameter '" + it.key() + "' must be a number");
                    x[i] = it->get<double>();
                    known = true;
                }
            require(known, "model " + id + " has no parameter '" + it.key() + "'");
        }
        if (shifted() && j.contains("displacement")) {
            const auto shifts = j.at("displacement").at("shifts").get<std::vector<double>>();
            require(shifts.size() == shift_count(), "displacement needs " + std::to_string(shift_count()) + " shifts");
            std::copy(shifts.begin(), shifts.end(), x.begin() + first_shift);
        }
        return x;
    }
};

inline ModelSpec make_model_spec(const std::string& id, std::vector<double> tenors = {}, bool feller = false) {
    ModelSpec s{id, std::move(tenors), feller};
    s.validate();
    return s;
}

// Parses a parameter document {"model", "params", "displacement"?, "feller_enforced"?}.
inline std::pair<ModelSpec, std::vector<double>> model_from_json(const nlohmann::json& j) {
    require(j.is_object() && j.contains("model") && j.at("model").is_string(), "parameter document needs a \"model\"");
    std::vector<double> tenors;
    if (j.contains("displacement")) tenors = j.at("displacement").at("tenors").get<std::vector<double>>();
    const bool feller = j.value("feller_enforced", false);
    ModelSpec spec = make_model_spec(j.at("model").get<std::string>(), tenors, feller);
    return {spec, spec.from_json(j)};
}

inline void to_json(nlohmann::json& j, const EdgeworthParams& p) {
    j = {{"sigma0", p.sigma0}, {"beta_tilde0", p.beta_tilde0}, {"rho0", p.rho0}, {"eta0", p.eta0},
         {"alpha_prime0", p.alpha_prime0}, {"lambda0", p.lambda0}, {"mu_J", p.mu_j}, {"sigma_J", p.sigma_j}};
}

inline void from_json(const nlohmann::json& j, EdgeworthParams& p) {
    p.sigma0 = j.value("sigma0", p.sigma0);
    p.beta_tilde0 = j.value("beta_tilde0", p.beta_tilde0);
    p.rho0 = j.value("rho0", p.rho0);
    p.eta0 = j.value("eta0", p.eta0);
    p.alpha_prime0 = j.value("alpha_prime0", p.alpha_prime0);
    p.lambda0 = j.value("lambda0", p.lambda0);
    p.mu_j = j.value("mu_J", j.value("mu_j", p.mu_j));
    p.sigma_j = j.value("sigma_J", j.value("sigma_j", p.sigma_j));
}

inline void to_json(nlohmann::json& j, const Displacement& d) { j = {{"tenors", d.tenors}, {"shifts", d.shifts}}; }

inline void from_json(const nlohmann::json& j, Displacement& d) {
    d.tenors = j.at("tenors").get<std::vector<double>>();
    d.shifts = j.at("shifts").get<std::vector<double>>();
}

// Prices a contract grid with whichever model the variant holds.
inline std::vector<ContractResult> price_surface(const std::vector<Contract>& grid, const AnyModel& model,
                                                 double spot, double rate = 0.0, const QuadratureConfig& q = {}) {
    return std::visit([&](const auto& m) { return price_surface(grid, m, spot, rate, q); }, model);
}

}  // namespace edgepp
