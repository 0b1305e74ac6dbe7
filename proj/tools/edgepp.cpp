#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "edgepp/edgepp.hpp"

using namespace edgepp;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Globals {
    std::uint64_t seed = 42;
    unsigned threads = 1;
    int fourier_nodes = 10000;
    double fourier_umax = 0.0;
};

struct RunContext {
    std::string command;
    std::vector<std::string> inputs;
    std::string output;
    std::string manifest;
    json extra = json::object();
};

QuadratureConfig quadrature(const Globals& g) {
    QuadratureConfig q;
    q.node_count = g.fourier_nodes;
    if (g.fourier_umax > 0.0) q.u_max = g.fourier_umax;
    q.validate();
    return q;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw DomainError("malformed JSON in '" + path + "': " + e.what());
    }
}

// Writes to path, or stdout when path is empty or "-".
template <class Fn>
void with_output(const std::string& path, Fn&& fn) {
    if (path.empty() || path == "-") {
        fn(std::cout);
        return;
    }
    std::ofstream out(path);
    if (!out) throw DomainError("cannot open '" + path + "' for writing");
    fn(out);
    if (!out) throw DomainError("failed writing '" + path + "'");
}

std::set<std::string> read_date_list(const std::string& path) {
    std::set<std::string> out;
    if (path.empty()) return out;
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open date list '" + path + "'");
    std::string line;
    while (std::getline(in, line)) {
        line.erase(0, line.find_first_not_of(" \t\r"));
        line.erase(line.find_last_not_of(" \t\r") + 1);
        if (!line.empty() && line[0] != '#') out.insert(line.substr(0, 10));
    }
    return out;
}

struct Snapshot {
    std::string timestamp;
    FilterResult filtered;
};

std::vector<Snapshot> load_surfaces(const std::string& path, const FilterConfig& cfg) {
    std::vector<Snapshot> out;
    for (const auto& [ts, quotes] : split_snapshots(read_quotes_csv(path))) {
        bool excluded = !cfg.exclude_dates.empty() && cfg.exclude_dates.count(ts.substr(0, 10));
        if (excluded) continue;
        out.push_back({ts, filter_surface(quotes, cfg)});
    }
    if (out.empty()) throw DomainError("no snapshot survives the filters in '" + path + "'");
    return out;
}

std::string fmt(double x) {
    std::ostringstream s;
    s << std::setprecision(17) << x;
    return s.str();
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

// ---- price ---------------------------------------------------------------

struct PriceArgs {
    std::string params;
    std::string grid;
    std::vector<double> tenors;
    std::vector<double> strikes;
    std::string type = "otm";
    double spot = 100.0;
    double rate = 0.0;
    std::string out;
};

void cmd_price(const PriceArgs& a, const Globals& g, RunContext& ctx) {
    const auto [spec, x] = model_from_json(read_json_file(a.params));
    const AnyModel model = spec.build(x);
    require(a.spot > 0.0, "spot must be positive");
    require(a.type == "otm" || a.type == "call" || a.type == "put", "--type must be otm, call or put");

    std::vector<Contract> grid;
    if (!a.grid.empty()) {
        std::ifstream in(a.grid);
        if (!in) throw DomainError("cannot open grid file '" + a.grid + "'");
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            const auto f = split_csv_line(line);
            require(f.size() >= 3, "grid rows need tenor,strike,cp_flag");
            try {
                grid.push_back({std::stod(f[1]), std::stod(f[0]), f[2] == "C" || f[2] == "c"});
            } catch (const std::invalid_argument&) {
                throw DomainError("bad grid row '" + line + "'");
            }
        }
        ctx.inputs.push_back(a.grid);
    } else {
        require(!a.tenors.empty() && !a.strikes.empty(), "give --grid or both --tenors and --strikes");
        for (double t : a.tenors)
            for (double k : a.strikes) {
                const bool call = a.type == "call" || (a.type == "otm" && k >= a.spot * std::exp(a.rate * t));
                grid.push_back({k, t, call});
            }
    }
    for (const auto& c : grid) require(c.tau > 0.0 && c.strike > 0.0, "tenors and strikes must be positive");

    const auto res = price_surface(grid, model, a.spot, a.rate, quadrature(g));
    std::size_t failures = 0;
    with_output(a.out, [&](std::ostream& o) {
        o << "tenor,strike,cp_flag,price,iv,floored,error\n";
        for (std::size_t i = 0; i < grid.size(); ++i) {
            o << fmt(grid[i].tau) << ',' << fmt(grid[i].strike) << ',' << (grid[i].is_call ? 'C' : 'P') << ',';
            if (res[i].error) {
                ++failures;
                std::string msg = *res[i].error;
                std::replace(msg.begin(), msg.end(), ',', ';');
                o << ",,," << msg << '\n';
            } else {
                o << fmt(res[i].price) << ',' << fmt(res[i].iv) << ',' << (res[i].floored ? 1 : 0) << ",\n";
            }
        }
    });
    ctx.inputs.push_back(a.params);
    ctx.extra["contracts"] = grid.size();
    ctx.extra["failures"] = failures;
}

// ---- calibrate -----------------------------------------------------------

struct CalibrateArgs {
    std::string model;
    std::string surface;
    std::string out;
    std::string report;
    std::string spot_vol;
    std::string seed_params;
    std::string exclude_dates;
    std::size_t max_tenors = 6;
    int max_evals = 20000;
    int restarts = 3;
    bool feller = false;
};

void write_bucket_report(std::ostream& o, const CalibrationResult& r, std::size_t tenors) {
    o << "bucket";
    for (std::size_t k = 0; k < tenors; ++k) o << ",tenor" << k + 1;
    o << '\n';
    for (auto b : {MoneynessBucket::DOTMP, MoneynessBucket::OTMP, MoneynessBucket::ATM, MoneynessBucket::OTMC,
                   MoneynessBucket::DOTMC}) {
        o << bucket_name(b);
        for (std::size_t k = 0; k < tenors; ++k) {
            const auto it = r.bucket_rmse.find({k, b});
            o << ',';
            if (it != r.bucket_rmse.end()) o << fmt(it->second);
        }
        o << '\n';
    }
}

double spot_volatility(const ModelSpec& spec, const std::vector<double>& x) {
    if (spec.family() != Family::heston_merton) return x[0];
    return std::sqrt(x[0] + (spec.two_factor() ? x[1] : 0.0));
}

void cmd_calibrate(const CalibrateArgs& a, const Globals& g, RunContext& ctx) {
    if (std::find(model_ids().begin(), model_ids().end(), a.model) == model_ids().end())
        throw DomainError("unknown model id '" + a.model + "'; registry: " + model_id_list());
    FilterConfig fc;
    fc.max_tenors = a.max_tenors;
    fc.exclude_dates = read_date_list(a.exclude_dates);
    const auto snaps = load_surfaces(a.surface, fc);
    ctx.inputs.push_back(a.surface);

    CalibrationConfig cfg;
    cfg.optimizer.max_evals = a.max_evals;
    cfg.optimizer.restarts = a.restarts;
    cfg.optimizer.seed = g.seed;
    cfg.quadrature = quadrature(g);

    json results = json::array();
    std::vector<std::pair<std::string, double>> spot_vols;
    std::vector<CalibrationResult> all;
    double wall = 0.0;
    for (const auto& snap : snaps) {
        std::optional<std::vector<double>> seed;
        if (!a.seed_params.empty()) {
            const auto j = read_json_file(a.seed_params);
            seed = make_model_spec(a.model, snap.filtered.surface.tenors(), a.feller).from_json(j);
        }
        auto r = calibrate(snap.filtered.surface, a.model, std::nullopt, seed, cfg, a.feller);
        json j = to_json(r, snap.filtered.surface.slices.size());
        wall += r.wall_time;
        j.erase("wall_time");  // run-dependent; kept in the manifest
        j["timestamp"] = snap.timestamp;
        j["quote_count"] = snap.filtered.surface.quote_count();
        results.push_back(j);
        spot_vols.emplace_back(snap.timestamp, spot_volatility(r.spec, r.params));
        all.push_back(std::move(r));
    }
    with_output(a.out, [&](std::ostream& o) { o << (results.size() == 1 ? results[0] : results).dump(2) << '\n'; });
    if (!a.report.empty())
        with_output(a.report, [&](std::ostream& o) {
            for (std::size_t i = 0; i < all.size(); ++i) {
                if (all.size() > 1) o << "# " << snaps[i].timestamp << '\n';
                write_bucket_report(o, all[i], std::max<std::size_t>(6, snaps[i].filtered.surface.slices.size()));
            }
        });
    if (!a.spot_vol.empty())
        with_output(a.spot_vol, [&](std::ostream& o) {
            o << "timestamp,sigma0\n";
            for (const auto& [ts, s] : spot_vols) o << ts << ',' << fmt(s) << '\n';
        });
    ctx.extra["calibration_wall_time"] = wall;
}

// ---- bootstrap -----------------------------------------------------------

struct BootstrapArgs {
    std::string surface;
    std::string atm;
    std::string out;
};

AtmTermStructure read_atm_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open '" + path + "'");
    std::string line;
    std::getline(in, line);
    AtmTermStructure ts;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto f = split_csv_line(line);
        require(f.size() >= 2, "ATM rows need tenor,atm_vol");
        try {
            ts.tenors.push_back(std::stod(f[0]));
            ts.atm_vols.push_back(std::stod(f[1]));
        } catch (const std::invalid_argument&) {
            throw DomainError("bad ATM row '" + line + "'");
        }
    }
    return ts;
}

json bspp_document(const BsppFit& fit) {
    return {{"model", "bs_pp"},
            {"params", {{"sigma0", fit.sigma0}}},
            {"displacement", {{"tenors", fit.displacement.tenors}, {"shifts", fit.displacement.shifts}}}};
}

void cmd_bootstrap(const BootstrapArgs& a, const Globals&, RunContext& ctx) {
    require(a.surface.empty() != a.atm.empty(), "give exactly one of --surface and --atm");
    AtmTermStructure ts;
    if (!a.atm.empty()) {
        ts = read_atm_csv(a.atm);
        ctx.inputs.push_back(a.atm);
    } else {
        ts = atm_term_structure(load_surfaces(a.surface, {}).front().filtered.surface);
        ctx.inputs.push_back(a.surface);
    }
    const auto fit = calibrate_shift_from_atm(ts);
    with_output(a.out, [&](std::ostream& o) { o << bspp_document(fit).dump(2) << '\n'; });
}

// ---- ingest --------------------------------------------------------------

struct IngestArgs {
    std::string quotes;
    std::string out;
    std::string exclude_dates;
    std::size_t max_tenors = 6;
    double m_lower = -15.0;
    double m_upper = 5.0;
    double rate = 0.0;
};

void cmd_ingest(const IngestArgs& a, const Globals&, RunContext& ctx) {
    FilterConfig fc;
    fc.max_tenors = a.max_tenors;
    fc.m_lower = a.m_lower;
    fc.m_upper = a.m_upper;
    fc.rate = a.rate;
    fc.exclude_dates = read_date_list(a.exclude_dates);
    const auto raw = read_quotes_csv(a.quotes);
    ctx.inputs.push_back(a.quotes);
    std::map<std::string, std::size_t> dropped;
    std::size_t kept = 0, excluded = 0;
    std::vector<Surface> surfaces;
    for (const auto& [ts, quotes] : split_snapshots(raw)) {
        if (fc.exclude_dates.count(ts.substr(0, 10))) {
            excluded += quotes.size();
            continue;
        }
        auto r = filter_surface(quotes, fc);
        for (const auto& [why, n] : r.dropped) dropped[why] += n;
        kept += r.surface.quote_count();
        surfaces.push_back(std::move(r.surface));
    }
    if (excluded) dropped["excluded date"] += excluded;
    require(!surfaces.empty(), "no snapshot survives the filters");
    with_output(a.out, [&](std::ostream& o) {
        bool header = true;
        for (const auto& s : surfaces) {
            std::ostringstream buf;
            write_surface_csv(buf, s);
            std::string text = buf.str();
            if (!header) text.erase(0, text.find('\n') + 1);
            header = false;
            o << text;
        }
    });
    json summary = {{"kept", kept}, {"snapshots", surfaces.size()}, {"dropped", dropped}};
    if (!a.out.empty() && a.out != "-") std::cout << summary.dump(2) << '\n';
    ctx.extra["ingest"] = summary;
}

// ---- bench ---------------------------------------------------------------

struct BenchArgs {
    std::string models = "all";
    int trials = 100;
    std::string out;
};

void cmd_bench(const BenchArgs& a, const Globals& g, RunContext& ctx) {
    std::vector<std::string> ids = a.models == "all" ? model_ids() : split_list(a.models);
    require(!ids.empty(), "--models is empty");
    std::vector<BenchModel> models;
    for (const auto& id : ids) {
        const auto spec = make_model_spec(id, bench_tenors());
        models.push_back({id, spec.build(spec.defaults())});
    }
    const auto rep = timing_bench(models, a.trials, 100.0, 0.15, quadrature(g));
    ctx.extra["trials"] = rep.trials;
    with_output(a.out, [&](std::ostream& o) {
        o << "model,trials,zero_dte_mean,zero_dte_half_width,surface_mean,surface_half_width\n";
        for (const auto& e : rep.entries)
            o << e.model << ',' << rep.trials << ',' << fmt(e.zero_dte.mean) << ',' << fmt(e.zero_dte.half_width)
              << ',' << fmt(e.surface.mean) << ',' << fmt(e.surface.half_width) << '\n';
    });
}

// ---- simulate ------------------------------------------------------------

struct SimulateArgs {
    std::string model;
    std::string params;
    double tau = 0.0;
    std::size_t paths = 100000;
    int steps = 64;
    bool antithetic = false;
    std::string out;
};

void cmd_simulate(const SimulateArgs& a, const Globals& g, RunContext& ctx) {
    auto doc = read_json_file(a.params);
    ctx.inputs.push_back(a.params);
    if (!a.model.empty()) {
        if (doc.is_object() && doc.contains("model"))
            require(doc["model"] == a.model, "--model disagrees with the parameter document");
        else if (doc.is_object())
            doc["model"] = a.model;
    }
    const auto [spec, x] = model_from_json(doc);
    require(a.tau > 0.0, "--tau must be positive");
    SimConfig cfg;
    cfg.paths = a.paths;
    cfg.steps_per_tenor = a.steps;
    cfg.rng_seed = g.seed;
    cfg.antithetic = a.antithetic;
    cfg.threads = g.threads;
    const auto s = simulate_model(spec.build(x), a.tau, cfg);
    write_samples(a.out, s.log_return);
    const auto mg = martingale_check(s.log_return);
    json summary = {{"paths", s.log_return.size()},
                    {"mean_exp_return", mg.mean},
                    {"std_error", mg.std_error},
                    {"negative_variance_paths", s.negative_variance_paths}};
    std::cout << summary.dump(2) << '\n';
    ctx.extra["simulation"] = summary;
}

// ---- smile-expand --------------------------------------------------------

struct SmileArgs {
    std::string params;
    std::vector<double> x_grid;
    std::string out;
};

void cmd_smile(const SmileArgs& a, const Globals&, RunContext& ctx) {
    const auto doc = read_json_file(a.params);
    ctx.inputs.push_back(a.params);
    EdgeworthParams p;
    if (doc.is_object() && doc.contains("model")) {
        const auto [spec, x] = model_from_json(doc);
        require(spec.family() == Family::edgeworth, "smile-expand needs an edgeworth or edgeworth_pp document");
        p = std::get<EdgeworthModel>(spec.build(x)).params;
    } else {
        require(doc.is_object(), "parameter document must be an object");
        p = doc.get<EdgeworthParams>();
    }
    p.validate();
    const auto e = smile_expansion(p);
    json j = {{"theta3", e.theta3},
              {"theta4", e.theta4},
              {"iv_level", e.iv_level},
              {"iv_skew", e.iv_skew},
              {"iv_convexity", e.iv_convexity}};
    if (!a.x_grid.empty()) {
        json rows = json::array();
        for (double x : a.x_grid) rows.push_back({{"x", x}, {"iv", e.implied_vol(x)}});
        j["smile"] = rows;
    }
    with_output(a.out, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
}

// ---- termstructure -------------------------------------------------------

struct TermArgs {
    std::string surface;
    std::vector<std::string> params;
    std::string out;
};

void cmd_termstructure(const TermArgs& a, const Globals& g, RunContext& ctx) {
    const auto snaps = load_surfaces(a.surface, {});
    ctx.inputs.push_back(a.surface);
    for (const auto& p : a.params) ctx.inputs.push_back(p);

    struct Column {
        std::string name;
        std::function<std::vector<double>(const Surface&)> atm;
    };
    std::vector<Column> cols;
    auto bspp_column = [](double sigma0, Displacement d) {
        return [sigma0, d](const Surface& s) {
            std::vector<double> out;
            for (const auto& slice : s.slices) out.push_back(bspp_atm_vol(slice.tenor, sigma0, d));
            return out;
        };
    };
    if (a.params.empty()) {
        cols.push_back({"bs_pp_fit", [&](const Surface& s) {
                            const auto fit = calibrate_shift_from_atm(atm_term_structure(s));
                            return bspp_column(fit.sigma0, fit.displacement)(s);
                        }});
    }
    const auto q = quadrature(g);
    for (const auto& path : a.params) {
        const auto [spec, x] = model_from_json(read_json_file(path));
        if (spec.family() == Family::bs_pp) {
            cols.push_back({spec.id, bspp_column(x[0], spec.displacement_from(x))});
            continue;
        }
        const AnyModel model = spec.build(x);
        cols.push_back({spec.id, [model, q](const Surface& s) {
                            std::vector<double> out;
                            for (const auto& slice : s.slices) {
                                const double spot_eff = slice.forward * std::exp(-s.rate * slice.tenor);
                                const auto r = price_surface({{slice.forward, slice.tenor, true}}, model, spot_eff,
                                                             s.rate, q);
                                if (r[0].error) throw NumericalError("ATM pricing failed: " + *r[0].error);
                                out.push_back(r[0].iv);
                            }
                            return out;
                        }});
    }
    require(!cols.empty(), "no model columns");
    with_output(a.out, [&](std::ostream& o) {
        o << "timestamp,tenor,market_atm_vol";
        for (const auto& c : cols) o << ',' << c.name;
        o << '\n';
        for (const auto& snap : snaps) {
            const auto& s = snap.filtered.surface;
            require(!s.slices.empty(), "surface is empty");
            std::vector<std::vector<double>> values;
            for (const auto& c : cols) values.push_back(c.atm(s));
            for (std::size_t k = 0; k < s.slices.size(); ++k) {
                o << snap.timestamp << ',' << fmt(s.slices[k].tenor) << ',' << fmt(s.slices[k].atm_vol);
                for (const auto& v : values) o << ',' << fmt(v[k]);
                o << '\n';
            }
        }
    });
}

// ---- manifest and errors -------------------------------------------------

void write_manifest(const RunContext& ctx, const Globals& g, const std::string& config_dump, double wall) {
    std::string path = ctx.manifest;
    if (path.empty())
        path = (ctx.output.empty() || ctx.output == "-") ? "edgepp-" + ctx.command + ".manifest.json"
                                                         : ctx.output + ".manifest.json";
    std::ostringstream hash;
    hash << std::hex << std::setw(16) << std::setfill('0') << fnv1a(config_dump);
    json m = {{"command", ctx.command},
              {"inputs", ctx.inputs},
              {"output", ctx.output},
              {"config_hash", hash.str()},
              {"rng_seed", g.seed},
              {"versions", {{"edgepp", kVersion}, {"compiler", __VERSION__}}},
              {"wall_time", wall}};
    for (auto it = ctx.extra.begin(); it != ctx.extra.end(); ++it) m[it.key()] = it.value();
    std::ofstream out(path);
    if (!out) throw DomainError("cannot write manifest '" + path + "'");
    out << m.dump(2) << '\n';
}

int fail(int code, const std::string& kind, const std::string& message, json extra = json::object()) {
    json j = {{"error", kind}, {"message", message}, {"exit_code", code}};
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    std::cerr << j.dump() << std::endl;
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Short-tenor option pricing with Edgeworth++ and benchmark models"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value configuration file (flags override it)");
    Globals g;
    RunContext ctx;
    app.add_option("--seed", g.seed, "RNG seed")->capture_default_str();
    app.add_option("--threads", g.threads, "worker threads for simulation")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--fourier-nodes", g.fourier_nodes, "Fourier quadrature nodes")->capture_default_str()->check(CLI::Range(16, 10000000));
    app.add_option("--fourier-umax", g.fourier_umax, "fixed Fourier truncation (0 = adaptive)")->capture_default_str();
    app.add_option("--manifest", ctx.manifest, "manifest path (default: <out>.manifest.json)");

    PriceArgs price;
    auto* sp = app.add_subcommand("price", "price options from a parameter document");
    sp->add_option("--params", price.params, "parameter JSON")->required();
    sp->add_option("--grid", price.grid, "CSV with tenor,strike,cp_flag");
    sp->add_option("--tenors", price.tenors, "tenors in years")->delimiter(',');
    sp->add_option("--strikes", price.strikes, "strikes")->delimiter(',');
    sp->add_option("--type", price.type, "otm, call or put")->capture_default_str();
    sp->add_option("--spot", price.spot)->capture_default_str();
    sp->add_option("--rate", price.rate)->capture_default_str();
    sp->add_option("--out", price.out, "price table CSV (default stdout)");

    CalibrateArgs cal;
    auto* sc = app.add_subcommand("calibrate", "fit a registry model to a quote surface");
    sc->add_option("--model", cal.model, "model id")->required();
    sc->add_option("--surface", cal.surface, "quote CSV")->required();
    sc->add_option("--out", cal.out, "result JSON (default stdout)");
    sc->add_option("--report", cal.report, "bucket RMSE grid CSV (buckets x tenors)");
    sc->add_option("--spot-vol", cal.spot_vol, "sigma0 time series CSV");
    sc->add_option("--seed-params", cal.seed_params, "starting parameter JSON");
    sc->add_option("--exclude-dates", cal.exclude_dates, "file with one YYYY-MM-DD per line");
    sc->add_option("--max-tenors", cal.max_tenors)->capture_default_str();
    sc->add_option("--max-evals", cal.max_evals)->capture_default_str()->check(CLI::PositiveNumber);
    sc->add_option("--restarts", cal.restarts)->capture_default_str();
    sc->add_flag("--feller", cal.feller, "enforce the Feller condition");

    BootstrapArgs boot;
    auto* sb = app.add_subcommand("bootstrap", "BS++ shifts from the ATM term structure");
    sb->add_option("--surface", boot.surface, "quote CSV");
    sb->add_option("--atm", boot.atm, "CSV with tenor,atm_vol");
    sb->add_option("--out", boot.out, "parameter JSON (default stdout)");

    IngestArgs ing;
    auto* si = app.add_subcommand("ingest", "filter raw quotes into a surface CSV");
    si->add_option("--quotes", ing.quotes, "raw quote CSV")->required();
    si->add_option("--out", ing.out, "surface CSV (default stdout)");
    si->add_option("--exclude-dates", ing.exclude_dates, "file with one YYYY-MM-DD per line");
    si->add_option("--max-tenors", ing.max_tenors)->capture_default_str();
    si->add_option("--m-lower", ing.m_lower)->capture_default_str();
    si->add_option("--m-upper", ing.m_upper)->capture_default_str();
    si->add_option("--rate", ing.rate)->capture_default_str();

    BenchArgs bench;
    auto* sk = app.add_subcommand("bench", "time surface pricing per model");
    sk->add_option("--models", bench.models, "'all' or comma-separated ids")->capture_default_str();
    sk->add_option("--trials", bench.trials)->capture_default_str()->check(CLI::PositiveNumber);
    sk->add_option("--out", bench.out, "timing CSV (default stdout)");

    SimulateArgs sim;
    auto* sm = app.add_subcommand("simulate", "Monte Carlo terminal log-returns");
    sm->add_option("--model", sim.model, "model id (must match the document)");
    sm->add_option("--params", sim.params, "parameter JSON")->required();
    sm->add_option("--tau", sim.tau, "horizon in years")->required();
    sm->add_option("--paths", sim.paths)->capture_default_str()->check(CLI::PositiveNumber);
    sm->add_option("--steps", sim.steps)->capture_default_str()->check(CLI::PositiveNumber);
    sm->add_flag("--antithetic", sim.antithetic);
    sm->add_option("--out", sim.out, "binary samples file")->required();

    SmileArgs smile;
    auto* ss = app.add_subcommand("smile-expand", "short-tenor smile coefficients");
    ss->add_option("--params", smile.params, "Edgeworth parameter JSON")->required();
    ss->add_option("--x", smile.x_grid, "log-moneyness points")->delimiter(',');
    ss->add_option("--out", smile.out, "JSON (default stdout)");

    TermArgs term;
    auto* st = app.add_subcommand("termstructure", "market vs model ATM vols per tenor");
    st->add_option("--surface", term.surface, "quote CSV")->required();
    st->add_option("--params", term.params, "model parameter JSON (repeatable)");
    st->add_option("--out", term.out, "CSV (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(2, "validation", e.what());
    }

    const auto t0 = std::chrono::steady_clock::now();
    try {
        if (*sp) ctx.command = "price", ctx.output = price.out, cmd_price(price, g, ctx);
        else if (*sc) ctx.command = "calibrate", ctx.output = cal.out, cmd_calibrate(cal, g, ctx);
        else if (*sb) ctx.command = "bootstrap", ctx.output = boot.out, cmd_bootstrap(boot, g, ctx);
        else if (*si) ctx.command = "ingest", ctx.output = ing.out, cmd_ingest(ing, g, ctx);
        else if (*sk) ctx.command = "bench", ctx.output = bench.out, cmd_bench(bench, g, ctx);
        else if (*sm) ctx.command = "simulate", ctx.output = sim.out, cmd_simulate(sim, g, ctx);
        else if (*ss) ctx.command = "smile-expand", ctx.output = smile.out, cmd_smile(smile, g, ctx);
        else if (*st) ctx.command = "termstructure", ctx.output = term.out, cmd_termstructure(term, g, ctx);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_manifest(ctx, g, app.config_to_str(true, false), wall);
    } catch (const CalendarArbitrage& e) {
        return fail(2, "validation", e.what(), {{"tenor_pair", {e.first_tenor, e.second_tenor}}});
    } catch (const BoundViolation& e) {
        return fail(2, "validation", e.what());
    } catch (const DomainError& e) {
        return fail(2, "validation", e.what());
    } catch (const json::exception& e) {
        return fail(2, "validation", e.what());
    } catch (const NumericalError& e) {
        return fail(1, "numerical", e.what());
    } catch (const std::exception& e) {
        return fail(1, "numerical", e.what());
    }
    return 0;
}
