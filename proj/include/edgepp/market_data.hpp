#pragma once

#include <algorithm>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "edgepp/black_scholes.hpp"
#include "edgepp/error.hpp"

namespace edgepp {

inline constexpr double kSecondsPerYear = 365.0 * 86400.0;

struct OptionQuote {
    double strike = 0.0;
    double tenor = 0.0;  // ACT/365 years
    double bid = 0.0;
    double ask = 0.0;
    bool is_call = true;
    std::string timestamp;
    std::string expiry;
    double underlying = 0.0;
    // filled by filter_surface
    double mid_iv = std::numeric_limits<double>::quiet_NaN();
    double moneyness = std::numeric_limits<double>::quiet_NaN();

    double mid() const { return 0.5 * (bid + ask); }
};

enum class MoneynessBucket { DOTMP, OTMP, ATM, OTMC, DOTMC };

inline const char* bucket_name(MoneynessBucket b) {
    switch (b) {
    case MoneynessBucket::DOTMP: return "DOTMP";
    case MoneynessBucket::OTMP: return "OTMP";
    case MoneynessBucket::ATM: return "ATM";
    case MoneynessBucket::OTMC: return "OTMC";
    case MoneynessBucket::DOTMC: return "DOTMC";
    }
    return "?";
}

// m < -1 | [-1, -0.35) | [-0.35, 0.35] | (0.35, 1] | > 1
inline MoneynessBucket bucket(double m) {
    if (m < -1.0) return MoneynessBucket::DOTMP;
    if (m < -0.35) return MoneynessBucket::OTMP;
    if (m <= 0.35) return MoneynessBucket::ATM;
    if (m <= 1.0) return MoneynessBucket::OTMC;
    return MoneynessBucket::DOTMC;
}

inline double log_moneyness(double strike, double forward, double sigma_bs, double tau) {
    require(strike > 0.0 && forward > 0.0 && sigma_bs > 0.0 && tau > 0.0, "log_moneyness inputs must be positive");
    return (std::log(strike) - std::log(forward)) / (sigma_bs * std::sqrt(tau));
}

struct TenorSlice {
    double tenor = 0.0;
    double forward = 0.0;
    double atm_vol = 0.0;
    std::vector<OptionQuote> quotes;
};

struct Surface {
    double spot = 0.0;
    double rate = 0.0;
    std::vector<TenorSlice> slices;

    std::size_t quote_count() const {
        std::size_t n = 0;
        for (const auto& s : slices) n += s.quotes.size();
        return n;
    }

    std::vector<double> tenors() const {
        std::vector<double> t;
        for (const auto& s : slices) t.push_back(s.tenor);
        return t;
    }

    std::vector<OptionQuote> flatten() const {
        std::vector<OptionQuote> out;
        for (const auto& s : slices) out.insert(out.end(), s.quotes.begin(), s.quotes.end());
        return out;
    }
};

// F = K* + e^{r tau} (C - P) at the strike minimising |C - P| on mid prices.
inline double implied_forward(const std::vector<OptionQuote>& quotes, double rate = 0.0) {
    std::map<double, std::pair<const OptionQuote*, const OptionQuote*>> pairs;
    for (const auto& q : quotes) (q.is_call ? pairs[q.strike].first : pairs[q.strike].second) = &q;
    double best = std::numeric_limits<double>::infinity();
    double forward = 0.0;
    for (const auto& [k, cp] : pairs) {
        if (!cp.first || !cp.second) continue;
        const double diff = cp.first->mid() - cp.second->mid();
        if (std::abs(diff) < best) {
            best = std::abs(diff);
            forward = k + std::exp(rate * cp.first->tenor) * diff;
        }
    }
    if (!std::isfinite(best)) throw DomainError("no strike with both a call and a put quote");
    return forward;
}

struct FilterConfig {
    double m_lower = -15.0;
    double m_upper = 5.0;
    std::size_t max_tenors = 6;
    double rate = 0.0;
    std::set<std::string> exclude_dates;  // YYYY-MM-DD of the snapshot
};

struct FilterResult {
    Surface surface;
    std::map<std::string, std::size_t> dropped;
};

namespace detail {

inline double mid_iv(const OptionQuote& q, double forward, double rate) {
    const double spot_eff = forward * std::exp(-rate * q.tenor);
    return implied_vol(q.mid(), spot_eff, q.strike, q.tenor, rate, q.is_call);
}

}  // namespace detail

// Positive quotes -> forward and ATM vol per tenor -> moneyness window ->
// shortest max_tenors tenors. Idempotent.
inline FilterResult filter_surface(const std::vector<OptionQuote>& raw, const FilterConfig& cfg = {}) {
    FilterResult out;
    auto drop = [&](const std::string& why, std::size_t n = 1) { out.dropped[why] += n; };

    std::map<double, std::vector<OptionQuote>> by_tenor;
    double spot_sum = 0.0;
    std::size_t spot_n = 0;
    for (const auto& q : raw) {
        if (!cfg.exclude_dates.empty() && cfg.exclude_dates.count(q.timestamp.substr(0, 10))) {
            drop("excluded date");
            continue;
        }
        if (!(q.tenor > 0.0) || !(q.strike > 0.0)) {
            drop("non-positive tenor or strike");
            continue;
        }
        if (!(q.bid > 0.0)) {
            drop("zero bid");
            continue;
        }
        if (!(q.ask > 0.0)) {
            drop("zero ask");
            continue;
        }
        if (q.ask < q.bid) {
            drop("crossed quote");
            continue;
        }
        if (q.underlying > 0.0) {
            spot_sum += q.underlying;
            ++spot_n;
        }
        by_tenor[q.tenor].push_back(q);
    }

    for (auto& [tau, quotes] : by_tenor) {
        TenorSlice slice;
        slice.tenor = tau;
        try {
            slice.forward = implied_forward(quotes, cfg.rate);
        } catch (const DomainError&) {
            drop("no call/put pair", quotes.size());
            continue;
        }
        if (!(slice.forward > 0.0)) {
            drop("non-positive forward", quotes.size());
            continue;
        }

        std::vector<OptionQuote> priced;
        for (auto& q : quotes) {
            try {
                q.mid_iv = detail::mid_iv(q, slice.forward, cfg.rate);
                priced.push_back(q);
            } catch (const BoundViolation&) {
                drop("arbitrage bounds");
            }
        }

        // ATM vol: OTM quote (put below F, call at or above) nearest the forward
        const OptionQuote* atm = nullptr;
        for (const auto& q : priced) {
            const bool otm = q.is_call ? q.strike >= slice.forward : q.strike < slice.forward;
            if (!otm) continue;
            if (!atm || std::abs(q.strike - slice.forward) < std::abs(atm->strike - slice.forward) ||
                (std::abs(q.strike - slice.forward) == std::abs(atm->strike - slice.forward) && q.is_call))
                atm = &q;
        }
        if (!atm) {
            drop("no ATM vol", priced.size());
            continue;
        }
        slice.atm_vol = atm->mid_iv;

        for (auto& q : priced) {
            q.moneyness = log_moneyness(q.strike, slice.forward, slice.atm_vol, tau);
            if (q.moneyness > cfg.m_lower && q.moneyness < cfg.m_upper)
                slice.quotes.push_back(q);
            else
                drop("moneyness window");
        }
        std::sort(slice.quotes.begin(), slice.quotes.end(), [](const OptionQuote& a, const OptionQuote& b) {
            return a.strike != b.strike ? a.strike < b.strike : a.is_call < b.is_call;
        });
        if (!slice.quotes.empty()) out.surface.slices.push_back(std::move(slice));
    }

    while (out.surface.slices.size() > cfg.max_tenors) {
        drop("beyond max tenors", out.surface.slices.back().quotes.size());
        out.surface.slices.pop_back();
    }
    if (out.surface.slices.empty()) throw DomainError("no tenor survives the filters");
    out.surface.rate = cfg.rate;
    out.surface.spot = spot_n ? spot_sum / spot_n : out.surface.slices.front().forward;
    return out;
}

// "YYYY-MM-DD HH:MM[:SS]" or ISO "YYYY-MM-DDTHH:MM[:SS]" (UTC), seconds since epoch.
inline double parse_datetime(const std::string& text) {
    std::string s = text;
    std::replace(s.begin(), s.end(), 'T', ' ');
    std::tm tm{};
    std::istringstream in(s);
    in >> std::get_time(&tm, "%Y-%m-%d %H:%M:%S");
    if (in.fail()) {
        tm = {};
        std::istringstream in2(s);
        in2 >> std::get_time(&tm, "%Y-%m-%d %H:%M");
        if (in2.fail()) throw DomainError("cannot parse datetime '" + text + "'");
    }
    return static_cast<double>(timegm(&tm));
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) {
        field.erase(0, field.find_first_not_of(" \t\r"));
        field.erase(field.find_last_not_of(" \t\r") + 1);
        out.push_back(field);
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

// Quote CSV with columns timestamp, expiry_datetime, strike, cp_flag, bid,
// ask, underlying (extra columns ignored).
inline std::vector<OptionQuote> read_quotes_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw DomainError("quote file is empty");
    const auto header = split_csv_line(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
    for (const char* name : {"timestamp", "expiry_datetime", "strike", "cp_flag", "bid", "ask", "underlying"})
        if (!col.count(name)) throw DomainError(std::string("quote file lacks column '") + name + "'");

    std::vector<OptionQuote> out;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto f = split_csv_line(line);
        if (f.size() < header.size()) throw DomainError("quote file row " + std::to_string(row) + " is short");
        try {
            OptionQuote q;
            q.timestamp = f[col["timestamp"]];
            q.expiry = f[col["expiry_datetime"]];
            q.strike = std::stod(f[col["strike"]]);
            const std::string cp = f[col["cp_flag"]];
            require(cp == "C" || cp == "P" || cp == "c" || cp == "p", "cp_flag must be C or P");
            q.is_call = cp == "C" || cp == "c";
            q.bid = std::stod(f[col["bid"]]);
            q.ask = std::stod(f[col["ask"]]);
            q.underlying = std::stod(f[col["underlying"]]);
            q.tenor = (parse_datetime(q.expiry) - parse_datetime(q.timestamp)) / kSecondsPerYear;
            out.push_back(q);
        } catch (const std::invalid_argument& e) {
            throw DomainError("quote file row " + std::to_string(row) + ": " + e.what());
        }
    }
    return out;
}

inline std::vector<OptionQuote> read_quotes_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open quote file '" + path + "'");
    return read_quotes_csv(in);
}

// Groups quotes by snapshot timestamp.
inline std::map<std::string, std::vector<OptionQuote>> split_snapshots(const std::vector<OptionQuote>& quotes) {
    std::map<std::string, std::vector<OptionQuote>> out;
    for (const auto& q : quotes) out[q.timestamp].push_back(q);
    return out;
}

inline std::string format_datetime(double epoch_seconds) {
    const std::time_t t = static_cast<std::time_t>(std::llround(epoch_seconds));
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%d %H:%M:%S");
    return out.str();
}

inline void write_surface_csv(std::ostream& out, const Surface& s) {
    out << "timestamp,expiry_datetime,strike,cp_flag,bid,ask,underlying,tenor,forward,atm_vol,moneyness,bucket,mid_iv\n";
    out << std::setprecision(17);
    for (const auto& slice : s.slices)
        for (const auto& q : slice.quotes)
            out << q.timestamp << ',' << q.expiry << ',' << q.strike << ',' << (q.is_call ? 'C' : 'P') << ','
                << q.bid << ',' << q.ask << ',' << q.underlying << ',' << q.tenor << ',' << slice.forward << ','
                << slice.atm_vol << ',' << q.moneyness << ',' << bucket_name(bucket(q.moneyness)) << ','
                << q.mid_iv << '\n';
}

}  // namespace edgepp
