#pragma once

#include <stdexcept>
#include <string>

namespace edgepp {

// Bad inputs: out-of-domain parameters, malformed grids, empty data.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A computation that was well posed but failed numerically
// (Riccati blow-up, degenerate CF normalization, solver divergence).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Option price outside the no-arbitrage band; IV inversion impossible.
class BoundViolation : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Total implied variance decreases between two tenors.
class CalendarArbitrage : public std::domain_error {
public:
    CalendarArbitrage(std::size_t first, std::size_t second, const std::string& what)
        : std::domain_error(what), first_tenor(first), second_tenor(second) {}

    std::size_t first_tenor;
    std::size_t second_tenor;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw DomainError(msg);
}

}  // namespace edgepp
