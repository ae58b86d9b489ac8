#pragma once

#include <stdexcept>
#include <string>

namespace mfg {

// Incompatible grids or array shapes.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Evaluation outside the mathematical domain (negative density, etc.).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Requested derivative order exceeds what the plan supports.
struct OrderError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A non-finite value appeared mid-operation.  Operations abort rather than
// propagate NaNs.
struct NonFiniteError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The masked operator stopped being SPD; points at an assembly bug.
struct BreakdownError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Configuration file problems, with the offending key and line when known.
struct ConfigError : std::runtime_error {
    std::string key;
    int line = 0;
    ConfigError(const std::string& msg, std::string k = {}, int ln = 0)
        : std::runtime_error(msg), key(std::move(k)), line(ln) {}
};

}  // namespace mfg
