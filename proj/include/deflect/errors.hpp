#pragma once

#include <stdexcept>
#include <string>

namespace deflect {

// Raised when a scenario configuration is malformed or inconsistent.
// The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a numerical guard trips (truncation mass leaking into the
// boundary shell, aliasing in a momentum spectrum, Fresnel sampling too
// coarse, ...).  The result would be untrustworthy, so we refuse to emit it.
// The CLI maps this to exit code 3.
class NumericalGuardError : public std::runtime_error {
public:
    explicit NumericalGuardError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace deflect
