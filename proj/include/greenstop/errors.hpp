#pragma once

#include <stdexcept>
#include <string>

namespace greenstop {

/// Invalid or inconsistent user-supplied configuration / parameters.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// A computed kernel grid failed its mass / identity / positivity checks.
/// The message advises which resolution knob (z_max, n_z) to raise.
class GridResolutionError : public std::runtime_error {
public:
    explicit GridResolutionError(const std::string& what) : std::runtime_error(what) {}
};

/// The residual never changes sign on the (expanded) search bracket.
class NoThresholdError : public std::runtime_error {
public:
    explicit NoThresholdError(const std::string& what) : std::runtime_error(what) {}
};

/// A kernel row was requested at a source point the grid does not hold.
class RowLookupError : public std::runtime_error {
public:
    explicit RowLookupError(const std::string& what) : std::runtime_error(what) {}
};

/// A quadrature or transform did not converge within its budget.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace greenstop
