#pragma once

#include <stdexcept>
#include <string>

namespace gouysim {

/// Invalid physical parameters or configuration values.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Malformed input files (CSV/JSON).
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Quadrature/optimizer/grid failures.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace gouysim
