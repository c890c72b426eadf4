#pragma once

#include <stdexcept>
#include <string>

namespace adsens {

/// Bad input: shapes, preconditions, config strings. CLI exit code 2.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Numerical failure: NaN, rank deficiency, solver non-convergence. CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace adsens
