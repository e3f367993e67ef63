#ifndef WTAD_ERRORS_HPP
#define WTAD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace wtad {

/// Malformed or inconsistent input data (bad CSV rows, schema mismatches,
/// invalid configurations). Maps to CLI exit code 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure (NaN/Inf cost, solver non-convergence). Maps to CLI
/// exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace wtad

#endif
