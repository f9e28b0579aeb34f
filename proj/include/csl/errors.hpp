#pragma once

#include <stdexcept>
#include <string>

namespace csl {

// Numerical failure (quadrature non-convergence, non-finite state, ...).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// File-system / serialization failure.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Scenario schema violation (unknown key, wrong type, broken invariant).
class ScenarioError : public std::runtime_error {
public:
    explicit ScenarioError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace csl
