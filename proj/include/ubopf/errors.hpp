#pragma once

#include <stdexcept>
#include <string>

namespace ubopf {

/// Input file could not be parsed against the network/scenario schema.
class ParseError : public std::runtime_error {
  public:
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A network or scenario violates a structural invariant.
class ValidationError : public std::runtime_error {
  public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A numerical operation failed (singular matrix, non-convergence, ...).
class NumericalError : public std::runtime_error {
  public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

/// An optimization problem could not be formulated from the given network.
class FormulationError : public std::runtime_error {
  public:
    explicit FormulationError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ubopf
