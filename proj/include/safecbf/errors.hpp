#pragma once

#include <stdexcept>
#include <string>

namespace safecbf {

/// Integrator saw a non-finite derivative component.
class IntegrationFault : public std::runtime_error {
public:
  IntegrationFault(int component, const std::string& msg)
      : std::runtime_error(msg), component_(component) {}
  int component() const noexcept { return component_; }

private:
  int component_;
};

/// Finite-difference probe returned a non-finite value.
class GradientFault : public std::runtime_error {
public:
  GradientFault(int coordinate, const std::string& msg)
      : std::runtime_error(msg), coordinate_(coordinate) {}
  int coordinate() const noexcept { return coordinate_; }

private:
  int coordinate_;
};

/// The inscribed-ball LP has no finite optimum (no bounding rows).
class UnboundedFeasibleSpace : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Polytope empty or too thin to host an ellipsoid.
class InfeasibleSpace : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Iterative solver ran out of iterations; carries the final residual.
class ConvergenceFailure : public std::runtime_error {
public:
  ConvergenceFailure(const std::string& msg, double residual)
      : std::runtime_error(msg), residual_(residual) {}
  double residual() const noexcept { return residual_; }

private:
  double residual_;
};

/// Barrier evaluated inside its singular core.
class SingularBarrier : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Scenario file could not be parsed; carries the offending line.
class ConfigError : public std::runtime_error {
public:
  ConfigError(int line, const std::string& msg)
      : std::runtime_error(msg), line_(line) {}
  int line() const noexcept { return line_; }

private:
  int line_;
};

/// Some barrier is already violated at the initial state.
class InfeasibleInitialState : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace safecbf
