#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <string_view>

namespace pclag {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Malformed arguments: dimension mismatches, out-of-range parameters.
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// The KKT system of a reference instance is singular.
struct DegenerateInstance : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A block subproblem has no unique minimizer.
struct IllPosedBlock : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The objective cannot evaluate the requested subproblem in closed form.
struct UnsupportedOracle : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Solver / schedule / parameter combination that the method does not admit.
struct ConfigurationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A parameter check needs a strong-convexity or smoothness constant that was not supplied.
struct ModulusRequired : ConfigurationError {
  using ConfigurationError::ConfigurationError;
};

/// A certificate was requested without a reference saddle point.
struct ReferenceRequired : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ProblemKind { P1, P2, P3 };
enum class Variant { Once, Twice, Penalty };
enum class Rate { K, K2 };
enum class Metric { Gram, ScaledIdentity };

constexpr std::string_view to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::P1: return "p1";
    case ProblemKind::P2: return "p2";
    case ProblemKind::P3: return "p3";
  }
  return "?";
}

constexpr std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::Once: return "once";
    case Variant::Twice: return "twice";
    case Variant::Penalty: return "penalty";
  }
  return "?";
}

constexpr std::string_view to_string(Rate r) { return r == Rate::K ? "k" : "k2"; }

constexpr std::string_view to_string(Metric m) {
  return m == Metric::Gram ? "gram" : "scaled_identity";
}

inline void require(bool cond, const std::string& what) {
  if (!cond) throw InputError(what);
}

}  // namespace pclag
