#pragma once

#include <stdexcept>
#include <string>

namespace proxal {

/// A user-supplied evaluator returned NaN/Inf, or an I/O-free numeric
/// operation could not proceed. `coordinate` is the offending index when
/// known, -1 otherwise.
class EvaluationError : public std::runtime_error {
 public:
  explicit EvaluationError(const std::string& what, int coordinate = -1)
      : std::runtime_error(what), coordinate_(coordinate) {}
  int coordinate() const { return coordinate_; }

 private:
  int coordinate_;
};

/// Invalid configuration: out-of-range parameter, unknown key, malformed
/// problem description.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The constraint Jacobian lost full column rank at the query point.
class RankDeficiencyError : public std::runtime_error {
 public:
  RankDeficiencyError(const std::string& what, double sigma_min)
      : std::runtime_error(what), sigma_min_(sigma_min) {}
  double sigma_min() const { return sigma_min_; }

 private:
  double sigma_min_;
};

/// A constants-ledger field required by a formula was left unspecified.
class MissingConstantError : public std::runtime_error {
 public:
  explicit MissingConstantError(const std::string& field)
      : std::runtime_error("constants ledger field '" + field + "' is unknown"),
        field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Dense verification was requested above the supported dimension.
class UnsupportedSizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Phase-I terminated at an approximate critical point of the constraint
/// violation that is not close to feasible.
class InfeasibleCriticalError : public std::runtime_error {
 public:
  explicit InfeasibleCriticalError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace proxal
