#pragma once

#include <stdexcept>
#include <string>

namespace nuidx {

/// Parameter outside the admissible region of a theoretical quantity.
class domain_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A confounder design whose solved conditional probabilities leave (0,1).
class infeasible_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data (CSV schema, dimension mismatch, degenerate strata).
class data_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user configuration.
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Solver failed to reach its tolerance within the iteration budget.
class convergence_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fitted intercept ran past the separation cap.
class separation_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A statistic that is undefined for the given input (constant vector, single class).
class undefined_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nuidx
