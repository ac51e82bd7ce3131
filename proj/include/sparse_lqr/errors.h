#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace sparse_lqr {

// A matrix or vector does not have the shape the model requires.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A cost matrix fails its symmetry or definiteness requirement. Carries the
// name of the offending matrix and its smallest eigenvalue.
class DefinitenessError : public std::invalid_argument {
 public:
  DefinitenessError(std::string matrix, double eigenvalue,
                    const std::string& what)
      : std::invalid_argument(what),
        matrix_(std::move(matrix)),
        eigenvalue_(eigenvalue) {}

  const std::string& matrix() const { return matrix_; }
  double eigenvalue() const { return eigenvalue_; }

 private:
  std::string matrix_;
  double eigenvalue_;
};

// A factorization failed during a recursion.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The stability margin is not positive, so bounds that need it are undefined.
class AssumptionViolated : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sparse_lqr
