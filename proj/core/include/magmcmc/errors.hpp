#pragma once

#include <stdexcept>
#include <string>

namespace magmcmc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotSkewSymmetric : public Error {
 public:
  explicit NotSkewSymmetric(double defect)
      : Error("matrix is not skew-symmetric (defect " + std::to_string(defect) + ")"),
        defect_(defect) {}
  double defect() const { return defect_; }

 private:
  double defect_;
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

// Raised when a gradient oracle returns NaN or infinity.
class NonFiniteGradient : public NumericalFailure {
 public:
  NonFiniteGradient() : NumericalFailure("gradient oracle returned a non-finite value") {}
};

class RankDeficient : public Error {
 public:
  using Error::Error;
};

class WrongComponent : public Error {
 public:
  using Error::Error;
};

class InitializationInfeasible : public Error {
 public:
  using Error::Error;
};

class NonPositiveAlpha : public Error {
 public:
  using Error::Error;
};

class ConvergenceFailure : public Error {
 public:
  ConvergenceFailure(int iterations, double residual, int step_index = -1)
      : Error("Newton solve for the position multiplier did not converge after " +
              std::to_string(iterations) + " iterations (residual " + std::to_string(residual) +
              (step_index >= 0 ? ", step " + std::to_string(step_index) : std::string()) + ")"),
        iterations_(iterations),
        residual_(residual),
        step_index_(step_index) {}

  int iterations() const { return iterations_; }
  double residual() const { return residual_; }
  int step_index() const { return step_index_; }

 private:
  int iterations_;
  double residual_;
  int step_index_;
};

class DegenerateSeries : public Error {
 public:
  DegenerateSeries() : Error("series has zero variance") {}
};

class SeriesTooShort : public Error {
 public:
  explicit SeriesTooShort(std::size_t n)
      : Error("series of length " + std::to_string(n) + " is too short (need at least 10)") {}
};

}  // namespace magmcmc
