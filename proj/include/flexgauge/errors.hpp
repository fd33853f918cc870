#pragma once

#include <stdexcept>
#include <string>

namespace flexgauge {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

// Even the zero-deviation operating point cannot be served within the
// constraints and budget.
class BaseInfeasible : public Error {
 public:
  explicit BaseInfeasible(double eta)
      : Error("base case infeasible at zero deviation (eta = " + std::to_string(eta) + ")"), eta_(eta) {}
  double eta() const { return eta_; }

 private:
  double eta_;
};

class IterationLimit : public Error {
 public:
  explicit IterationLimit(int iterations)
      : Error("iteration limit reached after " + std::to_string(iterations) + " iterations"),
        iterations_(iterations) {}
  int iterations() const { return iterations_; }

 private:
  int iterations_;
};

}  // namespace flexgauge
