#pragma once

#include <stdexcept>
#include <string>

namespace cgfem {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// A mesh element has a nonpositive Jacobian determinant somewhere.
class DegenerateMesh : public Error {
 public:
  using Error::Error;
};

/// A function with a singularity was asked for its gradient at the singular point.
class SingularPoint : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class InternalInvariant : public Error {
 public:
  using Error::Error;
};

/// The local node set could not be grown into a unisolvent set.
class UnisolvenceFailure : public Error {
 public:
  UnisolvenceFailure(int node, const std::string& what)
      : Error("node " + std::to_string(node) + ": " + what), node_(node) {}
  int node() const { return node_; }

 private:
  int node_;
};

class SolverFailure : public Error {
 public:
  SolverFailure(const std::string& what, double residual)
      : Error(what + " (relative residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Convergence-slope fit on data containing a nonpositive value (exact reproduction).
class DegenerateData : public Error {
 public:
  using Error::Error;
};

}  // namespace cgfem
