#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace spf {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Support set: ascending, duplicate-free indices.
using IndexSet = std::vector<Index>;

/// Deterministic tie resolution for support selection.
enum class TieBreak { kLowestIndex };

/// Restricted least-squares hit a numerically rank-deficient column
/// submatrix; carries the offending support.
class SingularSystemError : public std::runtime_error {
 public:
  SingularSystemError(std::string what, IndexSet support)
      : std::runtime_error(std::move(what)), support_(std::move(support)) {}
  const IndexSet& support() const { return support_; }

 private:
  IndexSet support_;
};

/// An input that is identically zero where a direction is required.
class DegenerateInputError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace spf
