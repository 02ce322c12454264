#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace spheredm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Thrown when a computation fails numerically (singular system, lost
/// positive definiteness, iteration breakdown). Distinct from
/// std::invalid_argument, which signals a violated precondition.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Unisolvency failures: a polynomial block without full column rank.
class UnisolvencyError : public NumericalError {
 public:
  explicit UnisolvencyError(const std::string& what) : NumericalError(what) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

inline void check_finite(const Matrix& a, const std::string& name) {
  if (!a.allFinite()) throw std::invalid_argument(name + ": non-finite entries");
}

}  // namespace spheredm
