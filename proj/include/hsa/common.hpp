#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace hsa {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Raised when a caller breaks a documented precondition (dimension mismatch,
/// non-finite input, bad parameter range).
class ContractViolation : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a geometric quantity is undefined at the requested point.
class SingularityError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Raised when the safety constraints alone admit no control input.
class InfeasibleError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ContractViolation(what);
}

inline bool all_finite(const Vec& v) { return v.allFinite(); }

inline void require_same_dim(const Vec& a, const Vec& b, const char* what) {
  if (a.size() != b.size()) {
    throw ContractViolation(std::string(what) + ": dimension mismatch (" +
                            std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()) + ")");
  }
}

}  // namespace hsa
