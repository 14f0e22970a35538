#pragma once

#include <variant>

#include "hsa/dynamics.hpp"
#include "hsa/optkernel.hpp"

namespace hsa {

/// h(x_p) with its analytic gradient and Hessian.
struct BarrierEval {
  double value = 0.0;
  Vec gradient;
  Mat hessian;
};

/// Wall: h = offset - normal . p (positive on the side the normal points away from).
struct HalfPlane {
  Vec normal;
  double offset = 0.0;
};

/// Round obstacle, inflated by the robot radius.
struct Disc {
  Vec center;
  double radius = 0.0;
  double robot_radius = 0.0;
};

/// Rounded rectangle approximation with half-lengths a, b and corner radius r
/// (2-D only): h = |dx/a|^(2a/r) + |dy/b|^(2b/r) - 1.
struct SuperEllipse {
  Vec center;
  double a = 0.0;
  double b = 0.0;
  double r = 0.0;
};

using BarrierShape = std::variant<HalfPlane, Disc, SuperEllipse>;

/// A CBF inequality is an affine row in u.
using CbfRow = AffineRow;

inline void validate(const BarrierShape& shape) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, HalfPlane>) {
          require(s.normal.size() >= 1 && std::abs(s.normal.norm() - 1.0) < 1e-9,
                  "HalfPlane: normal must have unit norm");
        } else if constexpr (std::is_same_v<T, Disc>) {
          require(s.radius > 0.0, "Disc: radius must be positive");
          require(s.robot_radius >= 0.0, "Disc: robot radius must be non-negative");
        } else {
          require(s.center.size() == 2, "SuperEllipse: 2-D only");
          require(s.a > 0.0 && s.b > 0.0 && s.r > 0.0,
                  "SuperEllipse: a, b, r must be positive");
        }
      },
      shape);
}

inline Eigen::Index shape_dim(const BarrierShape& shape) {
  return std::visit(
      [](const auto& s) -> Eigen::Index {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, HalfPlane>) return s.normal.size();
        else return s.center.size();
      },
      shape);
}

namespace detail {

// |z|^e with derivatives, for e >= 2.
struct PowTerm {
  double value, first, second;
};

inline PowTerm abs_pow(double z, double e) {
  const double az = std::abs(z);
  const double s = z < 0.0 ? -1.0 : 1.0;
  return {std::pow(az, e), e * std::pow(az, e - 1.0) * s,
          e * (e - 1.0) * std::pow(az, e - 2.0)};
}

}  // namespace detail

inline BarrierEval evaluate(const BarrierShape& shape, const Vec& position) {
  require(all_finite(position), "evaluate: non-finite position");
  require(shape_dim(shape) == position.size(), "evaluate: dimension mismatch");
  const Eigen::Index d = position.size();

  return std::visit(
      [&](const auto& s) -> BarrierEval {
        using T = std::decay_t<decltype(s)>;
        BarrierEval out;
        if constexpr (std::is_same_v<T, HalfPlane>) {
          out.value = s.offset - s.normal.dot(position);
          out.gradient = -s.normal;
          out.hessian = Mat::Zero(d, d);
        } else if constexpr (std::is_same_v<T, Disc>) {
          const Vec diff = position - s.center;
          const double dist = diff.norm();
          if (dist < 1e-12) throw SingularityError("Disc barrier evaluated at its center");
          const Vec n = diff / dist;
          out.value = dist - (s.radius + s.robot_radius);
          out.gradient = n;
          out.hessian = (Mat::Identity(d, d) - n * n.transpose()) / dist;
        } else {
          const double ex = 2.0 * s.a / s.r;
          const double ey = 2.0 * s.b / s.r;
          const auto tx = detail::abs_pow((position[0] - s.center[0]) / s.a, ex);
          const auto ty = detail::abs_pow((position[1] - s.center[1]) / s.b, ey);
          out.value = tx.value + ty.value - 1.0;
          out.gradient = Vec(2);
          out.gradient << tx.first / s.a, ty.first / s.b;
          out.hessian = Mat::Zero(2, 2);
          out.hessian(0, 0) = tx.second / (s.a * s.a);
          out.hessian(1, 1) = ty.second / (s.b * s.b);
        }
        return out;
      },
      shape);
}

/// Second-order CBF condition for the double integrator as a row in u:
/// grad^T u + (v^T H v + k1 h + k2 grad^T v) >= 0.
inline CbfRow cbf_row(const BarrierEval& eval, const RobotState& state,
                      double k1, double k2) {
  require(k1 > 0.0 && k2 > 0.0, "cbf_row: (k1, k2) must be a Hurwitz pair");
  require_same_dim(eval.gradient, state.velocity, "cbf_row");
  const Vec& v = state.velocity;
  CbfRow row;
  row.coeff = eval.gradient;
  row.constant = v.dot(eval.hessian * v) + k1 * eval.value + k2 * eval.gradient.dot(v);
  return row;
}

}  // namespace hsa
