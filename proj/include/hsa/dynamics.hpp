#pragma once

#include "hsa/common.hpp"

namespace hsa {

/// Position/velocity of the double-integrator plant. Dimension d is a runtime
/// property so 1-D and 2-D scenarios share one code path.
struct RobotState {
  Vec position;
  Vec velocity;

  RobotState() = default;
  RobotState(Vec p, Vec v) : position(std::move(p)), velocity(std::move(v)) {
    require_same_dim(position, velocity, "RobotState");
  }

  static RobotState at_rest(Eigen::Index d) {
    return {Vec::Zero(d), Vec::Zero(d)};
  }

  Eigen::Index dim() const { return position.size(); }
  bool finite() const { return all_finite(position) && all_finite(velocity); }
};

/// Acceleration command for the plant.
struct ControlInput {
  Vec acceleration;

  ControlInput() = default;
  explicit ControlInput(Vec a) : acceleration(std::move(a)) {}

  static ControlInput zero(Eigen::Index d) { return ControlInput(Vec::Zero(d)); }
  Eigen::Index dim() const { return acceleration.size(); }
};

/// Semi-implicit Euler step: velocity first, then position with the new
/// velocity.
inline RobotState step(const RobotState& state, const ControlInput& u,
                       double dt) {
  require(dt > 0.0 && std::isfinite(dt), "step: dt must be positive");
  require_same_dim(state.position, state.velocity, "step(state)");
  require_same_dim(state.velocity, u.acceleration, "step(state, u)");
  require(state.finite(), "step: non-finite state");
  require(all_finite(u.acceleration), "step: non-finite control");

  RobotState next;
  next.velocity = state.velocity + u.acceleration * dt;
  next.position = state.position + next.velocity * dt;
  return next;
}

}  // namespace hsa
