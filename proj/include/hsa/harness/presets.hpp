#pragma once

#include "hsa/harness/scenario.hpp"

namespace hsa::presets {

/// Straight approach to a wall 6 m ahead under a trapezoidal command that is
/// still pointing at the wall when the run ends.
inline Scenario wall_1d(ControllerKind controller, double k_v, double e_max) {
  Scenario s;
  s.name = "wall_1d";
  s.dim = 1;
  s.dt = 0.02;
  s.duration = 30.0;
  s.initial = RobotState::at_rest(1);
  s.barriers.push_back(HalfPlane{Vec::Ones(1), 6.0});
  s.controller = controller;
  s.stability = StabilityParams{1.0, k_v, 0.5, e_max};
  s.command = Trapezoid{4.0, 40.0, 4.0, 0.4, 0, 1};
  return s;
}

/// Same geometry with the output-passivity force step (no energy tank).
inline Scenario wall_1d_passivity(double k_v) {
  Scenario s = wall_1d(ControllerKind::Scf, k_v, 0.0);
  s.name = "wall_1d_passivity";
  s.ablation.passivity_baseline = true;
  return s;
}

/// Lightly damped spring-damper operator pushing toward a nearby wall. Without
/// the L2 constraint the contact/release cycle never dies out.
inline Scenario operator_wall_1d(bool disable_l2) {
  Scenario s;
  s.name = disable_l2 ? "operator_wall_1d_no_l2" : "operator_wall_1d";
  s.dim = 1;
  s.dt = 0.02;
  s.duration = 30.0;
  s.initial = RobotState::at_rest(1);
  s.barriers.push_back(HalfPlane{Vec::Ones(1), 1.0});
  s.controller = ControllerKind::Scf;
  s.stability = StabilityParams{1.0, 1.0, 0.5, 0.2};
  SpringDamperOperator op;
  op.p = 0.08;
  op.q = 0.5;
  op.set_velocity = Vec::Constant(1, 1.0);
  op.x_vd = Vec::Constant(1, 1.0);
  op.x_vd_rate = Vec::Zero(1);
  s.command = op;
  s.ablation.disable_l2 = disable_l2;
  return s;
}

}  // namespace hsa::presets
