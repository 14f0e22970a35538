#pragma once

#include "hsa/controller.hpp"

namespace hsa {

/// Sequential synthesis: safe u from the CBF-QP with the L2-feasibility row,
/// then the discrepancy force u - u_ref projected onto the L2 ball. When the
/// two constraint families conflict, only the CBF rows are kept and F = 0.
inline ControlDecision scf_step(const RobotState& state, const Vec& x_vd,
                                const std::vector<CbfRow>& barriers,
                                const EnergyTank& tank,
                                const StabilityParams& params,
                                const ControllerGains& gains) {
  params.validate();
  const Vec u_ref = reference_control(state, x_vd, gains.dt_ref).acceleration;

  auto rows = barriers;
  rows.push_back(l2_feasibility_row(state, x_vd, tank, params));
  const auto sol = qp_closest(u_ref, rows);
  if (!sol) return detail::fallback_decision(u_ref, barriers);

  ControlDecision out;
  out.u = ControlInput(sol->u);
  out.u_ref = u_ref;
  const Vec f_ref = sol->u - u_ref;
  const double bound = l2_force_bound(state, x_vd, tank, out.u, params);
  out.force = project_to_ball(f_ref, std::max(bound, 0.0));
  out.active_case = ActiveCase::Scf;
  out.cost = f_ref.squaredNorm();
  return out;
}

/// Baseline: the L2 force step replaced by the output-passivity condition.
/// Admissible forces form a ball, so the force step is a projection onto it.
inline ControlDecision scf_passivity_step(const RobotState& state, const Vec& x_vd,
                                          const std::vector<CbfRow>& barriers,
                                          const EnergyTank& /*tank*/,
                                          const StabilityParams& params,
                                          const ControllerGains& gains) {
  params.validate();
  const Vec u_ref = reference_control(state, x_vd, gains.dt_ref).acceleration;
  const PassivityRow passivity = passivity_row(state, x_vd, params);

  auto rows = barriers;
  rows.push_back(passivity.feasibility_row());
  const auto sol = qp_closest(u_ref, rows);
  if (!sol) return detail::fallback_decision(u_ref, barriers);

  ControlDecision out;
  out.u = ControlInput(sol->u);
  out.u_ref = u_ref;
  const Vec f_ref = sol->u - u_ref;
  const Vec center = passivity.ball_center();
  const double radius_sq = std::max(passivity.ball_radius_sq(sol->u), 0.0);
  out.force = center + project_to_ball(f_ref - center, radius_sq);
  out.active_case = ActiveCase::PassivityBaseline;
  out.cost = f_ref.squaredNorm();
  return out;
}

/// Ablation: CBF-QP only, force rendered as u - u_ref with no stability limit.
inline ControlDecision scf_no_l2_step(const RobotState& state, const Vec& x_vd,
                                      const std::vector<CbfRow>& barriers,
                                      const ControllerGains& gains) {
  const Vec u_ref = reference_control(state, x_vd, gains.dt_ref).acceleration;
  const auto sol = detail::safe_control_or_throw(u_ref, barriers);
  ControlDecision out;
  out.u = ControlInput(sol.u);
  out.u_ref = u_ref;
  out.force = sol.u - u_ref;
  out.active_case = ActiveCase::ScfNoL2;
  out.cost = out.force.squaredNorm();
  return out;
}

}  // namespace hsa
