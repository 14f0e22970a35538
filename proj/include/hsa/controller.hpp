#pragma once

#include <string_view>

#include "hsa/barriers.hpp"
#include "hsa/energy.hpp"

namespace hsa {

enum class ActiveCase {
  Scf,
  JcfC1,
  JcfC2,
  JcfC3,
  JcfC4,
  JcfC5,
  JcfC6,
  Fallback,
  PassivityBaseline,
  ScfNoL2,
};

inline std::string_view to_string(ActiveCase c) {
  switch (c) {
    case ActiveCase::Scf: return "SCF";
    case ActiveCase::JcfC1: return "C1";
    case ActiveCase::JcfC2: return "C2";
    case ActiveCase::JcfC3: return "C3";
    case ActiveCase::JcfC4: return "C4";
    case ActiveCase::JcfC5: return "C5";
    case ActiveCase::JcfC6: return "C6";
    case ActiveCase::Fallback: return "FALLBACK";
    case ActiveCase::PassivityBaseline: return "PASSIVITY";
    case ActiveCase::ScfNoL2: return "SCF_NOL2";
  }
  return "?";
}

/// Output of one synthesis step. `force` is what gets rendered to the operator.
struct ControlDecision {
  ControlInput u;
  Vec u_ref;
  Vec force;
  ActiveCase active_case = ActiveCase::Scf;
  bool feasible = true;
  double cost = 0.0;
};

/// CBF gains (s^2 + k2 s + k1 must be Hurwitz) and the reference-controller
/// horizon.
struct ControllerGains {
  double k1 = 1.0;
  double k2 = 2.0;
  double dt_ref = 0.5;
};

/// u_ref = (x_vd - v) / dt_ref.
inline ControlInput reference_control(const RobotState& state, const Vec& x_vd,
                                      double dt_ref) {
  require(dt_ref > 0.0, "reference_control: dt_ref must be positive");
  require_same_dim(state.velocity, x_vd, "reference_control");
  return ControlInput((x_vd - state.velocity) / dt_ref);
}

/// CBF rows for every barrier at the current state.
inline std::vector<CbfRow> barrier_rows(const std::vector<BarrierShape>& shapes,
                                        const RobotState& state,
                                        const ControllerGains& gains) {
  std::vector<CbfRow> rows;
  rows.reserve(shapes.size());
  for (const auto& s : shapes) {
    rows.push_back(cbf_row(evaluate(s, state.position), state, gains.k1, gains.k2));
  }
  return rows;
}

namespace detail {

inline QpSolution safe_control_or_throw(const Vec& u_ref,
                                        const std::vector<CbfRow>& rows) {
  auto sol = qp_closest(u_ref, rows);
  if (!sol) throw InfeasibleError("CBF constraints admit no control input");
  return std::move(*sol);
}

inline ControlDecision fallback_decision(const Vec& u_ref,
                                         const std::vector<CbfRow>& rows) {
  ControlDecision out;
  out.u = ControlInput(safe_control_or_throw(u_ref, rows).u);
  out.u_ref = u_ref;
  out.force = Vec::Zero(u_ref.size());
  out.active_case = ActiveCase::Fallback;
  out.feasible = false;
  out.cost = (out.u.acceleration - u_ref).squaredNorm();
  return out;
}

}  // namespace detail

}  // namespace hsa
