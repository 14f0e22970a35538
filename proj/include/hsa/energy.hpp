#pragma once

#include "hsa/dynamics.hpp"
#include "hsa/optkernel.hpp"

namespace hsa {

/// Gains of the force-feedback stability layer. The L2 gain from commanded
/// velocity to force is 1/k^2.
struct StabilityParams {
  double k = 1.0;        // L2-gain knob
  double k_v = 1.0;      // storage-function weight
  double dt_ref = 0.5;   // tank horizon in the E/dt_ref terms
  double e_max = 0.2;    // tank cap

  void validate() const {
    require(k > 0.0, "StabilityParams: k must be positive");
    require(k_v > 0.0, "StabilityParams: k_v must be positive");
    require(dt_ref > 0.0, "StabilityParams: dt_ref must be positive");
    require(e_max >= 0.0, "StabilityParams: e_max must be non-negative");
  }
};

struct EnergyTank {
  double level = 0.0;  // E
  double flow = 0.0;   // last applied dE/dt
};

/// Running integrals used to audit the finite-gain bound of a closed-loop run.
struct L2Ledger {
  double int_force_sq = 0.0;
  double int_cmd_sq = 0.0;
  double v0 = 0.0;
  double e0 = 0.0;
  double beta_extra = 0.0;

  void accumulate(const Vec& force, const Vec& x_vd, double dt) {
    int_force_sq += force.squaredNorm() * dt;
    int_cmd_sq += x_vd.squaredNorm() * dt;
  }
};

struct LedgerAudit {
  bool holds = false;
  double margin = 0.0;
};

inline double storage(const RobotState& state, const StabilityParams& params) {
  return 0.5 * params.k_v * state.velocity.squaredNorm();
}

/// Rate of the storage function along the plant, k_v v^T u.
inline double storage_rate(const RobotState& state, const ControlInput& u,
                           const StabilityParams& params) {
  require_same_dim(state.velocity, u.acceleration, "storage_rate");
  return params.k_v * state.velocity.dot(u.acceleration);
}

/// Right-hand side of ||F||^2 <= (1/k^2)(2kE/dt_ref + |x_vd|^2) - (2 k_v/k) v^T u.
/// Negative when the feasibility row is violated.
inline double l2_force_bound(const RobotState& state, const Vec& x_vd,
                             const EnergyTank& tank, const ControlInput& u,
                             const StabilityParams& params) {
  require_same_dim(state.velocity, x_vd, "l2_force_bound");
  const double k = params.k;
  return (2.0 * k * tank.level / params.dt_ref + x_vd.squaredNorm()) / (k * k) -
         (2.0 * params.k_v / k) * state.velocity.dot(u.acceleration);
}

/// Row in u that keeps the force bound non-negative:
/// -2 k k_v v^T u + (2kE/dt_ref + |x_vd|^2) >= 0.
inline AffineRow l2_feasibility_row(const RobotState& state, const Vec& x_vd,
                                    const EnergyTank& tank,
                                    const StabilityParams& params) {
  require_same_dim(state.velocity, x_vd, "l2_feasibility_row");
  const double k = params.k;
  return {-2.0 * k * params.k_v * state.velocity,
          2.0 * k * tank.level / params.dt_ref + x_vd.squaredNorm()};
}

/// eps = |x_vd|^2/(2k) - Vdot - (k/2)|F|^2.
inline double tank_flow(const Vec& force, const Vec& x_vd, const RobotState& state,
                        const ControlInput& u, const StabilityParams& params) {
  const double k = params.k;
  return x_vd.squaredNorm() / (2.0 * k) - storage_rate(state, u, params) -
         0.5 * k * force.squaredNorm();
}

inline EnergyTank tank_update(const EnergyTank& tank, const Vec& force,
                              const Vec& x_vd, const RobotState& state,
                              const ControlInput& u, double dt,
                              const StabilityParams& params) {
  require(dt > 0.0, "tank_update: dt must be positive");
  EnergyTank next;
  next.flow = tank_flow(force, x_vd, state, u, params);
  next.level = std::clamp(tank.level + next.flow * dt, 0.0, params.e_max);
  return next;
}

/// Budget a step would overdraw from the tank, expressed in ledger units
/// (the units of the integral of |F|^2).
inline double tank_deficit(const EnergyTank& tank, const Vec& force,
                           const Vec& x_vd, const RobotState& state,
                           const ControlInput& u, double dt,
                           const StabilityParams& params) {
  const double after = tank.level + tank_flow(force, x_vd, state, u, params) * dt;
  return after < 0.0 ? -after * 2.0 / params.k : 0.0;
}

inline L2Ledger start_ledger(const RobotState& initial, const EnergyTank& tank,
                             const StabilityParams& params) {
  L2Ledger ledger;
  ledger.v0 = storage(initial, params);
  ledger.e0 = tank.level;
  return ledger;
}

/// int |F|^2 <= (1/k^2) int |x_vd|^2 + (2/k)(V(0) + E(0)) + beta_extra.
inline LedgerAudit ledger_check(const L2Ledger& ledger,
                                const StabilityParams& params) {
  const double k = params.k;
  const double rhs = ledger.int_cmd_sq / (k * k) + (2.0 / k) * (ledger.v0 + ledger.e0) +
                     ledger.beta_extra;
  LedgerAudit out;
  out.margin = rhs - ledger.int_force_sq;
  out.holds = out.margin >= -1e-9;
  return out;
}

/// Output-passivity condition with the same storage function:
/// k_v v^T u <= x_vd^T F - k |F|^2. For a fixed u the admissible forces form
/// the ball |F - x_vd/(2k)|^2 <= |x_vd|^2/(4k^2) - (k_v/k) v^T u.
struct PassivityRow {
  Vec x_vd;
  Vec velocity;
  double k = 1.0;
  double k_v = 1.0;

  /// >= 0 when (u, F) is admissible.
  double slack(const Vec& u, const Vec& force) const {
    return x_vd.dot(force) - k * force.squaredNorm() - k_v * velocity.dot(u);
  }
  Vec ball_center() const { return x_vd / (2.0 * k); }
  double ball_radius_sq(const Vec& u) const {
    return x_vd.squaredNorm() / (4.0 * k * k) - (k_v / k) * velocity.dot(u);
  }
  /// Row in u keeping the force ball non-empty.
  AffineRow feasibility_row() const {
    return {-4.0 * k * k_v * velocity, x_vd.squaredNorm()};
  }
};

inline PassivityRow passivity_row(const RobotState& state, const Vec& x_vd,
                                  const StabilityParams& params) {
  require_same_dim(state.velocity, x_vd, "passivity_row");
  return {x_vd, state.velocity, params.k, params.k_v};
}

}  // namespace hsa
