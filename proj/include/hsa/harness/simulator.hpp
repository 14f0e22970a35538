#pragma once

#include <limits>
#include <optional>

#include "hsa/harness/scenario.hpp"
#include "hsa/scf.hpp"

namespace hsa {

struct TraceRow {
  double t = 0.0;
  Vec position;
  Vec velocity;
  Vec x_vd;
  Vec u_ref;
  Vec u;
  Vec force;
  double h_min = std::numeric_limits<double>::infinity();
  double energy = 0.0;
  double epsilon = 0.0;
  double ledger_margin = 0.0;
  double beta_extra = 0.0;
  ActiveCase active_case = ActiveCase::Scf;
  bool feasible = true;
};

inline double h_min(const std::vector<BarrierShape>& shapes, const Vec& position) {
  double out = std::numeric_limits<double>::infinity();
  for (const auto& s : shapes) out = std::min(out, evaluate(s, position).value);
  return out;
}

/// Closed loop: command source -> controller -> plant -> tank/ledger.
/// Each call to advance() produces one trace row for the state at time t.
class Simulator {
public:
  explicit Simulator(Scenario scenario) : scenario_(std::move(scenario)) {
    scenario_.validate();
    reset();
  }

  void reset() {
    state_ = scenario_.initial;
    command_ = scenario_.command;
    tank_ = EnergyTank{scenario_.e0, 0.0};
    ledger_ = start_ledger(state_, tank_, scenario_.stability);
    last_force_ = Vec::Zero(scenario_.dim);
    step_ = 0;
  }

  const Scenario& scenario() const { return scenario_; }
  Scenario& mutable_scenario() { return scenario_; }
  const RobotState& state() const { return state_; }
  const EnergyTank& tank() const { return tank_; }
  const L2Ledger& ledger() const { return ledger_; }
  std::size_t step_index() const { return step_; }
  double time() const { return static_cast<double>(step_) * scenario_.dt; }
  bool finished() const { return step_ >= scenario_.steps(); }
  bool end_of_data() const { return end_of_data_; }

  ControlDecision decide(const Vec& x_vd, const std::vector<CbfRow>& rows) const {
    const auto& s = scenario_;
    if (s.ablation.disable_l2) return scf_no_l2_step(state_, x_vd, rows, s.gains);
    if (s.ablation.passivity_baseline)
      return scf_passivity_step(state_, x_vd, rows, tank_, s.stability, s.gains);
    if (s.controller == ControllerKind::Jcf)
      return jcf_step(state_, x_vd, rows, tank_, s.stability, s.gains, s.weights);
    return scf_step(state_, x_vd, rows, tank_, s.stability, s.gains);
  }

  /// Throws InfeasibleError when the CBF rows alone are infeasible.
  TraceRow advance() {
    const auto& s = scenario_;
    const double t = time();
    const auto sample = command_at(command_, t, last_force_, s.dt);
    end_of_data_ = end_of_data_ || sample.end_of_data;
    const auto rows = barrier_rows(s.barriers, state_, s.gains);

    TraceRow row;
    row.t = t;
    row.position = state_.position;
    row.velocity = state_.velocity;
    row.x_vd = sample.x_vd;
    row.h_min = h_min(s.barriers, state_.position);

    ControlDecision dec;
    try {
      dec = decide(sample.x_vd, rows);
    } catch (const InfeasibleError&) {
      row.u_ref = reference_control(state_, sample.x_vd, s.gains.dt_ref).acceleration;
      row.u = Vec::Zero(s.dim);
      row.force = Vec::Zero(s.dim);
      row.energy = tank_.level;
      row.beta_extra = ledger_.beta_extra;
      row.ledger_margin = ledger_check(ledger_, s.stability).margin;
      row.active_case = ActiveCase::Fallback;
      row.feasible = false;
      failed_row_ = row;
      throw;
    }

    if (dec.active_case == ActiveCase::Fallback) {
      ledger_.beta_extra += tank_deficit(tank_, dec.force, sample.x_vd, state_, dec.u, s.dt, s.stability);
    }
    tank_ = tank_update(tank_, dec.force, sample.x_vd, state_, dec.u, s.dt, s.stability);
    ledger_.accumulate(dec.force, sample.x_vd, s.dt);

    row.u_ref = dec.u_ref;
    row.u = dec.u.acceleration;
    row.force = dec.force;
    row.energy = tank_.level;
    row.epsilon = tank_.flow;
    row.ledger_margin = ledger_check(ledger_, s.stability).margin;
    row.beta_extra = ledger_.beta_extra;
    row.active_case = dec.active_case;
    row.feasible = dec.feasible;

    state_ = step(state_, dec.u, s.dt);
    last_force_ = dec.force;
    ++step_;
    return row;
  }

  const std::optional<TraceRow>& failed_row() const { return failed_row_; }

private:
  Scenario scenario_;
  RobotState state_;
  CommandSource command_;
  EnergyTank tank_;
  L2Ledger ledger_;
  Vec last_force_;
  std::size_t step_ = 0;
  bool end_of_data_ = false;
  std::optional<TraceRow> failed_row_;
};

struct RunResult {
  std::vector<TraceRow> rows;
  std::optional<std::string> error;  // set when the run aborted
};

inline RunResult run(const Scenario& scenario) {
  Simulator sim(scenario);
  RunResult out;
  out.rows.reserve(scenario.steps());
  try {
    while (!sim.finished()) out.rows.push_back(sim.advance());
  } catch (const InfeasibleError& e) {
    if (sim.failed_row()) out.rows.push_back(*sim.failed_row());
    out.error = e.what();
  }
  return out;
}

}  // namespace hsa
