#pragma once

#include <variant>

#include "hsa/harness/simulator.hpp"

namespace hsa::telemetry {

// Client -> server messages.
struct Stylus {
  Vec displacement_cm;
};
struct Param {
  std::string name;
  double value = 0.0;
};
struct Mode {
  std::string controller;  // scf | jcf | passivity | no_l2
};
struct Reset {};
struct Unknown {
  std::string reason;
};

using ClientMessage = std::variant<Stylus, Param, Mode, Reset, Unknown>;

inline ClientMessage parse_client_message(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception&) {
    return Unknown{"malformed json"};
  }
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
    return Unknown{"missing type"};
  const auto type = j["type"].get<std::string>();
  try {
    if (type == "stylus") {
      const auto& a = j.at("disp_cm");
      Vec v(static_cast<Eigen::Index>(a.size()));
      for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
      return Stylus{v};
    }
    if (type == "param") return Param{j.at("name").get<std::string>(), j.at("value").get<double>()};
    if (type == "mode") return Mode{j.at("controller").get<std::string>()};
    if (type == "reset") return Reset{};
  } catch (const nlohmann::json::exception& e) {
    return Unknown{"bad '" + type + "' message: " + e.what()};
  }
  return Unknown{"unknown message type '" + type + "'"};
}

inline std::string controller_label(const Scenario& s) {
  if (s.ablation.disable_l2) return "no_l2";
  if (s.ablation.passivity_baseline) return "passivity";
  return s.controller == ControllerKind::Jcf ? "jcf" : "scf";
}

inline nlohmann::json config_block(const Scenario& s) {
  return {{"controller", controller_label(s)},
          {"k", s.stability.k},
          {"k_v", s.stability.k_v},
          {"e_max", s.stability.e_max},
          {"w_cbf", s.weights.w_cbf},
          {"w_l2", s.weights.w_l2},
          {"k1", s.gains.k1},
          {"k2", s.gains.k2},
          {"dt_ref", s.gains.dt_ref}};
}

inline std::string state_message(const TraceRow& r, const Scenario& s) {
  using detail::vec_to;
  nlohmann::json j{{"type", "state"},
                   {"t", r.t},
                   {"p", vec_to(r.position)},
                   {"v", vec_to(r.velocity)},
                   {"x_vd", vec_to(r.x_vd)},
                   {"u", vec_to(r.u)},
                   {"u_ref", vec_to(r.u_ref)},
                   {"F", vec_to(r.force)},
                   {"E", r.energy},
                   {"h_min", std::isfinite(r.h_min) ? nlohmann::json(r.h_min) : nlohmann::json(nullptr)},
                   {"case", std::string(to_string(r.active_case))},
                   {"ledger_margin", r.ledger_margin},
                   {"beta_extra", r.beta_extra},
                   {"feasible", r.feasible},
                   {"config", config_block(s)}};
  return j.dump();
}

inline std::string scenario_message(const Scenario& s) {
  return nlohmann::json{{"type", "scenario"}, {"scenario", scenario_to_json(s)}}.dump();
}

inline std::string warning_message(const std::string& text) {
  return nlohmann::json{{"type", "warning"}, {"message", text}}.dump();
}

/// Applies a parameter change; returns an error text when rejected.
inline std::optional<std::string> apply_param(Scenario& s, const Param& p) {
  Scenario next = s;
  if (p.name == "k") next.stability.k = p.value;
  else if (p.name == "k_v") next.stability.k_v = p.value;
  else if (p.name == "e_max") next.stability.e_max = p.value;
  else if (p.name == "w_cbf") next.weights.w_cbf = p.value;
  else if (p.name == "w_l2") next.weights.w_l2 = p.value;
  else if (p.name == "k1") next.gains.k1 = p.value;
  else if (p.name == "k2") next.gains.k2 = p.value;
  else if (p.name == "dt_ref") next.gains.dt_ref = next.stability.dt_ref = p.value;
  else return "unknown parameter '" + p.name + "'";
  next.e0 = std::min(next.e0, std::max(next.stability.e_max, 0.0));
  try {
    next.stability.validate();
    next.weights.validate();
    require(next.gains.k1 > 0.0 && next.gains.k2 > 0.0 && next.gains.dt_ref > 0.0,
            "gains must be positive");
  } catch (const ContractViolation& e) {
    return std::string(e.what());
  }
  s.stability = next.stability;
  s.weights = next.weights;
  s.gains = next.gains;
  s.e0 = next.e0;
  return std::nullopt;
}

inline std::optional<std::string> apply_mode(Scenario& s, const Mode& m) {
  if (m.controller == "scf") {
    s.controller = ControllerKind::Scf;
    s.ablation = {};
  } else if (m.controller == "jcf") {
    s.controller = ControllerKind::Jcf;
    s.ablation = {};
  } else if (m.controller == "passivity") {
    s.controller = ControllerKind::Scf;
    s.ablation = {false, true};
  } else if (m.controller == "no_l2") {
    s.ablation = {true, false};
  } else {
    return "unknown controller '" + m.controller + "'";
  }
  return std::nullopt;
}

}  // namespace hsa::telemetry
