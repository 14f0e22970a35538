#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <set>

#include <nlohmann/json.hpp>

#include "hsa/barriers.hpp"
#include "hsa/controller.hpp"
#include "hsa/human.hpp"
#include "hsa/jcf.hpp"

namespace hsa {

enum class ControllerKind { Scf, Jcf };

struct Ablation {
  bool disable_l2 = false;
  bool passivity_baseline = false;
};

struct Scenario {
  std::string name = "scenario";
  Eigen::Index dim = 1;
  double dt = 0.02;
  double duration = 10.0;
  RobotState initial;
  std::vector<BarrierShape> barriers;
  ControllerKind controller = ControllerKind::Scf;
  JcfWeights weights;
  StabilityParams stability;
  double e0 = 0.0;
  ControllerGains gains;
  CommandSource command = Trapezoid{};
  Ablation ablation;
  std::uint64_t seed = 0;

  std::size_t steps() const {
    return static_cast<std::size_t>(std::llround(duration / dt));
  }

  void validate() const {
    require(dim == 1 || dim == 2, "Scenario: dim must be 1 or 2");
    require(dt > 0.0, "Scenario: dt must be positive");
    require(duration > 0.0, "Scenario: duration must be positive");
    require(initial.dim() == dim && initial.velocity.size() == dim,
            "Scenario: initial state dimension mismatch");
    require(initial.finite(), "Scenario: non-finite initial state");
    stability.validate();
    weights.validate();
    require(gains.k1 > 0.0 && gains.k2 > 0.0, "Scenario: k1, k2 must be positive");
    require(gains.dt_ref > 0.0, "Scenario: dt_ref_controller must be positive");
    require(e0 >= 0.0 && e0 <= stability.e_max, "Scenario: e0 must lie in [0, e_max]");
    require(!(ablation.disable_l2 && ablation.passivity_baseline),
            "Scenario: disable_l2 and passivity_baseline are exclusive");
    require(!(ablation.passivity_baseline && controller != ControllerKind::Scf),
            "Scenario: the passivity baseline is an SCF variant");
    for (const auto& b : barriers) {
      hsa::validate(b);
      require(shape_dim(b) == dim, "Scenario: barrier dimension mismatch");
      require(evaluate(b, initial.position).value > 0.0,
              "Scenario: initial position must be strictly inside the safe set");
    }
    if (const auto* t = std::get_if<Trapezoid>(&command)) {
      require(t->dim == dim && t->axis >= 0 && t->axis < dim, "Scenario: trapezoid axis");
      require(t->rise > 0.0 && t->hold >= 0.0 && t->fall > 0.0, "Scenario: trapezoid segments");
    } else if (const auto* op = std::get_if<SpringDamperOperator>(&command)) {
      op->validate();
      require(op->x_vd.size() == dim, "Scenario: operator dimension mismatch");
    } else if (const auto* r = std::get_if<Replay>(&command)) {
      require(r->samples.front().size() == dim, "Scenario: replay dimension mismatch");
    }
  }
};

namespace detail {

using nlohmann::json;

inline void check_keys(const json& j, std::initializer_list<const char*> allowed,
                       const std::string& where) {
  require(j.is_object(), where + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items()) {
    if (!ok.count(key)) throw ContractViolation(where + ": unknown key '" + key + "'");
  }
}

inline Vec vec_from(const json& j, const std::string& where) {
  require(j.is_array(), where + ": expected an array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

inline json vec_to(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

template <class T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace detail

/// Parse a scenario document. Relative replay paths resolve against `base_dir`.
inline Scenario scenario_from_json(const nlohmann::json& j,
                                   const std::filesystem::path& base_dir = {}) {
  using detail::check_keys;
  using detail::read_opt;
  using detail::vec_from;
  check_keys(j, {"name", "dim", "dt", "duration", "initial", "barriers", "controller",
                 "stability", "cbf", "command", "ablation", "seed"},
             "scenario");
  Scenario s;
  read_opt(j, "name", s.name);
  s.dim = j.at("dim").get<Eigen::Index>();
  read_opt(j, "dt", s.dt);
  s.duration = j.at("duration").get<double>();
  read_opt(j, "seed", s.seed);

  s.initial = RobotState::at_rest(s.dim);
  if (j.contains("initial")) {
    const auto& ji = j.at("initial");
    check_keys(ji, {"position", "velocity"}, "initial");
    if (ji.contains("position")) s.initial.position = vec_from(ji.at("position"), "initial.position");
    if (ji.contains("velocity")) s.initial.velocity = vec_from(ji.at("velocity"), "initial.velocity");
  }

  if (j.contains("barriers")) {
    for (const auto& jb : j.at("barriers")) {
      const auto type = jb.at("type").get<std::string>();
      if (type == "half_plane") {
        check_keys(jb, {"type", "normal", "offset"}, "half_plane");
        s.barriers.push_back(HalfPlane{vec_from(jb.at("normal"), "normal"), jb.at("offset").get<double>()});
      } else if (type == "disc") {
        check_keys(jb, {"type", "center", "radius", "robot_radius"}, "disc");
        Disc d{vec_from(jb.at("center"), "center"), jb.at("radius").get<double>(), 0.0};
        read_opt(jb, "robot_radius", d.robot_radius);
        s.barriers.push_back(d);
      } else if (type == "super_ellipse") {
        check_keys(jb, {"type", "center", "a", "b", "r"}, "super_ellipse");
        s.barriers.push_back(SuperEllipse{vec_from(jb.at("center"), "center"), jb.at("a").get<double>(),
                                          jb.at("b").get<double>(), jb.at("r").get<double>()});
      } else {
        throw ContractViolation("barrier: unknown type '" + type + "'");
      }
    }
  }

  if (j.contains("controller")) {
    const auto& jc = j.at("controller");
    check_keys(jc, {"type", "w_cbf", "w_l2", "dt_ref"}, "controller");
    const auto type = jc.value("type", std::string("scf"));
    if (type == "scf") s.controller = ControllerKind::Scf;
    else if (type == "jcf") s.controller = ControllerKind::Jcf;
    else throw ContractViolation("controller: unknown type '" + type + "'");
    read_opt(jc, "w_cbf", s.weights.w_cbf);
    read_opt(jc, "w_l2", s.weights.w_l2);
    read_opt(jc, "dt_ref", s.gains.dt_ref);
  }
  if (j.contains("stability")) {
    const auto& js = j.at("stability");
    check_keys(js, {"k", "k_v", "dt_ref", "e_max", "e0"}, "stability");
    read_opt(js, "k", s.stability.k);
    read_opt(js, "k_v", s.stability.k_v);
    read_opt(js, "dt_ref", s.stability.dt_ref);
    read_opt(js, "e_max", s.stability.e_max);
    read_opt(js, "e0", s.e0);
  }
  if (j.contains("cbf")) {
    const auto& jk = j.at("cbf");
    check_keys(jk, {"k1", "k2"}, "cbf");
    read_opt(jk, "k1", s.gains.k1);
    read_opt(jk, "k2", s.gains.k2);
  }
  if (j.contains("ablation")) {
    const auto& ja = j.at("ablation");
    check_keys(ja, {"disable_l2", "passivity_baseline"}, "ablation");
    read_opt(ja, "disable_l2", s.ablation.disable_l2);
    read_opt(ja, "passivity_baseline", s.ablation.passivity_baseline);
  }

  const auto& jcmd = j.at("command");
  const auto type = jcmd.at("type").get<std::string>();
  if (type == "trapezoid") {
    check_keys(jcmd, {"type", "rise", "hold", "fall", "peak", "axis"}, "command");
    Trapezoid t;
    read_opt(jcmd, "rise", t.rise);
    read_opt(jcmd, "hold", t.hold);
    read_opt(jcmd, "fall", t.fall);
    read_opt(jcmd, "peak", t.peak);
    read_opt(jcmd, "axis", t.axis);
    t.dim = s.dim;
    s.command = t;
  } else if (type == "model") {
    check_keys(jcmd, {"type", "p", "q", "set_velocity", "x_vd", "x_vd_rate"}, "command");
    SpringDamperOperator op;
    read_opt(jcmd, "p", op.p);
    read_opt(jcmd, "q", op.q);
    op.set_velocity = vec_from(jcmd.at("set_velocity"), "set_velocity");
    op.x_vd = jcmd.contains("x_vd") ? vec_from(jcmd.at("x_vd"), "x_vd") : Vec(Vec::Zero(s.dim));
    op.x_vd_rate = jcmd.contains("x_vd_rate") ? vec_from(jcmd.at("x_vd_rate"), "x_vd_rate")
                                              : Vec(Vec::Zero(s.dim));
    s.command = op;
  } else if (type == "replay") {
    check_keys(jcmd, {"type", "file"}, "command");
    std::filesystem::path file = jcmd.at("file").get<std::string>();
    if (file.is_relative()) file = base_dir / file;
    s.command = read_replay_csv(file.string());
  } else if (type == "live") {
    check_keys(jcmd, {"type", "gain"}, "command");
    s.command = Live{std::make_shared<LiveChannel>(s.dim, jcmd.value("gain", 2.0))};
  } else {
    throw ContractViolation("command: unknown type '" + type + "'");
  }

  s.validate();
  return s;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ContractViolation("scenario " + path.string() + ": " + e.what());
  }
  return scenario_from_json(j, path.parent_path());
}

/// Echo of a scenario for trace sidecars. Replay data is summarized, not copied.
inline nlohmann::json scenario_to_json(const Scenario& s) {
  using detail::vec_to;
  nlohmann::json j;
  j["name"] = s.name;
  j["dim"] = s.dim;
  j["dt"] = s.dt;
  j["duration"] = s.duration;
  j["seed"] = s.seed;
  j["initial"] = {{"position", vec_to(s.initial.position)}, {"velocity", vec_to(s.initial.velocity)}};
  j["barriers"] = nlohmann::json::array();
  for (const auto& b : s.barriers) {
    std::visit(
        [&](const auto& sh) {
          using T = std::decay_t<decltype(sh)>;
          if constexpr (std::is_same_v<T, HalfPlane>)
            j["barriers"].push_back({{"type", "half_plane"}, {"normal", vec_to(sh.normal)}, {"offset", sh.offset}});
          else if constexpr (std::is_same_v<T, Disc>)
            j["barriers"].push_back({{"type", "disc"}, {"center", vec_to(sh.center)}, {"radius", sh.radius},
                                     {"robot_radius", sh.robot_radius}});
          else
            j["barriers"].push_back({{"type", "super_ellipse"}, {"center", vec_to(sh.center)}, {"a", sh.a},
                                     {"b", sh.b}, {"r", sh.r}});
        },
        b);
  }
  j["controller"] = {{"type", s.controller == ControllerKind::Scf ? "scf" : "jcf"},
                     {"w_cbf", s.weights.w_cbf}, {"w_l2", s.weights.w_l2}, {"dt_ref", s.gains.dt_ref}};
  j["stability"] = {{"k", s.stability.k}, {"k_v", s.stability.k_v}, {"dt_ref", s.stability.dt_ref},
                    {"e_max", s.stability.e_max}, {"e0", s.e0}};
  j["cbf"] = {{"k1", s.gains.k1}, {"k2", s.gains.k2}};
  j["ablation"] = {{"disable_l2", s.ablation.disable_l2},
                   {"passivity_baseline", s.ablation.passivity_baseline}};
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, Trapezoid>)
          j["command"] = {{"type", "trapezoid"}, {"rise", c.rise}, {"hold", c.hold}, {"fall", c.fall},
                          {"peak", c.peak}, {"axis", c.axis}};
        else if constexpr (std::is_same_v<T, SpringDamperOperator>)
          j["command"] = {{"type", "model"}, {"p", c.p}, {"q", c.q}, {"set_velocity", vec_to(c.set_velocity)},
                          {"x_vd", vec_to(c.x_vd)}, {"x_vd_rate", vec_to(c.x_vd_rate)}};
        else if constexpr (std::is_same_v<T, Replay>)
          j["command"] = {{"type", "replay"}, {"samples", c.samples.size()},
                          {"t_end", c.times.back()}};
        else
          j["command"] = {{"type", "live"}, {"gain", c.channel->gain()}};
      },
      s.command);
  return j;
}

}  // namespace hsa
