#pragma once

#include <fstream>
#include <memory>
#include <mutex>
#include <sstream>
#include <variant>
#include <vector>

#include "hsa/common.hpp"

namespace hsa {

/// Operator reacting to force feedback as a spring-damper on the commanded
/// velocity: x_vd'' + p x_vd' + q (x_vd - x_v0) = F.
struct SpringDamperOperator {
  double p = 1.0;
  double q = 8.0;
  Vec set_velocity;  // x_v0
  Vec x_vd;
  Vec x_vd_rate;

  void validate() const {
    require(p >= 0.0 && q >= 0.0, "SpringDamperOperator: p, q must be non-negative");
    require_same_dim(set_velocity, x_vd, "SpringDamperOperator");
    require_same_dim(x_vd, x_vd_rate, "SpringDamperOperator");
    require(all_finite(x_vd) && all_finite(x_vd_rate), "SpringDamperOperator: non-finite state");
  }
};

/// Semi-implicit Euler on the operator ODE; returns the new commanded velocity.
inline Vec operator_step(SpringDamperOperator& op, const Vec& force, double dt) {
  require(dt > 0.0, "operator_step: dt must be positive");
  require_same_dim(op.x_vd, force, "operator_step");
  const Vec acc = force - op.p * op.x_vd_rate - op.q * (op.x_vd - op.set_velocity);
  op.x_vd_rate += acc * dt;
  op.x_vd += op.x_vd_rate * dt;
  return op.x_vd;
}

/// Preset ramp-hold-ramp profile on one axis.
struct Trapezoid {
  double rise = 4.0;
  double hold = 4.0;
  double fall = 4.0;
  double peak = 0.4;
  Eigen::Index axis = 0;
  Eigen::Index dim = 1;

  double value(double t) const {
    if (t <= 0.0) return 0.0;
    if (t < rise) return peak * t / rise;
    t -= rise;
    if (t < hold) return peak;
    t -= hold;
    if (t < fall) return peak * (1.0 - t / fall);
    return 0.0;
  }
};

/// Recorded commands replayed with a zero-order hold.
struct Replay {
  std::vector<double> times;
  std::vector<Vec> samples;
};

/// Latest stylus displacement pushed by the telemetry thread.
class LiveChannel {
public:
  explicit LiveChannel(Eigen::Index dim, double gain = 2.0)
      : displacement_cm_(Vec::Zero(dim)), gain_(gain) {}

  void push_displacement_cm(const Vec& disp) {
    std::lock_guard lock(mu_);
    require_same_dim(disp, displacement_cm_, "LiveChannel");
    displacement_cm_ = disp;
  }
  Vec command() const {
    std::lock_guard lock(mu_);
    return gain_ * displacement_cm_;
  }
  double gain() const { return gain_; }

private:
  mutable std::mutex mu_;
  Vec displacement_cm_;
  double gain_;  // (m/s) per cm
};

struct Live {
  std::shared_ptr<LiveChannel> channel;
};

using CommandSource = std::variant<SpringDamperOperator, Trapezoid, Replay, Live>;

struct CommandSample {
  Vec x_vd;
  bool end_of_data = false;
};

inline Replay make_replay(std::vector<double> times, std::vector<Vec> samples) {
  require(times.size() == samples.size() && !times.empty(),
          "Replay: need one sample per timestamp");
  for (std::size_t i = 1; i < times.size(); ++i) {
    require(times[i] > times[i - 1], "Replay: timestamps must be strictly increasing");
    require_same_dim(samples[i], samples[0], "Replay");
  }
  return {std::move(times), std::move(samples)};
}

/// Parses `t,vx[,vy]` CSV with a header line.
inline Replay read_replay_csv(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "replay csv: empty input");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, ',')) header.push_back(col);
  }
  require(header.size() == 2 || header.size() == 3, "replay csv: expected t,vx[,vy]");
  require(header[0] == "t" && header[1] == "vx" && (header.size() == 2 || header[2] == "vy"),
          "replay csv: expected header t,vx[,vy]");
  const auto d = static_cast<Eigen::Index>(header.size() - 1);
  std::vector<double> times;
  std::vector<Vec> samples;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    require(vals.size() == header.size(), "replay csv: wrong column count");
    times.push_back(vals[0]);
    Vec v(d);
    for (Eigen::Index i = 0; i < d; ++i) v[i] = vals[i + 1];
    samples.push_back(v);
  }
  return make_replay(std::move(times), std::move(samples));
}

inline Replay read_replay_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open replay file: " + path);
  return read_replay_csv(in);
}

/// Commanded velocity at time t. Only the spring-damper model reacts to F.
inline CommandSample command_at(CommandSource& src, double t, const Vec& force, double dt) {
  require(t >= 0.0, "command_at: t must be non-negative");
  return std::visit(
      [&](auto& s) -> CommandSample {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SpringDamperOperator>) {
          return {operator_step(s, force, dt), false};
        } else if constexpr (std::is_same_v<T, Trapezoid>) {
          Vec v = Vec::Zero(s.dim);
          v[s.axis] = s.value(t);
          return {v, false};
        } else if constexpr (std::is_same_v<T, Replay>) {
          const auto it = std::upper_bound(s.times.begin(), s.times.end(), t);
          if (it == s.times.begin()) return {Vec::Zero(s.samples.front().size()), false};
          const auto idx = static_cast<std::size_t>(it - s.times.begin()) - 1;
          return {s.samples[idx], t > s.times.back()};
        } else {
          return {s.channel->command(), false};
        }
      },
      src);
}

/// Commanded velocity before the first step (the model's initial condition).
inline Vec initial_command(const CommandSource& src, Eigen::Index dim) {
  if (const auto* op = std::get_if<SpringDamperOperator>(&src)) return op->x_vd;
  return Vec::Zero(dim);
}

}  // namespace hsa
