#pragma once

#include "hsa/harness/trace.hpp"

namespace hsa {

/// Peak-to-peak force over rows [begin, end), maximised over components.
inline double force_envelope(const std::vector<TraceRow>& rows, std::size_t begin,
                             std::size_t end) {
  if (begin >= end || end > rows.size()) return 0.0;
  const Eigen::Index d = rows[begin].force.size();
  double out = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    double lo = rows[begin].force[i], hi = lo;
    for (std::size_t r = begin; r < end; ++r) {
      lo = std::min(lo, rows[r].force[i]);
      hi = std::max(hi, rows[r].force[i]);
    }
    out = std::max(out, hi - lo);
  }
  return out;
}

/// Envelope of each consecutive window of `window_s` seconds.
inline std::vector<double> windowed_envelopes(const std::vector<TraceRow>& rows, double dt,
                                              double window_s) {
  const auto w = static_cast<std::size_t>(std::llround(window_s / dt));
  std::vector<double> out;
  if (w == 0) return out;
  for (std::size_t b = 0; b + w <= rows.size(); b += w) out.push_back(force_envelope(rows, b, b + w));
  return out;
}

/// Envelope over the trailing `fraction` of the run.
inline double tail_envelope(const std::vector<TraceRow>& rows, double fraction) {
  const auto n = rows.size();
  const auto begin = n - static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  return force_envelope(rows, begin, n);
}

struct TraceSummary {
  double max_force = 0.0;
  double force_integral = 0.0;       // int |F| dt
  double mean_control_mod = 0.0;     // mean |u - u_ref|
  double mean_force_velocity = 0.0;  // mean F . v
  double opposing_fraction = 0.0;    // share of F != 0 rows with F . v < 0
  double tail_envelope = 0.0;        // last 25 %
  double min_h = std::numeric_limits<double>::infinity();
  std::size_t fallback_rows = 0;
};

inline TraceSummary summarize(const std::vector<TraceRow>& rows, double dt) {
  TraceSummary s;
  std::size_t nonzero = 0, opposing = 0;
  for (const auto& r : rows) {
    const double f = r.force.norm();
    s.max_force = std::max(s.max_force, f);
    s.force_integral += f * dt;
    s.mean_control_mod += (r.u - r.u_ref).norm();
    const double fv = r.force.dot(r.velocity);
    s.mean_force_velocity += fv;
    if (f > 1e-9) {
      ++nonzero;
      if (fv < 0.0) ++opposing;
    }
    s.min_h = std::min(s.min_h, r.h_min);
    if (r.active_case == ActiveCase::Fallback) ++s.fallback_rows;
  }
  if (!rows.empty()) {
    s.mean_control_mod /= static_cast<double>(rows.size());
    s.mean_force_velocity /= static_cast<double>(rows.size());
  }
  s.opposing_fraction = nonzero ? static_cast<double>(opposing) / static_cast<double>(nonzero) : 0.0;
  s.tail_envelope = tail_envelope(rows, 0.25);
  return s;
}

struct CompareReport {
  TraceSummary a;
  TraceSummary b;
  double max_deviation = 0.0;   // max |p_a - p_b|
  double mean_deviation = 0.0;  // mean |p_a - p_b|
  double max_force_difference = 0.0;
};

/// Side-by-side metrics for two traces of equal length and step.
inline CompareReport compare(const std::vector<TraceRow>& a, const std::vector<TraceRow>& b) {
  require(a.size() == b.size(), "compare: traces differ in length");
  require(a.size() >= 2, "compare: traces too short");
  const double dt = a[1].t - a[0].t;
  require(std::abs((b[1].t - b[0].t) - dt) <= 1e-9, "compare: traces differ in dt");
  require(a.front().position.size() == b.front().position.size(), "compare: dimension mismatch");

  CompareReport rep;
  rep.a = summarize(a, dt);
  rep.b = summarize(b, dt);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double dev = (a[i].position - b[i].position).norm();
    rep.max_deviation = std::max(rep.max_deviation, dev);
    rep.mean_deviation += dev;
    rep.max_force_difference = std::max(rep.max_force_difference, (a[i].force - b[i].force).norm());
  }
  rep.mean_deviation /= static_cast<double>(a.size());
  return rep;
}

inline nlohmann::json to_json(const TraceSummary& s) {
  return {{"max_force", s.max_force},
          {"force_integral", s.force_integral},
          {"mean_control_mod", s.mean_control_mod},
          {"mean_force_velocity", s.mean_force_velocity},
          {"opposing_fraction", s.opposing_fraction},
          {"tail_envelope", s.tail_envelope},
          {"min_h", std::isfinite(s.min_h) ? nlohmann::json(s.min_h) : nlohmann::json(nullptr)},
          {"fallback_rows", s.fallback_rows}};
}

inline nlohmann::json to_json(const CompareReport& r) {
  return {{"a", to_json(r.a)},
          {"b", to_json(r.b)},
          {"max_deviation", r.max_deviation},
          {"mean_deviation", r.mean_deviation},
          {"max_force_difference", r.max_force_difference}};
}

}  // namespace hsa
