#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>

#include "hsa/harness/simulator.hpp"

namespace hsa {

namespace detail {

inline std::string fmt9(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

inline const char* const kVectorColumns[] = {"p", "v", "x_vd", "u_ref", "u", "F"};

inline ActiveCase case_from_string(const std::string& s) {
  for (int i = 0; i <= static_cast<int>(ActiveCase::ScfNoL2); ++i) {
    const auto c = static_cast<ActiveCase>(i);
    if (to_string(c) == s) return c;
  }
  throw ContractViolation("trace: unknown active_case '" + s + "'");
}

}  // namespace detail

inline std::string trace_header(Eigen::Index dim) {
  std::string out = "t";
  for (const char* name : detail::kVectorColumns)
    for (Eigen::Index i = 0; i < dim; ++i) out += "," + std::string(name) + std::to_string(i);
  out += ",h_min,E,epsilon,ledger_margin,beta_extra,active_case,feasible";
  return out;
}

/// CSV with fixed column order and 9 significant digits.
inline void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows, Eigen::Index dim) {
  out << trace_header(dim) << '\n';
  for (const auto& r : rows) {
    out << detail::fmt9(r.t);
    for (const Vec* v : {&r.position, &r.velocity, &r.x_vd, &r.u_ref, &r.u, &r.force})
      for (Eigen::Index i = 0; i < dim; ++i) out << ',' << detail::fmt9((*v)[i]);
    out << ',' << detail::fmt9(r.h_min) << ',' << detail::fmt9(r.energy) << ','
        << detail::fmt9(r.epsilon) << ',' << detail::fmt9(r.ledger_margin) << ','
        << detail::fmt9(r.beta_extra) << ',' << to_string(r.active_case) << ','
        << (r.feasible ? 1 : 0) << '\n';
  }
}

inline std::string trace_csv_string(const std::vector<TraceRow>& rows, Eigen::Index dim) {
  std::ostringstream ss;
  write_trace_csv(ss, rows, dim);
  return ss.str();
}

struct Trace {
  Eigen::Index dim = 1;
  std::vector<TraceRow> rows;
};

inline Trace read_trace_csv(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "trace: empty input");
  Trace tr;
  tr.dim = line == trace_header(1) ? 1 : line == trace_header(2) ? 2 : 0;
  require(tr.dim != 0, "trace: unrecognized header");
  const Eigen::Index d = tr.dim;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    require(cells.size() == static_cast<std::size_t>(1 + 6 * d + 7), "trace: wrong column count");
    TraceRow r;
    std::size_t k = 0;
    r.t = std::stod(cells[k++]);
    for (Vec* v : {&r.position, &r.velocity, &r.x_vd, &r.u_ref, &r.u, &r.force}) {
      v->resize(d);
      for (Eigen::Index i = 0; i < d; ++i) (*v)[i] = std::stod(cells[k++]);
    }
    r.h_min = std::stod(cells[k++]);
    r.energy = std::stod(cells[k++]);
    r.epsilon = std::stod(cells[k++]);
    r.ledger_margin = std::stod(cells[k++]);
    r.beta_extra = std::stod(cells[k++]);
    r.active_case = detail::case_from_string(cells[k++]);
    r.feasible = cells[k++] == "1";
    tr.rows.push_back(std::move(r));
  }
  return tr;
}

inline Trace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace: " + path);
  return read_trace_csv(in);
}

/// Writes `path` and a `<path>.meta.json` sidecar echoing the scenario.
inline void write_trace_files(const std::string& path, const Scenario& scenario,
                              const RunResult& result) {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write trace: " + path);
    write_trace_csv(out, result.rows, scenario.dim);
  }
  nlohmann::json meta;
  meta["scenario"] = scenario_to_json(scenario);
  meta["rows"] = result.rows.size();
  meta["error"] = result.error ? nlohmann::json(*result.error) : nlohmann::json(nullptr);
  std::ofstream out(path + ".meta.json", std::ios::binary);
  out << meta.dump(2) << '\n';
}

}  // namespace hsa
