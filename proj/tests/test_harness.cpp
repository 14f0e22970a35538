#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "hsa/harness/compare.hpp"
#include "hsa/harness/presets.hpp"
#include "hsa/harness/trace.hpp"

using namespace hsa;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = HSA_SCENARIO_DIR;

nlohmann::json minimal_json() {
  return nlohmann::json::parse(R"({
    "dim": 1, "duration": 1.0,
    "command": {"type": "trapezoid", "rise": 1.0, "hold": 1.0, "fall": 1.0, "peak": 0.0}
  })");
}

std::vector<fs::path> shipped_scenarios() {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(kScenarios))
    if (e.path().extension() == ".json") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

Scenario with_k_v(Scenario s, double k_v) {
  s.stability.k_v = k_v;
  return s;
}

}  // namespace

TEST(ScenarioFile, MinimalParses) {
  const auto s = scenario_from_json(minimal_json());
  EXPECT_EQ(s.dim, 1);
  EXPECT_EQ(s.steps(), 50u);
  EXPECT_TRUE(s.barriers.empty());
}

TEST(ScenarioFile, UnknownKeysAreErrors) {
  auto top = minimal_json();
  top["k_vv"] = 2.0;
  EXPECT_THROW(scenario_from_json(top), ContractViolation);
  auto nested = minimal_json();
  nested["stability"] = {{"kv", 2.0}};
  EXPECT_THROW(scenario_from_json(nested), ContractViolation);
  auto cmd = minimal_json();
  cmd["command"]["peek"] = 0.4;
  EXPECT_THROW(scenario_from_json(cmd), ContractViolation);
}

TEST(ScenarioFile, InvalidValuesAreErrors) {
  auto bad = minimal_json();
  bad["stability"] = {{"e_max", 0.1}, {"e0", 0.2}};
  EXPECT_THROW(scenario_from_json(bad), ContractViolation);
  auto inside = minimal_json();
  inside["barriers"] = nlohmann::json::array({{{"type", "half_plane"}, {"normal", {1.0}}, {"offset", -1.0}}});
  EXPECT_THROW(scenario_from_json(inside), ContractViolation);
  auto controller = minimal_json();
  controller["controller"] = {{"type", "mpc"}};
  EXPECT_THROW(scenario_from_json(controller), ContractViolation);
}

TEST(ScenarioFile, AllShippedScenariosLoad) {
  const auto files = shipped_scenarios();
  EXPECT_GE(files.size(), 7u);
  for (const auto& f : files) EXPECT_NO_THROW(load_scenario(f)) << f;
}

TEST(ScenarioFile, EchoRoundTripsForNonReplaySources) {
  for (const char* name : {"wall_1d.json", "wall_1d_jcf.json", "operator_wall.json"}) {
    const auto s = load_scenario(kScenarios / name);
    const auto again = scenario_from_json(scenario_to_json(s));
    EXPECT_EQ(scenario_to_json(again), scenario_to_json(s)) << name;
  }
}

TEST(Run, EmptyBarriersZeroCommandIsAllZero) {
  const auto s = scenario_from_json(minimal_json());
  const auto r = run(s);
  ASSERT_FALSE(r.error);
  ASSERT_EQ(r.rows.size(), 50u);
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const auto& row = r.rows[i];
    EXPECT_DOUBLE_EQ(row.t, 0.02 * static_cast<double>(i));
    for (const Vec* v : {&row.position, &row.velocity, &row.x_vd, &row.u_ref, &row.u, &row.force})
      EXPECT_EQ(v->norm(), 0.0);
    EXPECT_EQ(row.energy, 0.0);
    EXPECT_EQ(row.ledger_margin, 0.0);
  }
}

TEST(Run, ScenariosAreDeterministic) {
  for (const auto& f : shipped_scenarios()) {
    const auto s = load_scenario(f);
    const auto a = trace_csv_string(run(s).rows, s.dim);
    const auto b = trace_csv_string(run(s).rows, s.dim);
    EXPECT_EQ(a, b) << f;
  }
}

TEST(Run, SafetyAndTankInvariantsOnShippedScenarios) {
  for (const auto& f : shipped_scenarios()) {
    const auto s = load_scenario(f);
    const auto r = run(s);
    EXPECT_FALSE(r.error) << f;
    for (const auto& row : r.rows) {
      EXPECT_GE(row.h_min, -1e-3) << f << " t=" << row.t;
      EXPECT_GE(row.energy, 0.0);
      EXPECT_LE(row.energy, s.stability.e_max);
      if (row.active_case == ActiveCase::Fallback) EXPECT_EQ(row.force.norm(), 0.0);
    }
  }
}

TEST(Run, WallStopsBeforeContact) {
  for (double k_v : {1.0, 5.0}) {
    const auto r = run(presets::wall_1d(ControllerKind::Scf, k_v, 0.2));
    ASSERT_FALSE(r.error);
    EXPECT_GE(summarize(r.rows, 0.02).min_h, -1e-3);
    EXPECT_LE(std::abs(r.rows.back().velocity[0]), 0.02);
  }
}

TEST(Trace, CsvRoundTrip) {
  const auto s = load_scenario(kScenarios / "field2d_jcf.json");
  const auto rows = run(s).rows;
  const auto text = trace_csv_string(rows, s.dim);
  std::istringstream in(text);
  const auto back = read_trace_csv(in);
  EXPECT_EQ(back.dim, 2);
  EXPECT_EQ(trace_csv_string(back.rows, back.dim), text);
}

TEST(Trace, HeaderColumns) {
  EXPECT_EQ(trace_header(1),
            "t,p0,v0,x_vd0,u_ref0,u0,F0,h_min,E,epsilon,ledger_margin,beta_extra,active_case,feasible");
  std::istringstream bad("t,p0\n0,0\n");
  EXPECT_THROW(read_trace_csv(bad), ContractViolation);
}

TEST(Compare, TraceAgainstItselfIsZero) {
  const auto rows = run(presets::wall_1d(ControllerKind::Jcf, 1.0, 0.2)).rows;
  const auto rep = compare(rows, rows);
  EXPECT_EQ(rep.max_deviation, 0.0);
  EXPECT_EQ(rep.mean_deviation, 0.0);
  EXPECT_EQ(rep.max_force_difference, 0.0);
}

TEST(Compare, ShapeMismatchIsError) {
  const auto a = run(presets::wall_1d(ControllerKind::Scf, 1.0, 0.2)).rows;
  auto b = a;
  b.pop_back();
  EXPECT_THROW(compare(a, b), ContractViolation);
}

TEST(Compare, JcfDeviationFromScfGrowsWithKv) {
  const auto scf = load_scenario(kScenarios / "field2d_scf.json");
  const auto jcf = load_scenario(kScenarios / "field2d_jcf.json");
  double last = -1.0;
  for (double k_v : {1.0, 2.0, 5.0}) {
    const auto rep = compare(run(with_k_v(scf, k_v)).rows, run(with_k_v(jcf, k_v)).rows);
    EXPECT_GT(rep.mean_deviation, last) << "k_v " << k_v;
    last = rep.mean_deviation;
  }
}

TEST(Compare, OperatorOscillationContrast) {
  const auto l2 = run(presets::operator_wall_1d(false)).rows;
  const auto free = run(presets::operator_wall_1d(true)).rows;
  EXPECT_GE(tail_envelope(free, 0.25), 3.0 * tail_envelope(l2, 0.25));
}

TEST(Compare, EnvelopeWindows) {
  std::vector<TraceRow> rows(10);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].force = Vec::Constant(1, i % 2 ? 1.0 : -1.0) * (i < 5 ? 1.0 : 0.5);
  }
  const auto env = windowed_envelopes(rows, 0.1, 0.5);
  ASSERT_EQ(env.size(), 2u);
  EXPECT_DOUBLE_EQ(env[0], 2.0);
  EXPECT_DOUBLE_EQ(env[1], 1.0);
}
