#include <CLI11.hpp>

#include <chrono>
#include <csignal>
#include <cstdio>
#include <future>
#include <iostream>

#include "hsa/harness/compare.hpp"
#include "hsa/harness/server.hpp"
#include "hsa/harness/telemetry.hpp"
#include "hsa/testing/jcf_oracle.hpp"

namespace {

std::atomic<bool> g_interrupted{false};

int cmd_run(const std::string& scenario_path, const std::string& out) {
  const auto scenario = hsa::load_scenario(scenario_path);
  const auto t0 = std::chrono::steady_clock::now();
  const auto result = hsa::run(scenario);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  hsa::write_trace_files(out, scenario, result);
  auto summary = hsa::to_json(hsa::summarize(result.rows, scenario.dt));
  summary["rows"] = result.rows.size();
  summary["wall_seconds"] = secs;
  if (!result.rows.empty()) summary["final_ledger_margin"] = result.rows.back().ledger_margin;
  std::cout << summary.dump(2) << '\n';
  if (result.error) {
    std::cerr << "run aborted: " << *result.error << '\n';
    return 2;
  }
  return 0;
}

int cmd_compare(const std::string& a, const std::string& b) {
  const auto ta = hsa::read_trace_csv(a);
  const auto tb = hsa::read_trace_csv(b);
  std::cout << hsa::to_json(hsa::compare(ta.rows, tb.rows)).dump(2) << '\n';
  return 0;
}

// "k_v=1,5" -> ("k_v", {1, 5})
std::pair<std::string, std::vector<double>> parse_sweep(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) throw CLI::ValidationError("--param", "expected name=v1,v2,...");
  std::pair<std::string, std::vector<double>> out{spec.substr(0, eq), {}};
  std::stringstream ss(spec.substr(eq + 1));
  std::string item;
  while (std::getline(ss, item, ',')) out.second.push_back(std::stod(item));
  if (out.second.empty()) throw CLI::ValidationError("--param", "no values given");
  return out;
}

int cmd_sweep(const std::string& scenario_path, const std::string& param, const std::string& out_dir) {
  const auto base = hsa::load_scenario(scenario_path);
  const auto [name, values] = parse_sweep(param);
  std::vector<hsa::Scenario> variants;
  for (double v : values) {
    auto s = base;
    if (auto err = hsa::telemetry::apply_param(s, {name, v})) {
      std::cerr << "sweep: " << *err << '\n';
      return 1;
    }
    variants.push_back(std::move(s));
  }
  std::vector<std::future<hsa::RunResult>> jobs;
  for (const auto& s : variants) jobs.push_back(std::async(std::launch::async, [&s] { return hsa::run(s); }));

  nlohmann::json report = nlohmann::json::array();
  int status = 0;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto result = jobs[i].get();
    auto entry = hsa::to_json(hsa::summarize(result.rows, variants[i].dt));
    entry[name] = values[i];
    if (!out_dir.empty()) {
      std::filesystem::create_directories(out_dir);
      char label[64];
      std::snprintf(label, sizeof label, "%s=%g.csv", name.c_str(), values[i]);
      const auto path = (std::filesystem::path(out_dir) / (variants[i].name + "_" + label)).string();
      hsa::write_trace_files(path, variants[i], result);
      entry["trace"] = path;
    }
    if (result.error) {
      entry["error"] = *result.error;
      status = 2;
    }
    report.push_back(entry);
  }
  std::cout << report.dump(2) << '\n';
  return status;
}

int cmd_serve(const std::string& scenario_path, unsigned short port, double rate) {
  auto scenario = hsa::load_scenario(scenario_path);
  hsa::TelemetryServer server(std::move(scenario), {port, rate, 60.0});
  server.start();
  std::cerr << "listening on ws://127.0.0.1:" << server.port() << '\n';
  std::signal(SIGINT, [](int) { g_interrupted = true; });
  std::signal(SIGTERM, [](int) { g_interrupted = true; });
  while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  server.stop();
  return 0;
}

int cmd_oracle_check(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  int failures = 0, infeasible = 0;
  double worst_gap = 0.0, worst_dist = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto inst = hsa::testing::random_instance(rng);
    const auto cmp = hsa::testing::compare_with_oracle(inst.problem());
    if (cmp.both_infeasible) {
      ++infeasible;
      continue;
    }
    worst_gap = std::max(worst_gap, cmp.cost_gap);
    worst_dist = std::max(worst_dist, cmp.point_distance);
    if (!(cmp.cost_gap <= 1e-4 && cmp.point_distance <= 1e-3)) {
      ++failures;
      std::fprintf(stderr, "instance %d: cost gap %.3g, distance %.3g\n", i, cmp.cost_gap, cmp.point_distance);
    }
  }
  std::cout << nlohmann::json{{"instances", n},
                              {"seed", seed},
                              {"failures", failures},
                              {"both_infeasible", infeasible},
                              {"worst_cost_gap", worst_gap},
                              {"worst_point_distance", worst_dist}}
                   .dump(2)
            << '\n';
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"haptic shared autonomy simulator"};
  app.require_subcommand(1);

  std::string scenario, out, a, b, param, out_dir;
  unsigned short port = 8765;
  double rate = 1.0;
  int n = 200;
  std::uint64_t seed = 7;

  auto* run = app.add_subcommand("run", "simulate a scenario and write a trace");
  run->add_option("scenario", scenario, "scenario JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "trace CSV path")->required();

  auto* cmp = app.add_subcommand("compare", "compare two traces");
  cmp->add_option("a", a)->required()->check(CLI::ExistingFile);
  cmp->add_option("b", b)->required()->check(CLI::ExistingFile);

  auto* sweep = app.add_subcommand("sweep", "run a scenario over parameter values");
  sweep->add_option("scenario", scenario)->required()->check(CLI::ExistingFile);
  sweep->add_option("--param", param, "name=v1,v2,...")->required();
  sweep->add_option("--out-dir", out_dir, "write one trace per value here");

  auto* serve = app.add_subcommand("serve", "websocket telemetry server");
  serve->add_option("--scenario", scenario)->required()->check(CLI::ExistingFile);
  serve->add_option("--port", port);
  serve->add_option("--rate", rate, "simulated seconds per wall second");

  auto* oracle = app.add_subcommand("oracle-check", "check the joint solver against a numeric oracle");
  oracle->add_option("--n", n);
  oracle->add_option("--seed", seed);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(scenario, out);
    if (*cmp) return cmd_compare(a, b);
    if (*sweep) return cmd_sweep(scenario, param, out_dir);
    if (*serve) return cmd_serve(scenario, port, rate);
    if (*oracle) return cmd_oracle_check(n, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
