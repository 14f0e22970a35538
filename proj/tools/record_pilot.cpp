// Flies a waypoint-pursuit pilot through a scenario's obstacle field and writes
// the commanded velocities as a replay CSV (t,vx,vy).
//
//   record_pilot <scenario.json> --out field2d_replay.csv
//
// The pilot steers closed-loop against the scenario's own controller, updates
// its command at 10 Hz and adds a smoothed random wobble; the output depends
// only on the scenario and --seed.
#include <CLI11.hpp>

#include <cstdio>
#include <deque>
#include <random>

#include "hsa/harness/simulator.hpp"

int main(int argc, char** argv) {
  CLI::App app{"record a synthetic pilot for replay"};
  std::string scenario_path, out;
  std::uint64_t seed = 7;
  double speed = 1.0, wobble = 0.15;
  app.add_option("scenario", scenario_path)->required()->check(CLI::ExistingFile);
  app.add_option("--out", out)->required();
  app.add_option("--seed", seed);
  app.add_option("--speed", speed, "cruise speed, m/s");
  app.add_option("--wobble", wobble, "wobble std dev, m/s");
  CLI11_PARSE(app, argc, argv);

  auto scenario = hsa::load_scenario(scenario_path);
  if (scenario.dim != 2) {
    std::fprintf(stderr, "record_pilot: needs a 2-D scenario\n");
    return 1;
  }
  auto channel = std::make_shared<hsa::LiveChannel>(2, 1.0);
  scenario.command = hsa::Live{channel};

  // Lanes about 0.3 m clear of the obstacle ends: x = -1.3, +1.3, -1.3.
  const std::vector<hsa::Vec> waypoints = {
      (hsa::Vec(2) << -1.3, 4.0).finished(),  (hsa::Vec(2) << -1.3, 10.0).finished(),
      (hsa::Vec(2) << 1.3, 16.0).finished(),  (hsa::Vec(2) << 1.3, 26.0).finished(),
      (hsa::Vec(2) << -1.3, 32.0).finished(), (hsa::Vec(2) << -1.3, 42.0).finished(),
      (hsa::Vec(2) << -1.3, 60.0).finished()};
  std::size_t target = 0;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, wobble);
  std::deque<hsa::Vec> recent;  // moving average over 1.5 s of 10 Hz noise

  hsa::Simulator sim(scenario);
  const auto every = static_cast<std::size_t>(std::llround(0.1 / scenario.dt));
  std::FILE* f = std::fopen(out.c_str(), "w");
  if (!f) {
    std::fprintf(stderr, "record_pilot: cannot write %s\n", out.c_str());
    return 1;
  }
  std::fprintf(f, "t,vx,vy\n");
  while (!sim.finished()) {
    if (sim.step_index() % every == 0) {
      const hsa::Vec& p = sim.state().position;
      while (target + 1 < waypoints.size() && (waypoints[target] - p).norm() < 1.5) ++target;
      const hsa::Vec to = waypoints[target] - p;
      recent.push_back((hsa::Vec(2) << noise(rng), noise(rng)).finished());
      if (recent.size() > 15) recent.pop_front();
      hsa::Vec w = hsa::Vec::Zero(2);
      for (const auto& r : recent) w += r;
      w /= static_cast<double>(recent.size());
      const double ramp = std::min(sim.time() / 2.0, 1.0);
      const hsa::Vec cmd = ramp * (speed * to / std::max(to.norm(), 1e-9) + w);
      channel->push_displacement_cm(cmd);
      std::fprintf(f, "%.2f,%.6f,%.6f\n", sim.time(), cmd[0], cmd[1]);
    }
    sim.advance();
  }
  std::fclose(f);
  return 0;
}
