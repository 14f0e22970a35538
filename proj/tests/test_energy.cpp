#include <gtest/gtest.h>

#include <random>

#include "hsa/energy.hpp"

using namespace hsa;

namespace {

Vec v1(double x) { return Vec::Constant(1, x); }
Vec vec2(double x, double y) { return (Vec(2) << x, y).finished(); }

StabilityParams unit_params(double e_max = 0.2) {
  StabilityParams p;
  p.k = 1.0;
  p.k_v = 1.0;
  p.dt_ref = 1.0;
  p.e_max = e_max;
  return p;
}

}  // namespace

TEST(Storage, Examples) {
  StabilityParams p;
  EXPECT_EQ(storage(RobotState::at_rest(2), p), 0.0);
  p.k_v = 2.0;
  EXPECT_DOUBLE_EQ(storage(RobotState(Vec::Zero(2), vec2(3.0, 4.0)), p), 25.0);
  p.k_v = 5.0;
  EXPECT_DOUBLE_EQ(storage(RobotState(v1(0.0), v1(1.0)), p), 2.5);
}

TEST(L2ForceBound, Examples) {
  const auto p = unit_params();
  EXPECT_EQ(l2_force_bound(RobotState::at_rest(1), v1(0.0), {0.0, 0.0}, ControlInput::zero(1), p), 0.0);
  StabilityParams q = p;
  q.k = 2.0;
  EXPECT_DOUBLE_EQ(l2_force_bound(RobotState::at_rest(2), vec2(3.0, 4.0), {0.0, 0.0},
                                  ControlInput::zero(2), q),
                   25.0 / 4.0);
  EXPECT_NEAR(l2_force_bound(RobotState(v1(0.0), v1(1.0)), v1(1.0), {0.2, 0.0},
                             ControlInput(v1(0.5)), p),
              0.4, 1e-15);
}

TEST(L2ForceBound, CanGoNegative) {
  const auto p = unit_params();
  EXPECT_LT(l2_force_bound(RobotState(v1(0.0), v1(1.0)), v1(0.0), {0.0, 0.0}, ControlInput(v1(1.0)), p), 0.0);
}

TEST(L2FeasibilityRow, Examples) {
  const auto p = unit_params();
  const auto still = l2_feasibility_row(RobotState::at_rest(2), vec2(0.0, 0.0), {0.0, 0.0}, p);
  EXPECT_EQ(still.coeff.norm(), 0.0);
  EXPECT_GE(still.constant, 0.0);

  const auto row = l2_feasibility_row(RobotState(v1(0.0), v1(1.0)), v1(0.0), {0.0, 0.0}, p);
  EXPECT_GE(row.eval(v1(-0.3)), 0.0);
  EXPECT_GE(row.eval(v1(0.0)), 0.0);
  EXPECT_LT(row.eval(v1(1e-6)), 0.0);
}

TEST(L2FeasibilityRow, ZeroControlAlwaysAdmissibleAndMatchesBound) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-2.0, 2.0), pos(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    StabilityParams p;
    p.k = 0.5 + pos(rng);
    p.k_v = 0.5 + 4.0 * pos(rng);
    p.dt_ref = 0.1 + pos(rng);
    const RobotState s(vec2(u(rng), u(rng)), vec2(u(rng), u(rng)));
    const Vec x_vd = vec2(u(rng), u(rng));
    const EnergyTank tank{0.2 * pos(rng), 0.0};
    const auto row = l2_feasibility_row(s, x_vd, tank, p);
    EXPECT_GE(row.eval(Vec::Zero(2)), 0.0);
    const ControlInput uu(vec2(u(rng), u(rng)));
    // Row value is k^2 times the bound.
    EXPECT_NEAR(row.eval(uu.acceleration) / (p.k * p.k), l2_force_bound(s, x_vd, tank, uu, p), 1e-12);
  }
}

TEST(TankUpdate, Examples) {
  const auto p = unit_params();
  const auto rest = RobotState::at_rest(1);
  auto t = tank_update({0.1, 0.0}, v1(0.0), v1(0.0), rest, ControlInput::zero(1), 0.01, p);
  EXPECT_DOUBLE_EQ(t.level, 0.1);
  t = tank_update({0.1, 0.0}, v1(0.0), v1(0.5), rest, ControlInput::zero(1), 0.01, p);
  EXPECT_DOUBLE_EQ(t.level, 0.1 + 0.125 * 0.01);
  EXPECT_DOUBLE_EQ(t.flow, 0.125);
  t = tank_update({0.2, 0.0}, v1(0.0), v1(1.0), rest, ControlInput::zero(1), 0.01, p);
  EXPECT_DOUBLE_EQ(t.level, 0.2);
}

TEST(TankUpdate, AdmissibleForceKeepsTankNonNegative) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-2.0, 2.0), pos(0.0, 1.0);
  const auto p = unit_params();
  for (int i = 0; i < 200; ++i) {
    const RobotState s(v1(0.0), v1(u(rng)));
    const Vec x_vd = v1(u(rng));
    const EnergyTank tank{0.2 * pos(rng), 0.0};
    const ControlInput uu(v1(u(rng)));
    const double bound = l2_force_bound(s, x_vd, tank, uu, p);
    if (bound < 0.0) continue;
    const Vec F = v1(std::sqrt(bound) * (pos(rng) < 0.5 ? -1.0 : 1.0));
    // With dt == dt_ref the bound spends exactly half of the tank in the worst case.
    const auto next = tank_update(tank, F, x_vd, s, uu, p.dt_ref, p);
    EXPECT_GE(tank.level + next.flow * p.dt_ref, -1e-12);
    EXPECT_EQ(tank_deficit(tank, F, x_vd, s, uu, 0.05, p), 0.0);
  }
}

TEST(TankUpdate, DiscreteConsistencyWithoutClamping) {
  auto p = unit_params(1e9);
  EnergyTank tank{0.5, 0.0};
  double sum = 0.0;
  RobotState s(v1(0.0), v1(0.3));
  for (int i = 0; i < 500; ++i) {
    const Vec x_vd = v1(std::sin(0.02 * i));
    const ControlInput u(v1(-0.1 * s.velocity[0]));
    const Vec F = v1(0.2 * std::cos(0.03 * i));
    tank = tank_update(tank, F, x_vd, s, u, 0.02, p);
    sum += tank.flow * 0.02;
    s = step(s, u, 0.02);
  }
  EXPECT_NEAR(tank.level - 0.5, sum, 1e-9);
}

TEST(TankDeficit, ReportsOverdrawInLedgerUnits) {
  const auto p = unit_params();
  const auto rest = RobotState::at_rest(1);
  // flow = -(1/2)|F|^2 = -2, dt 0.1 -> level 0.05 - 0.2 = -0.15 -> 0.3 in |F|^2 units.
  EXPECT_NEAR(tank_deficit({0.05, 0.0}, v1(2.0), v1(0.0), rest, ControlInput::zero(1), 0.1, p), 0.3, 1e-15);
}

TEST(LedgerCheck, ZeroLedgerMargin) {
  const auto p = unit_params();
  L2Ledger ledger;
  auto a = ledger_check(ledger, p);
  EXPECT_TRUE(a.holds);
  EXPECT_EQ(a.margin, 0.0);
  ledger.v0 = 0.3;
  ledger.e0 = 0.1;
  a = ledger_check(ledger, p);
  EXPECT_TRUE(a.holds);
  EXPECT_DOUBLE_EQ(a.margin, 2.0 * 0.3 + 0.1 * 2.0);  // k = 1
}

TEST(LedgerCheck, DetectsViolationAndCreditsBeta) {
  const auto p = unit_params();
  L2Ledger ledger;
  ledger.accumulate(v1(2.0), v1(1.0), 0.1);
  auto a = ledger_check(ledger, p);
  EXPECT_FALSE(a.holds);
  EXPECT_NEAR(a.margin, 0.1 - 0.4, 1e-15);
  ledger.beta_extra = 0.3;
  EXPECT_TRUE(ledger_check(ledger, p).holds);
}

TEST(PassivityRow, Examples) {
  StabilityParams p;
  p.k = 1.0;
  p.k_v = 1.0;
  const RobotState s(v1(0.0), v1(1.0));
  const auto row = passivity_row(s, v1(0.0), p);
  EXPECT_LT(row.slack(v1(0.5), v1(0.0)), 0.0);  // F = 0 needs v^T u <= 0
  EXPECT_DOUBLE_EQ(row.slack(v1(-0.5), v1(0.0)), 0.5);
  // x_vd = 0 reduces to -k|F|^2 >= k_v v^T u.
  EXPECT_DOUBLE_EQ(row.slack(v1(-0.5), v1(0.3)), 0.5 - 0.09);
}

TEST(PassivityRow, BallDescribesAdmissibleForces) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  StabilityParams p;
  p.k = 1.3;
  p.k_v = 2.0;
  for (int i = 0; i < 200; ++i) {
    const RobotState s(vec2(0.0, 0.0), vec2(u(rng), u(rng)));
    const auto row = passivity_row(s, vec2(u(rng), u(rng)), p);
    const Vec uu = vec2(u(rng), u(rng)), F = vec2(u(rng), u(rng));
    const double in_ball = row.ball_radius_sq(uu) - (F - row.ball_center()).squaredNorm();
    EXPECT_NEAR(in_ball * p.k, row.slack(uu, F), 1e-12);
    EXPECT_EQ(row.feasibility_row().eval(uu) >= 0.0, row.ball_radius_sq(uu) >= 0.0);
  }
}
