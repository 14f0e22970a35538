#include <gtest/gtest.h>

#include "hsa/dynamics.hpp"

using namespace hsa;

namespace {
Vec v1(double x) { return Vec::Constant(1, x); }
}  // namespace

TEST(Dynamics, ZeroStateStaysPut) {
  const auto next = step(RobotState::at_rest(1), ControlInput::zero(1), 0.05);
  EXPECT_EQ(next.position[0], 0.0);
  EXPECT_EQ(next.velocity[0], 0.0);
}

TEST(Dynamics, ConstantVelocityDrifts) {
  const auto next = step(RobotState(v1(0.0), v1(1.0)), ControlInput::zero(1), 0.1);
  EXPECT_DOUBLE_EQ(next.position[0], 0.1);
  EXPECT_DOUBLE_EQ(next.velocity[0], 1.0);
}

TEST(Dynamics, SemiImplicitUsesNewVelocity) {
  const auto next = step(RobotState::at_rest(1), ControlInput(v1(2.0)), 0.1);
  EXPECT_DOUBLE_EQ(next.velocity[0], 0.2);
  EXPECT_DOUBLE_EQ(next.position[0], 0.02);
}

TEST(Dynamics, TwoDimensionalComponentsIndependent) {
  RobotState s(Vec::Zero(2), (Vec(2) << 1.0, -1.0).finished());
  const auto next = step(s, ControlInput((Vec(2) << 0.0, 10.0).finished()), 0.1);
  EXPECT_DOUBLE_EQ(next.velocity[0], 1.0);
  EXPECT_DOUBLE_EQ(next.velocity[1], 0.0);
  EXPECT_DOUBLE_EQ(next.position[0], 0.1);
  EXPECT_DOUBLE_EQ(next.position[1], 0.0);
}

TEST(Dynamics, BitIdenticalRepeats) {
  RobotState a(v1(0.3), v1(-0.7)), b = a;
  for (int i = 0; i < 1000; ++i) {
    const ControlInput u(v1(std::sin(0.01 * i)));
    a = step(a, u, 0.02);
    b = step(b, u, 0.02);
  }
  EXPECT_EQ(a.position[0], b.position[0]);
  EXPECT_EQ(a.velocity[0], b.velocity[0]);
}

TEST(Dynamics, ContractViolations) {
  EXPECT_THROW(step(RobotState::at_rest(1), ControlInput::zero(1), 0.0), ContractViolation);
  EXPECT_THROW(step(RobotState::at_rest(1), ControlInput::zero(1), -0.1), ContractViolation);
  EXPECT_THROW(step(RobotState::at_rest(2), ControlInput::zero(1), 0.1), ContractViolation);
  EXPECT_THROW(step(RobotState::at_rest(1), ControlInput(v1(NAN)), 0.1), ContractViolation);
}
