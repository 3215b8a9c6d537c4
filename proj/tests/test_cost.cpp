#include <gtest/gtest.h>

#include <cmath>

#include "pacsnoc/cost.hpp"

using namespace pacsnoc;

namespace {

cost::CostSpec lti_cost(double gamma = 1.0) {
  cost::CostSpec spec;
  spec.variant = cost::LtiQuadratic{5.0, 0.003};
  spec.gamma = gamma;
  return spec;
}

sim::Trajectory robots_at(const Vec& state, std::size_t steps) {
  sim::Trajectory traj;
  traj.states.assign(steps, state);
  traj.inputs.assign(steps, Vec(4, 0.0));
  return traj;
}

cost::CostSpec robot_cost(const sim::PlanarRobots& r) {
  cost::CostSpec spec;
  spec.variant = cost::RobotNav::defaults_for(r);
  return spec;
}

}  // namespace

TEST(LtiCost, ZeroTrajectory) {
  sim::Trajectory traj;
  traj.states.assign(11, Vec{0.0});
  traj.inputs.assign(11, Vec{0.0});
  EXPECT_DOUBLE_EQ(cost::fh_cost<double>(lti_cost(), traj), 0.0);
}

TEST(LtiCost, GeometricSeries) {
  sim::Trajectory traj;
  for (int t = 0; t <= 10; ++t) {
    traj.states.push_back({2.0 * std::pow(0.8, t)});
    traj.inputs.push_back({0.0});
  }
  const double expected = 20.0 * (1.0 - std::pow(0.64, 11)) / 0.36;
  EXPECT_NEAR(cost::fh_cost<double>(lti_cost(), traj), expected, 1e-12);
  EXPECT_NEAR(expected, 55.145, 1e-3);
}

TEST(LtiCost, InputWeight) {
  sim::Trajectory traj;
  traj.states = {{1.0}, {0.0}};
  traj.inputs = {{2.0}, {-1.0}};
  EXPECT_NEAR(cost::fh_cost<double>(lti_cost(), traj), 5.0 + 0.003 * 5.0, 1e-15);
}

TEST(RobotCost, AtTargetIsZero) {
  const sim::PlanarRobots r;
  const sim::Plant plant(r);
  EXPECT_DOUBLE_EQ(cost::fh_cost<double>(robot_cost(r), robots_at(plant.target_state(), 20)), 0.0);
}

TEST(RobotCost, CollisionBarrier) {
  sim::PlanarRobots r;
  r.obstacles.clear();
  r.targets = {{0.0, 0.0}, {0.3, 0.0}};
  const auto spec = robot_cost(r);
  // Robots 0.3 apart at their targets: only the collision term is active.
  const Vec x{0.0, 0.0, 0.0, 0.0, 0.3, 0.0, 0.0, 0.0};
  const double expected = 1.0 / ((0.3 + r.barrier_offset) * (0.3 + r.barrier_offset));
  EXPECT_NEAR(cost::fh_cost<double>(spec, robots_at(x, 1)), expected, 1e-9);
  // Beyond D the term vanishes.
  r.targets = {{0.0, 0.0}, {0.6, 0.0}};
  const Vec far{0.0, 0.0, 0.0, 0.0, 0.6, 0.0, 0.0, 0.0};
  EXPECT_DOUBLE_EQ(cost::fh_cost<double>(robot_cost(r), robots_at(far, 1)), 0.0);
}

TEST(RobotCost, ObstacleBarrierOutsideAndInside) {
  sim::PlanarRobots r;
  r.obstacles = {{{0.0, 0.0}, 1.0}};
  r.targets = {{-10.0, 0.0}, {10.0, 0.0}};
  const double nu = r.barrier_offset;
  const auto at = [&](double px) {
    const Vec x{px, 0.0, 0.0, 0.0, 10.0, 0.0, 0.0, 0.0};
    // Subtract the quadratic part of robot 1, which sits at px instead of -10.
    return cost::fh_cost<double>(robot_cost(r), robots_at(x, 1)) - (px + 10.0) * (px + 10.0);
  };
  EXPECT_NEAR(at(-1.2), 1.0 / ((0.2 + nu) * (0.2 + nu)), 1e-6);
  EXPECT_NEAR(at(-1.6), 0.0, 1e-9);
  // Inside: tangent continuation nu^-2 - 2 nu^-3 g with g < 0.
  EXPECT_NEAR(at(-0.9), 1.0 / (nu * nu) + 2.0 / (nu * nu * nu) * 0.1, 1e-4);
  // Continuous across the surface, and growing with depth.
  EXPECT_NEAR(at(-1.0 - 1e-9), at(-1.0 + 1e-9), 1e-3);
  EXPECT_GT(at(-0.5), at(-0.9));
}

TEST(Transform, Values) {
  EXPECT_DOUBLE_EQ(cost::transform_cost(0.0, 1.0, 3.0), 0.0);
  EXPECT_NEAR(cost::transform_cost(2.0, 1.0, 2.0), 0.761594, 1e-6);
  const double big = cost::transform_cost(1e3, 1.0, 1.0);
  EXPECT_LE(big, 1.0);
  EXPECT_GT(big, 1.0 - 1e-12);
  EXPECT_NEAR(cost::transform_cost(1.0, 2.5, 1.0), 2.5 * std::tanh(1.0), 1e-15);
}

TEST(Gamma, LtiOpenLoop) {
  const sim::Plant plant(sim::ScalarLti{0.8, 0.1, 2.0});
  const double expected = 20.0 * (1.0 - std::pow(0.64, 11)) / 0.36;
  EXPECT_NEAR(cost::default_gamma(plant, lti_cost(), 10), expected, 1e-12);
  EXPECT_EQ(cost::default_gamma(plant, lti_cost(), 10), cost::default_gamma(plant, lti_cost(), 10));
}

TEST(Gamma, FallsBackToOne) {
  sim::PlanarRobots r;
  r.spawns = r.targets;
  const sim::Plant plant(r);
  EXPECT_DOUBLE_EQ(cost::default_gamma(plant, robot_cost(r), 50), 1.0);
}

TEST(CostSpec, Validation) {
  auto spec = lti_cost();
  spec.gamma = 0.0;
  EXPECT_THROW(spec.validate(), ConfigError);
  spec = lti_cost();
  spec.bound = -1.0;
  EXPECT_THROW(spec.validate(), ConfigError);
  const sim::PlanarRobots r;
  auto rc = robot_cost(r);
  std::get<cost::RobotNav>(rc.variant).q_diag[0] = -1.0;
  EXPECT_THROW(rc.validate(), ConfigError);
}
