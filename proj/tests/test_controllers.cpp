#include <gtest/gtest.h>

#include <random>

#include "pacsnoc/rollout.hpp"

using namespace pacsnoc;

namespace {

Vec random_theta(std::size_t n, double sd, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sd);
  Vec t(n);
  for (auto& v : t) v = g(rng);
  return t;
}

ctrl::ImcRenArch robot_ren(std::size_t xi, std::size_t zeta) {
  ctrl::ImcRenArch a;
  a.xi_dim = xi;
  a.zeta_dim = zeta;
  return a;
}

}  // namespace

TEST(Affine, Law) {
  EXPECT_DOUBLE_EQ(ctrl::affine_act(0.0, 0.0, 5.0), 0.0);
  EXPECT_DOUBLE_EQ(ctrl::affine_act(1.0, 3.0, 2.0), -5.0);
  EXPECT_DOUBLE_EQ(ctrl::affine_act(8.0, 3.0, 0.0), -3.0);
}

TEST(Affine, GainProjection) {
  EXPECT_DOUBLE_EQ(ctrl::project_gain(5.0), 5.0);
  EXPECT_DOUBLE_EQ(ctrl::project_gain(40.0), 18.0 - 1e-6);
  EXPECT_DOUBLE_EQ(ctrl::project_gain(-2.0), -2.0 + 1e-6);
  for (double k : {-10.0, -2.0, 0.0, 17.999, 30.0}) {
    EXPECT_DOUBLE_EQ(ctrl::project_gain(ctrl::project_gain(k)), ctrl::project_gain(k));
  }
  Vec theta{25.0, 1.0};
  ctrl::project_affine(theta);
  EXPECT_DOUBLE_EQ(theta[0], 18.0 - 1e-6);
  EXPECT_DOUBLE_EQ(theta[1], 1.0);
}

TEST(Affine, ProjectedGainsKeepClosedLoopStable) {
  // |0.8 - 0.1 k| < 1 exactly on (-2, 18).
  for (double k : {-100.0, -2.0, 18.0, 100.0}) EXPECT_LT(std::abs(0.8 - 0.1 * ctrl::project_gain(k)), 1.0);
}

TEST(Imc, ExactModelRecoversNoise) {
  const sim::Plant plant(sim::ScalarLti{0.8, 0.1, 2.0});
  sim::NoiseSpec spec;
  spec.kind = sim::GaussianPerStep{0.3, 0.3};
  const auto noise = sim::generate_dataset(spec, 1, 10, 5)[0];
  const Vec theta{1.5, 0.4};
  const auto traj = sim::rollout<double>(plant, ctrl::AffineArch{}, theta, noise);
  EXPECT_NEAR(ctrl::reconstruct_disturbance<double>(plant, traj.states[0])[0], noise.values[0][0], 1e-14);
  for (std::size_t t = 1; t < traj.length(); ++t) {
    const auto w = ctrl::reconstruct_disturbance<double>(plant, traj.states[t], traj.states[t - 1], traj.inputs[t - 1]);
    EXPECT_NEAR(w[0], noise.values[t][0], 1e-14);
  }
}

TEST(Imc, ZeroNoiseGivesZeroEstimate) {
  const sim::Plant plant(sim::ScalarLti{0.8, 0.1, 2.0});
  const Vec theta{0.5, 0.0};
  const auto traj = sim::rollout<double>(plant, ctrl::AffineArch{}, theta, sim::zero_sequence(1, 6));
  EXPECT_DOUBLE_EQ(ctrl::reconstruct_disturbance<double>(plant, traj.states[0])[0], 0.0);
  for (std::size_t t = 1; t < traj.length(); ++t) {
    EXPECT_DOUBLE_EQ(ctrl::reconstruct_disturbance<double>(plant, traj.states[t], traj.states[t - 1],
                                                           traj.inputs[t - 1])[0],
                     0.0);
  }
}

TEST(Imc, InitialOffset) {
  const sim::Plant plant(sim::ScalarLti{0.8, 0.1, 2.0});
  EXPECT_DOUBLE_EQ(ctrl::reconstruct_disturbance<double>(plant, Vec{2.5})[0], 0.5);
}

TEST(Imc, RobotAnchors) {
  sim::PlanarRobots r;
  r.imc_anchor = sim::ImcAnchor::kTarget;
  const sim::Plant target_anchor(r);
  const Vec x0 = target_anchor.nominal_state();
  const auto w = ctrl::reconstruct_disturbance<double>(target_anchor, x0);
  const Vec xt = target_anchor.target_state();
  for (std::size_t i = 0; i < w.size(); ++i) EXPECT_DOUBLE_EQ(w[i], x0[i] - xt[i]);
  r.imc_anchor = sim::ImcAnchor::kNominal;
  const sim::Plant nominal_anchor(r);
  for (double v : ctrl::reconstruct_disturbance<double>(nominal_anchor, x0)) EXPECT_DOUBLE_EQ(v, 0.0);
}

TEST(Ren, ParameterCounts) {
  EXPECT_EQ(ctrl::parameter_count(robot_ren(8, 8)), 864u);
  EXPECT_EQ(ctrl::parameter_count(robot_ren(3, 3)), 194u);
  EXPECT_EQ(ctrl::parameter_count(robot_ren(2, 2)), 120u);
  EXPECT_EQ(ctrl::parameter_count(ctrl::AffineArch{}), 2u);
}

TEST(Ren, ZeroInputZeroStateGivesZero) {
  const auto arch = robot_ren(3, 3);
  const Vec theta = random_theta(ctrl::parameter_count(arch), 1.0, 3);
  const ctrl::Ren<double> ren(arch, theta);
  auto state = ren.initial_state();
  const auto u = ren.forward(state, Vec(8, 0.0));
  for (double v : u) EXPECT_DOUBLE_EQ(v, 0.0);
  for (double v : state.xi) EXPECT_DOUBLE_EQ(v, 0.0);
}

TEST(Ren, Deterministic) {
  const auto arch = robot_ren(3, 3);
  const Vec theta = random_theta(ctrl::parameter_count(arch), 0.5, 4);
  const ctrl::Ren<double> ren(arch, theta);
  const Vec w = random_theta(8, 1.0, 5);
  auto s1 = ren.initial_state();
  auto s2 = ren.initial_state();
  EXPECT_EQ(ren.forward(s1, w), ren.forward(s2, w));
  EXPECT_EQ(s1.xi, s2.xi);
}

TEST(Ren, FiniteEnergyInputFiniteEnergyOutput) {
  const auto arch = robot_ren(4, 4);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const double sd = seed < 3 ? 1.0 : 10.0;
    const Vec theta = random_theta(ctrl::parameter_count(arch), sd, 10 + seed);
    const ctrl::Ren<double> ren(arch, theta);
    auto state = ren.initial_state();
    double head = 0.0;
    double tail = 0.0;
    for (std::size_t t = 0; t < 600; ++t) {
      const Vec w = t < 5 ? random_theta(8, 1.0, 100 * seed + t) : Vec(8, 0.0);
      double e = 0.0;
      for (double u : ren.forward(state, w)) e += u * u;
      ASSERT_TRUE(std::isfinite(e));
      (t < 300 ? head : tail) += e;
    }
    EXPECT_LT(tail, 1e-6 * std::max(head, 1e-12) + 1e-20) << "seed " << seed;
  }
}

TEST(Ren, WrongLengthRejected) {
  const auto arch = robot_ren(3, 3);
  EXPECT_THROW(ctrl::Ren<double>(arch, Vec(10, 0.0)), std::invalid_argument);
}

TEST(ImcRen, ZeroParametersIsOpenLoop) {
  const sim::Plant plant(sim::PlanarRobots{});
  const auto arch = robot_ren(3, 3);
  const Vec theta(ctrl::parameter_count(arch), 0.0);
  sim::NoiseSpec spec;
  spec.kind = sim::InitialOnly{0.2};
  spec.state_dim = 8;
  const auto noise = sim::generate_dataset(spec, 1, 50, 2)[0];
  const auto closed = sim::rollout<double>(plant, arch, theta, noise);
  const auto open = sim::rollout_open_loop(plant, noise);
  for (std::size_t t = 0; t < closed.length(); ++t) {
    for (double u : closed.inputs[t]) EXPECT_DOUBLE_EQ(u, 0.0);
    for (std::size_t i = 0; i < 8; ++i) EXPECT_DOUBLE_EQ(closed.states[t][i], open.states[t][i]);
  }
}

TEST(ImcRen, ZeroNoiseGivesZeroInputWithNominalAnchor) {
  sim::PlanarRobots r;
  r.imc_anchor = sim::ImcAnchor::kNominal;
  const sim::Plant plant(r);
  const auto arch = robot_ren(3, 3);
  const Vec theta = random_theta(ctrl::parameter_count(arch), 1.0, 9);
  const auto traj = sim::rollout<double>(plant, arch, theta, sim::zero_sequence(8, 30));
  for (const auto& u : traj.inputs) {
    for (double v : u) EXPECT_DOUBLE_EQ(v, 0.0);
  }
}

TEST(ImcRen, LtiPlantCompatible) {
  const sim::Plant plant(sim::ScalarLti{0.8, 0.1, 2.0});
  ctrl::ImcRenArch arch;
  arch.xi_dim = 2;
  arch.zeta_dim = 2;
  arch.state_dim = 1;
  arch.input_dim = 1;
  const Vec theta = random_theta(ctrl::parameter_count(arch), 0.3, 1);
  const auto traj = sim::rollout<double>(plant, arch, theta, sim::zero_sequence(1, 10));
  EXPECT_EQ(traj.length(), 11u);
  EXPECT_THROW(ctrl::check_compatible(robot_ren(2, 2), plant), ConfigError);
}
