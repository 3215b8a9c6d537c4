#include <gtest/gtest.h>

#include "pacsnoc/training.hpp"

using namespace pacsnoc;

namespace {

ControlProblem lti_problem() {
  ControlProblem p;
  p.plant = sim::Plant(sim::ScalarLti{0.8, 0.1, 2.0});
  p.arch = ctrl::AffineArch{};
  p.cost.variant = cost::LtiQuadratic{5.0, 0.003};
  p.cost.gamma = cost::default_gamma(p.plant, p.cost, 10);
  return p;
}

sim::NoiseDataset lti_data(std::size_t s, std::uint64_t seed) {
  sim::NoiseSpec spec;
  spec.kind = sim::GaussianPerStep{0.3, 0.3};
  return sim::generate_dataset(spec, s, 10, seed);
}

ControlProblem small_robot_problem() {
  ControlProblem p;
  sim::PlanarRobots r;
  p.plant = sim::Plant(r);
  ctrl::ImcRenArch a;
  a.xi_dim = 1;
  a.zeta_dim = 1;
  p.arch = a;
  p.cost.variant = cost::RobotNav::defaults_for(r);
  p.cost.gamma = cost::default_gamma(p.plant, p.cost, 40);
  return p;
}

sim::NoiseDataset robot_data(std::size_t s, std::uint64_t seed) {
  sim::NoiseSpec spec;
  spec.kind = sim::InitialOnly{0.2};
  spec.state_dim = 8;
  return sim::generate_dataset(spec, s, 40, seed);
}

}  // namespace

TEST(Split, Fractions) {
  const auto data = lti_data(8, 1);
  const auto [tr, va] = train_validation_split(data, 0.75);
  EXPECT_EQ(tr.size(), 6u);
  EXPECT_EQ(va.size(), 2u);
  EXPECT_EQ(tr[0].values, data[0].values);
  EXPECT_EQ(va[1].values, data[7].values);
  EXPECT_EQ(train_validation_split(data, 1.0).second.size(), 0u);
  EXPECT_EQ(train_validation_split(lti_data(1, 1), 0.75).first.size(), 1u);
  EXPECT_THROW(train_validation_split(data, 0.0), ConfigError);
}

TEST(InitialTheta, Defaults) {
  EXPECT_EQ(initial_theta(lti_problem(), 0.1, 3), (Vec{0.0, 0.0}));
  const auto p = small_robot_problem();
  const Vec a = initial_theta(p, 0.1, 3);
  EXPECT_EQ(a.size(), p.dim());
  EXPECT_EQ(a, initial_theta(p, 0.1, 3));
  EXPECT_NE(a, initial_theta(p, 0.1, 4));
}

TEST(Empirical, ZeroLearningRateKeepsStart) {
  TrainOptions opt;
  opt.epochs = 20;
  opt.lr = 0.0;
  opt.init = Vec{3.0, 1.0};
  const auto res = train_empirical(lti_problem(), lti_data(8, 2), opt);
  EXPECT_EQ(res.theta, (Vec{3.0, 1.0}));
}

TEST(Empirical, LtiLargeSampleRecoversBenchmarkOffset) {
  const auto p = lti_problem();
  TrainOptions opt;
  opt.epochs = 3000;
  opt.lr = 50.0;
  opt.project = ctrl::project_affine;
  const auto res = train_empirical(p, lti_data(512, 3), opt);
  EXPECT_LT(std::abs(res.theta[1] - 3.0), 0.5) << "k = " << res.theta[0] << ", beta = " << res.theta[1];
  EXPECT_LT(res.validation_cost[res.best_epoch], res.validation_cost.front());
}

TEST(Empirical, ProjectionKeepsGainStable) {
  TrainOptions opt;
  opt.epochs = 5;
  opt.lr = 0.0;
  opt.init = Vec{40.0, 0.0};
  opt.project = ctrl::project_affine;
  const auto res = train_empirical(lti_problem(), lti_data(4, 4), opt);
  EXPECT_LT(res.theta[0], 18.0);
}

TEST(Empirical, RobotCostDecreases) {
  const auto p = small_robot_problem();
  TrainOptions opt;
  opt.epochs = 30;
  opt.lr = 5.0;
  opt.train_fraction = 1.0;
  const auto data = robot_data(2, 5);
  const auto res = train_empirical(p, data, opt);
  EXPECT_LT(empirical_cost(p, res.theta, data), res.train_cost.front());
}

TEST(Empirical, EarlyStoppingOnValidation) {
  // With a zero step the validation cost never improves after epoch 0.
  TrainOptions opt;
  opt.epochs = 1000;
  opt.lr = 0.0;
  opt.patience = 7;
  opt.init = Vec{5.0, 2.0};
  const auto res = train_empirical(lti_problem(), lti_data(8, 6), opt);
  EXPECT_TRUE(res.stopped_early);
  EXPECT_EQ(res.best_epoch, 0u);
  EXPECT_EQ(res.validation_cost.size(), 8u);
}

TEST(Empirical, RejectsBadInit) {
  TrainOptions opt;
  opt.init = Vec{1.0};
  EXPECT_THROW(train_empirical(lti_problem(), lti_data(4, 1), opt), ConfigError);
}

TEST(FlowBase, MeanOfRuns) {
  const auto p = small_robot_problem();
  const auto seq = robot_data(1, 7)[0];
  TrainOptions opt;
  opt.epochs = 10;
  opt.lr = 2.0;
  const std::vector<std::uint64_t> seeds{1, 2, 3};
  const auto base = flow_base_init(p, seq, seeds, 4.0, opt);
  const sim::NoiseDataset single(8, 40, {seq});
  opt.train_fraction = 1.0;
  Vec mean(p.dim(), 0.0);
  for (auto s : seeds) {
    opt.seed = s;
    const Vec t = train_empirical(p, single, opt).theta;
    for (std::size_t i = 0; i < t.size(); ++i) mean[i] += t[i] / 3.0;
  }
  for (std::size_t i = 0; i < mean.size(); ++i) EXPECT_NEAR(base.mean[i], mean[i], 1e-12);
}

TEST(FlowBase, IdenticalRunsHitVarianceFloor) {
  const auto p = small_robot_problem();
  const auto seq = robot_data(1, 8)[0];
  TrainOptions opt;
  opt.epochs = 3;
  opt.lr = 1.0;
  const std::vector<std::uint64_t> seeds{4, 4, 4};
  for (double scale : {1.0, 4.0}) {
    const auto base = flow_base_init(p, seq, seeds, scale, opt);
    for (double sd : base.stddev) EXPECT_NEAR(sd * sd, 1e-6 * scale, 1e-15);
  }
  EXPECT_THROW(flow_base_init(p, seq, std::vector<std::uint64_t>{1}, 1.0, opt), ConfigError);
}
