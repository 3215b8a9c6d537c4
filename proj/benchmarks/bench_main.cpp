#include <benchmark/benchmark.h>

#include <random>

#include "pacsnoc/inference/flows.hpp"
#include "pacsnoc/inference/grid.hpp"
#include "pacsnoc/inference/svgd.hpp"
#include "pacsnoc/pac_bayes.hpp"
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

sim::NoiseDataset lti_data(std::size_t s) {
  sim::NoiseSpec spec;
  spec.kind = sim::GaussianPerStep{0.3, 0.3};
  return sim::generate_dataset(spec, s, 10, 1);
}

ControlProblem robot_problem(std::size_t xi) {
  ControlProblem p;
  sim::PlanarRobots r;
  p.plant = sim::Plant(r);
  ctrl::ImcRenArch a;
  a.xi_dim = xi;
  a.zeta_dim = xi;
  p.arch = a;
  p.cost.variant = cost::RobotNav::defaults_for(r);
  p.cost.gamma = cost::default_gamma(p.plant, p.cost, 100);
  return p;
}

sim::NoiseDataset robot_data(std::size_t s) {
  sim::NoiseSpec spec;
  spec.kind = sim::InitialOnly{0.2};
  spec.state_dim = 8;
  return sim::generate_dataset(spec, s, 100, 2);
}

}  // namespace

static void BM_LtiRollout(benchmark::State& state) {
  const auto p = lti_problem();
  const auto data = lti_data(1);
  const Vec theta{7.5, 3.0};
  for (auto _ : state) benchmark::DoNotOptimize(p.sequence_cost<double>(theta, data[0]));
}
BENCHMARK(BM_LtiRollout);

static void BM_RobotRollout(benchmark::State& state) {
  const auto p = robot_problem(static_cast<std::size_t>(state.range(0)));
  const auto data = robot_data(1);
  const Vec theta = initial_theta(p, 0.1, 1);
  for (auto _ : state) benchmark::DoNotOptimize(p.sequence_cost<double>(theta, data[0]));
  state.counters["params"] = static_cast<double>(p.dim());
}
BENCHMARK(BM_RobotRollout)->Arg(1)->Arg(3)->Arg(8);

static void BM_RobotCostGradient(benchmark::State& state) {
  const auto p = robot_problem(3);
  const auto data = robot_data(static_cast<std::size_t>(state.range(0)));
  const Vec theta = initial_theta(p, 0.1, 1);
  for (auto _ : state) benchmark::DoNotOptimize(empirical_cost_gradient(p, theta, data));
}
BENCHMARK(BM_RobotCostGradient)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_GridPosterior(benchmark::State& state) {
  const auto p = lti_problem();
  const auto data = lti_data(8);
  const auto prior = pb::lti_prior(pb::ih_lqr_gain(0.8, 0.1, 5.0, 0.003), true);
  const auto axes = inf::prior_axes(prior, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(inf::grid_posterior(prior, inf::grid_costs(p, axes, data), 10.0));
  }
}
BENCHMARK(BM_GridPosterior)->Arg(40)->Arg(120)->Unit(benchmark::kMillisecond);

static void BM_SvgdStep(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  std::vector<Vec> ps(n, Vec(194));
  std::vector<Vec> gs(n, Vec(194));
  for (auto& p : ps) {
    for (auto& v : p) v = normal(rng);
  }
  for (auto& g : gs) {
    for (auto& v : g) v = normal(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(inf::svgd_step(ps, gs, 1e-3));
}
BENCHMARK(BM_SvgdStep)->Arg(1)->Arg(10)->Arg(50);

static void BM_FlowSample(benchmark::State& state) {
  const inf::PlanarFlow flow(Vec(194, 0.0), Vec(194, 0.01), 16, 1, 0.01);
  std::mt19937_64 rng(4);
  for (auto _ : state) benchmark::DoNotOptimize(flow.sample(100, rng));
}
BENCHMARK(BM_FlowSample);

static void BM_FlowLogDensity(benchmark::State& state) {
  const inf::PlanarFlow flow(Vec(194, 0.0), Vec(194, 0.01), 16, 1, 0.01);
  std::mt19937_64 rng(5);
  const Vec theta = flow.sample(1, rng)[0];
  for (auto _ : state) benchmark::DoNotOptimize(flow.log_density(theta));
}
BENCHMARK(BM_FlowLogDensity);

static void BM_LogPartitionEstimate(benchmark::State& state) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec costs(static_cast<std::size_t>(state.range(0)));
  for (auto& c : costs) c = u(rng);
  for (auto _ : state) benchmark::DoNotOptimize(pb::log_partition_estimate(costs, 80.0));
}
BENCHMARK(BM_LogPartitionEstimate)->Arg(1000)->Arg(1000000);
BENCHMARK_MAIN();
