#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "pacsnoc/pac_bayes.hpp"

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

}  // namespace

TEST(LambdaStar, Values) {
  EXPECT_NEAR(pb::lambda_star(8, 0.2, 1.0), 10.149, 1e-3);
  EXPECT_NEAR(pb::lambda_star(512, 0.2, 1.0), 81.19, 1e-2);
  EXPECT_NEAR(pb::lambda_star(32, 0.1, 1.0), 24.279, 1e-3);
  EXPECT_NEAR(pb::lambda_star(8, 0.2, 2.0), pb::lambda_star(8, 0.2, 1.0) / 2.0, 1e-12);
}

TEST(LambdaStar, MinimizesRelaxedSlack) {
  // (1/lambda) ln(1/delta) + lambda C^2 / (8S) is minimal at lambda*.
  const std::size_t s = 32;
  const double delta = 0.1;
  const auto slack = [&](double l) { return std::log(1.0 / delta) / l + l / (8.0 * s); };
  const double ls = pb::lambda_star(s, delta, 1.0);
  for (double f : {0.5, 0.9, 0.99, 1.01, 1.1, 2.0}) EXPECT_GT(slack(f * ls), slack(ls));
}

TEST(LambdaStar, RejectsInvalid) {
  EXPECT_THROW(pb::lambda_star(0, 0.1, 1.0), ConfigError);
  EXPECT_THROW(pb::lambda_star(8, 1.0, 1.0), ConfigError);
  EXPECT_THROW(pb::lambda_star(8, 0.1, 0.0), ConfigError);
}

TEST(UnionDelta, Values) {
  EXPECT_DOUBLE_EQ(pb::union_delta(0.1, 10), 0.01);
  EXPECT_DOUBLE_EQ(pb::union_delta(0.1, 1), 0.1);
  EXPECT_DOUBLE_EQ(pb::union_delta(0.2, 4), 0.05);
  EXPECT_THROW(pb::union_delta(0.1, 0), ConfigError);
}

TEST(Randomized, PriorAsPosterior) {
  const double lhat = 0.37;
  const auto r = pb::bound_randomized(lhat, 0.0, 1.0, std::exp(-1.0), 1.0, 8);
  EXPECT_NEAR(r.upper, lhat + 1.0 + 1.0 / 64.0, 1e-14);
  EXPECT_EQ(r.family, pb::BoundFamily::kGeneral);
}

TEST(Randomized, Symmetric) {
  const double lhat = 0.4;
  const double ratio = 0.7;
  const double lambda = 3.0;
  const double delta = 0.15;
  const auto r = pb::bound_randomized(lhat, ratio, lambda, delta, 1.0, 20);
  const double gap = ratio / lambda + std::log(1.0 / delta) / lambda + lambda / (8.0 * 20.0);
  EXPECT_NEAR(r.upper - r.lower, 2.0 * gap, 1e-14);
  EXPECT_NEAR(r.upper + r.lower, 2.0 * lhat, 1e-14);
}

TEST(Randomized, SlackVanishesWithSqrtLambda) {
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t s : {100u, 10000u, 1000000u}) {
    const double lambda = std::sqrt(static_cast<double>(s));
    const auto r = pb::bound_randomized(0.0, 0.0, lambda, 0.1, 1.0, s);
    const double slack = r.confidence_term + r.slack_term;
    EXPECT_LT(slack, previous);
    previous = slack;
  }
  EXPECT_LT(previous, 5e-3);
}

TEST(Gibbs, ZeroLambdaIsPrior) {
  const auto p = lti_problem();
  const auto data = lti_data(4, 1);
  const auto prior = pb::lti_prior(7.5, true);
  const pb::GibbsPosterior post(p, prior, data, 0.0);
  for (const Vec& theta : {Vec{7.0, 3.0}, Vec{0.0, -1.0}, Vec{12.0, 6.0}}) {
    EXPECT_DOUBLE_EQ(post.log_unnorm(theta), prior.log_density<double>(theta));
  }
}

TEST(Gibbs, LogGapIsLambdaTimesCostGap) {
  const auto p = lti_problem();
  const auto data = lti_data(6, 2);
  // Symmetric about the k mean and inside the uniform beta support: equal prior density.
  const auto prior = pb::lti_prior(5.0, false);
  const Vec a{4.0, 1.0};
  const Vec b{6.0, 2.0};
  ASSERT_DOUBLE_EQ(prior.log_density<double>(a), prior.log_density<double>(b));
  const double lambda = 3.7;
  const pb::GibbsPosterior post(p, prior, data, lambda);
  EXPECT_NEAR(post.log_unnorm(a) - post.log_unnorm(b),
              lambda * (empirical_cost(p, b, data) - empirical_cost(p, a, data)), 1e-12);
}

TEST(Gibbs, OutsideSupport) {
  const auto p = lti_problem();
  const auto data = lti_data(2, 3);
  const pb::GibbsPosterior post(p, pb::lti_prior(7.5, false), data, 1.0);
  EXPECT_EQ(post.log_unnorm(Vec{7.0, 6.0}), -std::numeric_limits<double>::infinity());
  const auto g = post.log_unnorm_gradient(Vec{7.0, -6.0});
  EXPECT_EQ(g.value, -std::numeric_limits<double>::infinity());
  EXPECT_EQ(g.gradient, Vec(2, 0.0));
}

TEST(Gibbs, GradientMatchesFiniteDifferences) {
  const auto p = lti_problem();
  const auto data = lti_data(5, 4);
  const pb::GibbsPosterior post(p, pb::lti_prior(7.5, true), data, 10.0);
  const Vec theta{6.0, 2.5};
  const auto g = post.log_unnorm_gradient(theta);
  EXPECT_NEAR(g.value, post.log_unnorm(theta), 1e-12);
  for (std::size_t i = 0; i < 2; ++i) {
    Vec hi = theta;
    Vec lo = theta;
    hi[i] += 1e-6;
    lo[i] -= 1e-6;
    const double fd = (post.log_unnorm(hi) - post.log_unnorm(lo)) / 2e-6;
    EXPECT_NEAR(g.gradient[i], fd, 1e-5 * std::max(1.0, std::abs(fd)));
  }
}

TEST(Gibbs, Validation) {
  const auto p = lti_problem();
  const auto data = lti_data(2, 3);
  EXPECT_THROW(pb::GibbsPosterior(p, pb::lti_prior(7.5, false), data, -1.0), ConfigError);
  EXPECT_THROW(pb::GibbsPosterior(p, pb::Prior(pb::GaussianIso{Vec(3, 0.0), 1.0}), data, 1.0), ConfigError);
  EXPECT_THROW(pb::GibbsPosterior(p, pb::lti_prior(7.5, false), sim::NoiseDataset{}, 1.0), ConfigError);
}

TEST(Partition, Values) {
  EXPECT_NEAR(pb::partition_estimate(Vec(5, 0.0), 10.0), 1.0, 1e-15);
  EXPECT_NEAR(pb::partition_estimate(Vec(5, 1.0), 3.0), std::exp(-3.0), 1e-15);
  EXPECT_NEAR(pb::partition_estimate(Vec{0.2, 0.4}, 1.0), 0.744526, 1e-6);
  EXPECT_NEAR(pb::partition_estimate(Vec{0.2, 0.4}, 1.0), (std::exp(-0.2) + std::exp(-0.4)) / 2.0, 1e-15);
}

TEST(Partition, LogDomainAvoidsUnderflow) {
  // e^{-2000 * 0.9} underflows; the log form does not.
  const double lz = pb::log_partition_estimate(Vec{0.9, 0.95}, 2000.0);
  EXPECT_NEAR(lz, -1800.0 - std::log(2.0), 1e-9);
}

TEST(Partition, Bracket) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double lambda : {0.1, 1.0, 10.0, 80.0}) {
    Vec costs(200);
    for (auto& c : costs) c = u(rng);
    const double lz = pb::log_partition_estimate(costs, lambda);
    EXPECT_GE(lz, -lambda * 1.0 - 1e-12);
    EXPECT_LE(lz, 1e-12);
  }
}

TEST(GibbsExactBound, ZEqualsOne) {
  const double lambda = 4.0;
  const auto r = pb::bounds_qstar_exact(0.0, 0.0, 0.1, lambda, 1.0, 16);
  EXPECT_NEAR(r.upper, std::log(10.0) / lambda + lambda / (8.0 * 16.0), 1e-14);
}

TEST(GibbsExactBound, RelaxedValueAtLambdaStar) {
  for (std::size_t s : {8u, 32u, 512u}) {
    for (double delta : {0.1, 0.2}) {
      const double c = 1.0;
      const double ls = pb::lambda_star(s, delta, c);
      const auto r = pb::bounds_qstar_exact(0.5, -ls * c, delta, ls, c, s);
      const double hand = c * std::sqrt(std::log(1.0 / delta) / (2.0 * s));
      EXPECT_NEAR(r.confidence_term + r.slack_term, hand, 1e-12);
      EXPECT_NEAR(r.upper, c + hand, 1e-12);
    }
  }
}

TEST(GibbsExactBound, MatchesGeneralBoundAtGibbsPosterior) {
  // Three-point parameter space with prior p and costs L.
  const Vec p{0.5, 0.3, 0.2};
  const Vec l{0.1, 0.6, 0.35};
  const double lambda = 2.5;
  const double delta = 0.2;
  const std::size_t s = 12;
  double z = 0.0;
  for (std::size_t i = 0; i < 3; ++i) z += p[i] * std::exp(-lambda * l[i]);
  for (std::size_t i = 0; i < 3; ++i) {
    const double q = p[i] * std::exp(-lambda * l[i]) / z;
    const auto thm = pb::bound_randomized(l[i], std::log(q / p[i]), lambda, delta, 1.0, s);
    const auto cor = pb::bounds_qstar_exact(l[i], std::log(z), delta, lambda, 1.0, s);
    EXPECT_NEAR(thm.upper, cor.upper, 1e-14);
    EXPECT_NEAR(thm.lower, cor.lower, 1e-14);
  }
}

TEST(GibbsExactBound, LowerNotAboveUpperWhenCostBelowBound) {
  const auto r = pb::bounds_qstar_exact(0.3, -1.0, 0.1, 5.0, 1.0, 8);
  EXPECT_LE(r.lower, r.upper);
  EXPECT_GE(r.partition_term, 0.0);
  EXPECT_GE(r.confidence_term, 0.0);
  EXPECT_GE(r.slack_term, 0.0);
}

TEST(McDiarmid, Value) {
  const double hand = std::log(1.0 + (std::exp(1.0) - 1.0) / 100.0) * std::sqrt(50.0 * std::log(10.0));
  EXPECT_NEAR(hand, 0.18281, 1e-5);
  EXPECT_NEAR(pb::mcdiarmid_term(1.0, 1.0, 100, 0.1), hand, 1e-14);
}

TEST(McDiarmid, DecreasesToZero) {
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t n = 10; n <= 1000000; n *= 10) {
    const double m = pb::mcdiarmid_term(1.0, 1.0, n, 0.1);
    EXPECT_LT(m, previous);
    previous = m;
  }
  EXPECT_LT(previous, 2e-3);
  EXPECT_LT(pb::mcdiarmid_term(1.0, 1.0, 100000000, 0.1), 2e-4);
}

TEST(McDiarmid, LargeLambdaStable) {
  // Direct evaluation of e^{lambda C} overflows at lambda = 800.
  const double m = pb::mcdiarmid_term(800.0, 1.0, 1000, 0.1);
  ASSERT_TRUE(std::isfinite(m));
  const double hand = (800.0 - std::log(1000.0)) * std::sqrt(500.0 * std::log(10.0)) / 800.0;
  EXPECT_NEAR(m, hand, 1e-9);
}

TEST(GibbsMcBound, AddsCorrection) {
  const auto exact = pb::bounds_qstar_exact(0.3, -2.0, 0.1, 5.0, 1.0, 8);
  const auto mc = pb::bounds_qstar_mc(0.3, -2.0, 1000, 0.1, 5.0, 1.0, 8);
  const double m = pb::mcdiarmid_term(5.0, 1.0, 1000, 0.1);
  EXPECT_NEAR(mc.upper, exact.upper + m, 1e-14);
  EXPECT_NEAR(mc.lower, exact.lower - m, 1e-14);
  EXPECT_EQ(mc.family, pb::BoundFamily::kGibbsMonteCarlo);
  EXPECT_NEAR(mc.validity_each, 0.8, 1e-15);
  EXPECT_NEAR(mc.validity_joint, 0.7, 1e-15);
  EXPECT_NEAR(exact.validity_joint, 0.8, 1e-15);
}

TEST(GibbsMcBound, SampleOverloadMatchesValueOverload) {
  const auto p = lti_problem();
  const auto data = lti_data(8, 6);
  const auto prior = pb::lti_prior(7.5, true);
  std::mt19937_64 rng(7);
  std::vector<Vec> samples;
  for (int i = 0; i < 50; ++i) samples.push_back(prior.sample(rng));
  const Vec theta{7.0, 3.0};
  const auto r = pb::bounds_qstar_mc(p, theta, samples, data, 2.0, 0.1);
  Vec costs;
  for (const auto& s : samples) costs.push_back(empirical_cost(p, s, data));
  double mean = 0.0;
  for (double c : costs) mean += std::exp(-2.0 * c);
  mean /= 50.0;
  EXPECT_NEAR(r.log_z, std::log(mean), 1e-12);
  EXPECT_NEAR(r.empirical_cost, empirical_cost(p, theta, data), 1e-15);
  EXPECT_EQ(r.prior_samples, 50u);
  EXPECT_EQ(r.sample_size, 8u);
}

TEST(TwoStage, Lambdas) {
  const auto l = pb::two_stage_lambdas(2, 6, 16.0);
  EXPECT_DOUBLE_EQ(l.lambda1, 4.0);
  EXPECT_DOUBLE_EQ(l.lambda2, 12.0);
  EXPECT_DOUBLE_EQ(pb::two_stage_lambdas(0, 8, 3.0).lambda2, 3.0);
}

TEST(SplitSearch, SingleCandidate) {
  const std::vector<std::size_t> cands{3};
  int calls = 0;
  const auto r = pb::two_stage_split_search(cands, 8, 10.0, 0.1, 1.0, 1000, [&](std::size_t s1) {
    ++calls;
    pb::BoundReport b;
    b.upper = 5.0 + s1;
    return b;
  });
  EXPECT_EQ(r.s1, 3u);
  EXPECT_EQ(calls, 1);
  EXPECT_DOUBLE_EQ(r.report.upper, 8.0);
}

TEST(SplitSearch, TieGoesToSmallerS1) {
  const std::vector<std::size_t> cands{5, 2, 4};
  const auto r = pb::two_stage_split_search(cands, 8, 10.0, 0.1, 1.0, 1000, [](std::size_t) {
    pb::BoundReport b;
    b.upper = 0.5;
    return b;
  });
  EXPECT_EQ(r.s1, 2u);
}

TEST(SplitSearch, RankingMatchesBruteForce) {
  const std::size_t s = 16;
  const double delta = 0.1;
  const double lambda = pb::lambda_star(s, delta, 1.0);
  const std::size_t np = 300000;
  std::vector<std::size_t> cands(s - 1);
  std::iota(cands.begin(), cands.end(), 1);
  // Stage-2 bound with a fixed empirical term: only the constant terms vary.
  const auto evaluate = [&](std::size_t s1) {
    const auto l = pb::two_stage_lambdas(s1, s - s1, lambda);
    return pb::bounds_qstar_mc(0.05, -0.05 * l.lambda2, np, delta, l.lambda2, 1.0, s - s1);
  };
  std::size_t brute = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t s1 : cands) {
    const double s2 = static_cast<double>(s - s1);
    const double l2 = s2 / s * lambda;
    const double hand = std::log(1.0 / delta) / l2 + l2 / (8.0 * s2) +
                        std::log1p(std::expm1(l2) / np) * std::sqrt(0.5 * np * std::log(1.0 / delta)) / l2;
    EXPECT_NEAR(pb::split_constant_terms(s1, s, lambda, delta, 1.0, np), hand, 1e-10);
    const double u = evaluate(s1).upper;
    if (u < best) {
      best = u;
      brute = s1;
    }
  }
  const auto r = pb::two_stage_split_search(cands, s, lambda, delta, 1.0, np, evaluate);
  EXPECT_EQ(r.s1, brute);
  EXPECT_NEAR(r.report.upper, best, 1e-14);
  for (std::size_t i = 1; i < r.ranking.size(); ++i) EXPECT_LE(r.ranking[i - 1].second, r.ranking[i].second);
}

TEST(SplitSearch, InvalidCandidate) {
  const std::vector<std::size_t> cands{8};
  EXPECT_THROW(pb::two_stage_split_search(cands, 8, 10.0, 0.1, 1.0, 100, [](std::size_t) { return pb::BoundReport{}; }),
               ConfigError);
}

TEST(BoundReport, CsvRowHasHeaderArity) {
  const auto r = pb::bounds_qstar_mc(0.3, -2.0, 1000, 0.1, 5.0, 1.0, 8);
  const auto count = [](const std::string& s) { return std::count(s.begin(), s.end(), ','); };
  EXPECT_EQ(count(r.csv_row()), count(pb::BoundReport::csv_header()));
  EXPECT_NE(r.csv_row().find("gibbs_mc"), std::string::npos);
}
