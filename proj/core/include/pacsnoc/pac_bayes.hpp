#pragma once

// Gibbs posterior, lambda*, partition-function estimates and the bound families.

#include <functional>
#include <limits>
#include <string>

#include "pacsnoc/priors.hpp"
#include "pacsnoc/problem.hpp"

namespace pacsnoc::pb {

/// log P(theta) - lambda * L-hat(theta, S), known up to -ln Z.
class GibbsPosterior {
 public:
  GibbsPosterior(const ControlProblem& problem, Prior prior, const sim::NoiseDataset& data, double lambda);

  const ControlProblem& problem() const { return *problem_; }
  const Prior& prior() const { return prior_; }
  const sim::NoiseDataset& data() const { return *data_; }
  double lambda() const { return lambda_; }

  /// -inf outside the prior support.
  double log_unnorm(std::span<const double> theta) const;
  /// Value and gradient; outside the support the value is -inf and the gradient zero.
  ad::ValueAndGradient log_unnorm_gradient(std::span<const double> theta) const;

 private:
  const ControlProblem* problem_;
  Prior prior_;
  const sim::NoiseDataset* data_;
  double lambda_;
};

enum class BoundFamily { kGeneral, kGibbsExact, kGibbsMonteCarlo };

std::string family_name(BoundFamily f);

struct BoundReport {
  std::string method;
  BoundFamily family = BoundFamily::kGibbsExact;
  std::size_t sample_size = 0;  // S (S2 for a two-stage report)
  double delta = 0.1;
  double lambda = 1.0;
  double bound_c = 1.0;
  double empirical_cost = 0.0;
  double log_z = std::numeric_limits<double>::quiet_NaN();  // ln Z or ln Z-hat
  double kl_term = 0.0;          // (1/lambda) ln dQ/dP (general bound only)
  double partition_term = 0.0;   // -(1/lambda) ln Z
  double confidence_term = 0.0;  // (1/lambda) ln(1/delta)
  double slack_term = 0.0;       // lambda C^2 / (8 S)
  double mcdiarmid_term = 0.0;
  std::size_t prior_samples = 0;  // N_P
  double upper = 0.0;
  double lower = 0.0;
  double validity_each = 0.0;   // probability each inequality holds
  double validity_joint = 0.0;  // probability both hold

  static std::string csv_header();
  std::string csv_row() const;
};

/// sqrt(8 S ln(1/delta)) / C.
double lambda_star(std::size_t sample_size, double delta, double bound_c);

/// delta / N_Q.
double union_delta(double delta, std::size_t num_candidates);

/// Randomized bound for theta ~ Q and any posterior Q:
///   L-hat +/- [(1/lambda) ln dQ/dP + (1/lambda) ln(1/delta) + lambda C^2/(8S)].
BoundReport bound_randomized(double empirical_cost, double log_density_ratio, double lambda, double delta,
                             double bound_c, std::size_t sample_size);

/// Bounds for theta ~ Q* with the exact ln Z.
BoundReport bounds_qstar_exact(double empirical_cost, double log_z, double delta, double lambda, double bound_c,
                               std::size_t sample_size);

/// (1/lambda) ln(1 + (e^{lambda C} - 1)/N_P) sqrt((N_P/2) ln(1/delta)).
double mcdiarmid_term(double lambda, double bound_c, std::size_t num_prior_samples, double delta);

/// ln Z-hat = ln((1/N_P) sum_n exp(-lambda L-hat_n)), evaluated in the log domain.
double log_partition_estimate(std::span<const double> empirical_costs, double lambda);
/// Z-hat itself; may underflow for large lambda, prefer the log form.
double partition_estimate(std::span<const double> empirical_costs, double lambda);

/// Bounds for theta ~ Q* with ln Z replaced by its Monte-Carlo estimate.
BoundReport bounds_qstar_mc(double empirical_cost, double log_z_hat, std::size_t num_prior_samples, double delta,
                            double lambda, double bound_c, std::size_t sample_size);

/// Empirical costs of prior samples, then bounds_qstar_mc.
BoundReport bounds_qstar_mc(const ControlProblem& problem, std::span<const double> theta,
                            const std::vector<Vec>& prior_samples, const sim::NoiseDataset& data, double lambda,
                            double delta);

/// lambda_i = (S_i / S) lambda.
struct StageLambdas {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};
StageLambdas two_stage_lambdas(std::size_t s1, std::size_t s2, double lambda);

struct SplitSearchResult {
  std::size_t s1 = 0;
  BoundReport report;
  std::vector<std::pair<std::size_t, double>> ranking;  // (S1, constant terms), best first
};

/// Constant terms of the Monte-Carlo bound at stage 2:
///   (1/lambda2) ln(1/delta) + lambda2 C^2/(8 S2) + mcdiarmid(lambda2).
double split_constant_terms(std::size_t s1, std::size_t sample_size, double lambda, double delta,
                            double bound_c, std::size_t num_prior_samples);

/// Ranks candidate S1 values by their constant terms, evaluates the full bound
/// for the best three with `evaluate(S1)` and returns the tightest. Ties go to
/// the smaller S1.
SplitSearchResult two_stage_split_search(std::span<const std::size_t> candidate_s1, std::size_t sample_size,
                                         double lambda, double delta, double bound_c,
                                         std::size_t num_prior_samples,
                                         const std::function<BoundReport(std::size_t)>& evaluate,
                                         std::size_t fully_evaluated = 3);

}  // namespace pacsnoc::pb
