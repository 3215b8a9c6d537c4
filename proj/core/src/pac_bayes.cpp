#include "pacsnoc/pac_bayes.hpp"

#include <algorithm>
#include <sstream>

#include "pacsnoc/parallel.hpp"

namespace pacsnoc::pb {

namespace {

void check_common(double lambda, double delta, double bound_c, std::size_t sample_size) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  if (!(bound_c > 0.0)) throw ConfigError("C must be positive");
  if (sample_size == 0) throw ConfigError("sample size must be positive");
}

}  // namespace

GibbsPosterior::GibbsPosterior(const ControlProblem& problem, Prior prior, const sim::NoiseDataset& data,
                               double lambda)
    : problem_(&problem), prior_(std::move(prior)), data_(&data), lambda_(lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("Gibbs posterior: lambda must be >= 0");
  if (prior_.dim() != problem.dim()) throw ConfigError("Gibbs posterior: prior dimension does not match controller");
  if (data.empty()) throw ConfigError("Gibbs posterior: empty dataset");
}

double GibbsPosterior::log_unnorm(std::span<const double> theta) const {
  if (!prior_.in_support(theta)) return -std::numeric_limits<double>::infinity();
  const double lp = prior_.log_density<double>(theta);
  if (lambda_ == 0.0) return lp;
  return lp - lambda_ * empirical_cost(*problem_, theta, *data_);
}

ad::ValueAndGradient GibbsPosterior::log_unnorm_gradient(std::span<const double> theta) const {
  if (!prior_.in_support(theta)) {
    return {-std::numeric_limits<double>::infinity(), Vec(theta.size(), 0.0)};
  }
  ad::ValueAndGradient out = ad::value_and_gradient(
      [this](std::span<const ad::Var> x) { return prior_.log_density<ad::Var>(x); }, theta);
  if (lambda_ == 0.0) return out;
  const auto cost = empirical_cost_gradient(*problem_, theta, *data_);
  out.value -= lambda_ * cost.value;
  for (std::size_t i = 0; i < theta.size(); ++i) out.gradient[i] -= lambda_ * cost.gradient[i];
  return out;
}

std::string family_name(BoundFamily f) {
  switch (f) {
    case BoundFamily::kGeneral:
      return "general";
    case BoundFamily::kGibbsExact:
      return "gibbs_exact";
    case BoundFamily::kGibbsMonteCarlo:
      return "gibbs_mc";
  }
  return "unknown";
}

std::string BoundReport::csv_header() {
  return "method,family,S,delta,lambda,C,empirical_cost,log_z,kl_term,partition_term,confidence_term,"
         "slack_term,mcdiarmid_term,n_prior,upper,lower,validity_each,validity_joint";
}

std::string BoundReport::csv_row() const {
  std::ostringstream os;
  os.precision(12);
  os << method << ',' << family_name(family) << ',' << sample_size << ',' << delta << ',' << lambda << ','
     << bound_c << ',' << empirical_cost << ',' << log_z << ',' << kl_term << ',' << partition_term << ','
     << confidence_term << ',' << slack_term << ',' << mcdiarmid_term << ',' << prior_samples << ',' << upper
     << ',' << lower << ',' << validity_each << ',' << validity_joint;
  return os.str();
}

double lambda_star(std::size_t sample_size, double delta, double bound_c) {
  if (sample_size == 0) throw ConfigError("lambda_star: S must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("lambda_star: delta must lie in (0, 1)");
  if (!(bound_c > 0.0)) throw ConfigError("lambda_star: C must be positive");
  return std::sqrt(8.0 * static_cast<double>(sample_size) * std::log(1.0 / delta)) / bound_c;
}

double union_delta(double delta, std::size_t num_candidates) {
  if (num_candidates == 0) throw ConfigError("union_delta: N_Q must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("union_delta: delta must lie in (0, 1)");
  return delta / static_cast<double>(num_candidates);
}

BoundReport bound_randomized(double empirical_cost, double log_density_ratio, double lambda, double delta,
                             double bound_c, std::size_t sample_size) {
  check_common(lambda, delta, bound_c, sample_size);
  BoundReport r;
  r.method = "randomized";
  r.family = BoundFamily::kGeneral;
  r.sample_size = sample_size;
  r.delta = delta;
  r.lambda = lambda;
  r.bound_c = bound_c;
  r.empirical_cost = empirical_cost;
  r.kl_term = log_density_ratio / lambda;
  r.confidence_term = std::log(1.0 / delta) / lambda;
  r.slack_term = lambda * bound_c * bound_c / (8.0 * static_cast<double>(sample_size));
  const double gap = r.kl_term + r.confidence_term + r.slack_term;
  r.upper = empirical_cost + gap;
  r.lower = empirical_cost - gap;
  r.validity_each = 1.0 - delta;
  r.validity_joint = 1.0 - 2.0 * delta;
  return r;
}

BoundReport bounds_qstar_exact(double empirical_cost, double log_z, double delta, double lambda, double bound_c,
                               std::size_t sample_size) {
  check_common(lambda, delta, bound_c, sample_size);
  BoundReport r;
  r.method = "qstar_exact";
  r.family = BoundFamily::kGibbsExact;
  r.sample_size = sample_size;
  r.delta = delta;
  r.lambda = lambda;
  r.bound_c = bound_c;
  r.empirical_cost = empirical_cost;
  r.log_z = log_z;
  r.partition_term = -log_z / lambda;
  r.confidence_term = std::log(1.0 / delta) / lambda;
  r.slack_term = lambda * bound_c * bound_c / (8.0 * static_cast<double>(sample_size));
  r.upper = r.partition_term + r.confidence_term + r.slack_term;
  r.lower = 2.0 * empirical_cost - r.partition_term - r.confidence_term - r.slack_term;
  r.validity_each = 1.0 - delta;
  r.validity_joint = 1.0 - 2.0 * delta;
  return r;
}

double mcdiarmid_term(double lambda, double bound_c, std::size_t num_prior_samples, double delta) {
  if (num_prior_samples == 0) throw ConfigError("mcdiarmid_term: N_P must be positive");
  if (!(lambda > 0.0) || !(bound_c > 0.0)) throw ConfigError("mcdiarmid_term: lambda and C must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("mcdiarmid_term: delta must lie in (0, 1)");
  const double n = static_cast<double>(num_prior_samples);
  const double x = lambda * bound_c;
  // ln(1 + (e^x - 1)/N) = x + ln(1 + (N - 1) e^{-x}) - ln N for large x.
  const double c = x > 1.0 ? x + std::log1p((n - 1.0) * std::exp(-x)) - std::log(n) : std::log1p(std::expm1(x) / n);
  return c * std::sqrt(0.5 * n * std::log(1.0 / delta)) / lambda;
}

double log_partition_estimate(std::span<const double> empirical_costs, double lambda) {
  if (empirical_costs.empty()) throw ConfigError("partition estimate: no prior samples");
  Vec terms(empirical_costs.size());
  for (std::size_t i = 0; i < terms.size(); ++i) terms[i] = -lambda * empirical_costs[i];
  return log_sum_exp(terms) - std::log(static_cast<double>(terms.size()));
}

double partition_estimate(std::span<const double> empirical_costs, double lambda) {
  return std::exp(log_partition_estimate(empirical_costs, lambda));
}

BoundReport bounds_qstar_mc(double empirical_cost, double log_z_hat, std::size_t num_prior_samples, double delta,
                            double lambda, double bound_c, std::size_t sample_size) {
  BoundReport r = bounds_qstar_exact(empirical_cost, log_z_hat, delta, lambda, bound_c, sample_size);
  r.method = "qstar_mc";
  r.family = BoundFamily::kGibbsMonteCarlo;
  r.prior_samples = num_prior_samples;
  r.mcdiarmid_term = mcdiarmid_term(lambda, bound_c, num_prior_samples, delta);
  r.upper += r.mcdiarmid_term;
  r.lower -= r.mcdiarmid_term;
  r.validity_each = 1.0 - 2.0 * delta;
  r.validity_joint = 1.0 - 3.0 * delta;
  return r;
}

BoundReport bounds_qstar_mc(const ControlProblem& problem, std::span<const double> theta,
                            const std::vector<Vec>& prior_samples, const sim::NoiseDataset& data, double lambda,
                            double delta) {
  if (prior_samples.empty()) throw ConfigError("bounds_qstar_mc: no prior samples");
  Vec costs(prior_samples.size());
  parallel_for(prior_samples.size(), [&](std::size_t i) {
    const Vec per_seq = sequence_costs(problem, prior_samples[i], data);
    costs[i] = ad::sum(std::span<const double>(per_seq)) / static_cast<double>(data.size());
  });
  const double lhat = empirical_cost(problem, theta, data);
  return bounds_qstar_mc(lhat, log_partition_estimate(costs, lambda), prior_samples.size(), delta, lambda,
                         problem.cost.bound, data.size());
}

StageLambdas two_stage_lambdas(std::size_t s1, std::size_t s2, double lambda) {
  if (s1 + s2 == 0) throw ConfigError("two-stage split: empty dataset");
  const double s = static_cast<double>(s1 + s2);
  return {static_cast<double>(s1) / s * lambda, static_cast<double>(s2) / s * lambda};
}

double split_constant_terms(std::size_t s1, std::size_t sample_size, double lambda, double delta,
                            double bound_c, std::size_t num_prior_samples) {
  if (s1 >= sample_size) throw ConfigError("split search: S1 must leave data for stage 2");
  const std::size_t s2 = sample_size - s1;
  const double l2 = two_stage_lambdas(s1, s2, lambda).lambda2;
  return std::log(1.0 / delta) / l2 + l2 * bound_c * bound_c / (8.0 * static_cast<double>(s2)) +
         mcdiarmid_term(l2, bound_c, num_prior_samples, delta);
}

SplitSearchResult two_stage_split_search(std::span<const std::size_t> candidate_s1, std::size_t sample_size,
                                         double lambda, double delta, double bound_c,
                                         std::size_t num_prior_samples,
                                         const std::function<BoundReport(std::size_t)>& evaluate,
                                         std::size_t fully_evaluated) {
  if (candidate_s1.empty()) throw ConfigError("split search: no candidates");
  SplitSearchResult result;
  for (std::size_t s1 : candidate_s1) {
    result.ranking.emplace_back(s1, split_constant_terms(s1, sample_size, lambda, delta, bound_c, num_prior_samples));
  }
  std::stable_sort(result.ranking.begin(), result.ranking.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second < b.second : a.first < b.first;
  });
  const std::size_t n = std::min(std::max<std::size_t>(fully_evaluated, 1), result.ranking.size());
  bool have = false;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t s1 = result.ranking[i].first;
    BoundReport r = evaluate(s1);
    if (!have || r.upper < result.report.upper || (r.upper == result.report.upper && s1 < result.s1)) {
      result.s1 = s1;
      result.report = std::move(r);
      have = true;
    }
  }
  return result;
}

}  // namespace pacsnoc::pb
