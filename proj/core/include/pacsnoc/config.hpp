#pragma once

// Experiment configuration read from a TOML-style file.
//
// Supported syntax: `# comments`, `[table]` headers (dotted names allowed),
// `key = value` with strings, numbers, booleans and (nested, multi-line)
// arrays. Inline tables, dates and multi-line strings are not supported.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>

#include "pacsnoc/pac_bayes.hpp"
#include "pacsnoc/problem.hpp"
#include "pacsnoc/training.hpp"

namespace pacsnoc::config {

struct Value {
  std::variant<double, bool, std::string, std::vector<Value>> data;

  bool is_number() const { return std::holds_alternative<double>(data); }
  bool is_string() const { return std::holds_alternative<std::string>(data); }
  bool is_array() const { return std::holds_alternative<std::vector<Value>>(data); }
};

/// Flat table of fully qualified keys ("table.key") to values.
class Document {
 public:
  static Document parse(const std::string& text);
  static Document load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  /// Sets or replaces a value; `text` is parsed as a config value and taken as a
  /// bare string when that fails.
  void set(const std::string& key, const std::string& text);
  const Value& at(const std::string& key) const;

  double number(const std::string& key, double fallback) const;
  std::size_t count(const std::string& key, std::size_t fallback) const;
  bool boolean(const std::string& key, bool fallback) const;
  std::string string(const std::string& key, const std::string& fallback) const;
  Vec numbers(const std::string& key, const Vec& fallback) const;
  std::vector<Vec> matrix(const std::string& key, const std::vector<Vec>& fallback) const;

  const std::map<std::string, Value>& values() const { return values_; }
  /// Keys never read through the accessors above.
  std::vector<std::string> unused_keys() const;

 private:
  std::map<std::string, Value> values_;
  mutable std::set<std::string> used_;
};

enum class Method { kEmpirical, kGrid, kSvgd, kFlows };

struct ExperimentConfig {
  std::string name = "experiment";
  std::string output_dir = "out";

  sim::Plant plant;
  sim::NoiseSpec noise;
  std::size_t sample_size = 8;  // S
  std::size_t horizon = 10;     // T
  std::uint64_t data_seed = 1;
  std::size_t n_test = 10000;
  std::uint64_t test_seed = 2;

  cost::CostSpec cost;
  bool gamma_auto = true;
  ctrl::Architecture arch;

  pb::Prior prior;
  Method method = Method::kEmpirical;
  std::size_t particles = 1;
  std::size_t flow_layers = 16;
  double flow_scale = 4.0;
  std::size_t flow_n_mc = 8;
  std::size_t flow_steps = 500;
  double flow_lr = 1e-3;
  std::size_t grid_resolution = 120;

  double delta = 0.1;
  std::optional<double> lambda;  // lambda* when empty
  std::size_t n_prior = 1000;    // N_P
  std::vector<std::size_t> split_s1;  // two-stage candidates; empty for single stage
  std::size_t n_candidates = 1;       // N_Q
  std::size_t bootstrap_resamples = 50;
  std::uint64_t seed = 0;

  TrainOptions train;
  bool adam = false;

  ControlProblem problem() const { return {plant, arch, cost}; }
  double resolved_lambda(std::size_t sample_size_override = 0) const;
};

std::string method_name(Method m);

/// Builds and validates a configuration; throws ConfigError on invalid input.
ExperimentConfig from_document(const Document& doc);
ExperimentConfig load(const std::string& path);

}  // namespace pacsnoc::config
