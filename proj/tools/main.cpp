// pacsnoc: dataset generation, training, bounds, evaluation and selection
// driven by one experiment config.

#include <filesystem>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>

#include "CLI11.hpp"
#include "pacsnoc/config.hpp"
#include "pacsnoc/inference/grid.hpp"
#include "pacsnoc/io.hpp"
#include "pacsnoc/parallel.hpp"
#include "pacsnoc/pipeline.hpp"
#include "pacsnoc/selection.hpp"

using namespace pacsnoc;

namespace {

constexpr int kConfigExit = 2;
constexpr int kNumericalExit = 3;

// Flags that mirror config keys; each flag sets the key it names.
const std::vector<std::pair<std::string, std::string>> kOverrideFlags{
    {"--name", "experiment.name"},         {"--output-dir", "experiment.output_dir"},
    {"--seed", "experiment.seed"},         {"--S", "data.S"},
    {"--T", "data.T"},                     {"--data-seed", "data.seed"},
    {"--n-test", "data.n_test"},           {"--test-seed", "data.test_seed"},
    {"--method", "method.kind"},           {"--particles", "method.particles"},
    {"--layers", "method.layers"},         {"--scale", "method.scale"},
    {"--grid-resolution", "method.grid_resolution"}, {"--delta", "bound.delta"},
    {"--lambda", "bound.lambda"},          {"--n-prior", "bound.n_prior"},
    {"--split-s1", "bound.split_s1"},      {"--n-candidates", "bound.n_candidates"},
    {"--resamples", "bound.bootstrap_resamples"}, {"--epochs", "train.epochs"},
    {"--lr", "train.lr"},                  {"--patience", "train.patience"},
};

struct Invocation {
  std::string config_path;
  std::map<std::string, std::string> flag_values;  // config key -> raw text
  std::vector<std::string> sets;                   // key=value
  std::string data_path;
  std::string checkpoint_path;
};

void add_common(CLI::App* cmd, Invocation& inv) {
  cmd->add_option("--config", inv.config_path, "Experiment config (TOML)")->required();
  for (const auto& [flag, key] : kOverrideFlags) {
    cmd->add_option_function<std::string>(
        flag, [&inv, key = key](const std::string& v) { inv.flag_values[key] = v; }, "Sets " + key);
  }
  cmd->add_option("--set", inv.sets, "Any config key, as table.key=value");
  cmd->add_option("--data", inv.data_path, "Dataset JSON (default <output_dir>/dataset.json)");
  cmd->add_option("--checkpoint", inv.checkpoint_path, "Checkpoint JSON (default <output_dir>/checkpoint.json)");
}

struct Loaded {
  config::ExperimentConfig cfg;
  std::string archive;  // config text plus applied overrides
  std::string data_path;
  std::string checkpoint_path;
};

Loaded load(const Invocation& inv) {
  auto doc = config::Document::load(inv.config_path);
  std::string archive = io::read_text(inv.config_path);
  std::vector<std::pair<std::string, std::string>> overrides(inv.flag_values.begin(), inv.flag_values.end());
  for (const auto& s : inv.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects table.key=value, got '" + s + "'");
    overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  if (!overrides.empty()) archive += "\n# command-line overrides\n";
  for (const auto& [key, value] : overrides) {
    doc.set(key, value);
    archive += "# " + key + " = " + value + "\n";
  }
  Loaded out{config::from_document(doc), archive, inv.data_path, inv.checkpoint_path};
  if (out.data_path.empty()) out.data_path = out.cfg.output_dir + "/dataset.json";
  if (out.checkpoint_path.empty()) out.checkpoint_path = out.cfg.output_dir + "/checkpoint.json";
  io::ensure_directory(out.cfg.output_dir);
  io::write_text(out.cfg.output_dir + "/config.toml", out.archive);
  return out;
}

std::string path_in(const config::ExperimentConfig& cfg, const std::string& file) {
  return cfg.output_dir + "/" + file;
}

sim::NoiseDataset read_data(const Loaded& l) {
  if (!std::filesystem::exists(l.data_path)) {
    throw ConfigError("dataset '" + l.data_path + "' not found; run gen-data first");
  }
  return io::read_dataset(l.data_path);
}

io::Checkpoint read_ckpt(const Loaded& l) {
  if (!std::filesystem::exists(l.checkpoint_path)) {
    throw ConfigError("checkpoint '" + l.checkpoint_path + "' not found; run train first");
  }
  return io::read_checkpoint(l.checkpoint_path);
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

std::string validity_text(const pb::BoundReport& r) {
  std::ostringstream os;
  os << "each inequality holds with probability >= " << r.validity_each << ", both jointly >= "
     << r.validity_joint;
  return os.str();
}

// ---- gen-data ----

int cmd_gen_data(const Loaded& l) {
  const auto& c = l.cfg;
  const auto data = sim::generate_dataset(c.noise, c.sample_size, c.horizon, c.data_seed);
  io::write_dataset(l.data_path, data);
  std::cout << "wrote " << data.size() << " sequences of length " << c.horizon + 1 << " to " << l.data_path
            << "\n";
  return 0;
}

// ---- train ----

inf::FlowTrainOptions flow_options(const config::ExperimentConfig& c) {
  inf::FlowTrainOptions fo;
  fo.steps = c.flow_steps;
  fo.n_mc = c.flow_n_mc;
  fo.lr = c.flow_lr;
  fo.adam = c.adam;
  fo.seed = c.seed;
  return fo;
}

int cmd_train(const Loaded& l) {
  const auto& c = l.cfg;
  const auto data = read_data(l);
  const auto problem = c.problem();
  const double lambda = c.resolved_lambda(data.size());
  io::Checkpoint ckpt;
  ckpt.arch = c.arch;
  ckpt.method = config::method_name(c.method);
  std::vector<std::string> rows;
  std::string header;

  switch (c.method) {
    case config::Method::kEmpirical: {
      const auto res = train_empirical(problem, data, c.train);
      ckpt.thetas = {res.theta};
      header = "epoch,train_cost,validation_cost";
      for (std::size_t e = 0; e < res.train_cost.size(); ++e) {
        const double v = e < res.validation_cost.size() ? res.validation_cost[e] : std::nan("");
        rows.push_back(std::to_string(e) + "," + num(res.train_cost[e]) + "," + num(v));
      }
      std::cout << "empirical: " << res.epochs << " epochs, best epoch " << res.best_epoch << ", L-hat "
                << empirical_cost(problem, res.theta, data) << "\n";
      break;
    }
    case config::Method::kGrid: {
      const auto post = inf::grid_posterior(c.prior, problem, data, lambda, c.grid_resolution);
      ckpt.thetas = inf::grid_sample(post, c.n_candidates, c.seed);
      const Vec mass = post.mass();
      std::vector<std::string> cells;
      const std::size_t n = post.axes.beta.size();
      for (std::size_t i = 0; i < mass.size(); ++i) {
        cells.push_back(num(post.axes.k[i / n]) + "," + num(post.axes.beta[i % n]) + "," + num(post.lhat[i]) +
                        "," + num(mass[i]));
      }
      io::write_csv(path_in(c, "grid_posterior.csv"), "k,beta,empirical_cost,mass", cells);
      header = "lambda,log_z,mean_k,mean_beta,var_k,var_beta";
      rows.push_back(num(lambda) + "," + num(post.log_z) + "," + num(post.mean(0)) + "," + num(post.mean(1)) +
                     "," + num(post.variance(0)) + "," + num(post.variance(1)));
      std::cout << "grid posterior: lambda " << lambda << ", E[k] " << post.mean(0) << ", E[beta] "
                << post.mean(1) << ", Var[beta] " << post.variance(1) << "\n";
      break;
    }
    case config::Method::kSvgd: {
      pipeline::PacSvgdOptions o;
      o.particles = c.particles;
      o.epochs = c.train.epochs;
      o.lr = c.train.lr;
      o.patience = c.train.patience;
      o.train_fraction = c.train.train_fraction;
      o.init_std = c.train.init_std;
      o.seed = c.train.seed;
      o.project = c.train.project;
      const double lam = c.resolved_lambda(train_validation_split(data, o.train_fraction).first.size());
      const auto res = pipeline::train_pac_svgd(problem, c.prior, data, lam, o);
      ckpt.thetas = res.particles;
      header = "epoch,mean_log_target,validation_cost";
      for (std::size_t e = 0; e < res.mean_log_target.size(); ++e) {
        const double v = e < res.validation.size() ? res.validation[e] : std::nan("");
        rows.push_back(std::to_string(e) + "," + num(res.mean_log_target[e]) + "," + num(v));
      }
      std::cout << "svgd: " << res.particles.size() << " particles, " << res.epochs << " epochs, lambda " << lam
                << "\n";
      break;
    }
    case config::Method::kFlows: {
      std::vector<std::uint64_t> seeds(5);
      std::iota(seeds.begin(), seeds.end(), c.seed);
      TrainOptions base_opt = c.train;
      base_opt.train_fraction = 1.0;
      const auto base = flow_base_init(problem, data[0], seeds, c.flow_scale, base_opt);
      const inf::PlanarFlow flow(base.mean, base.stddev, c.flow_layers, c.seed + 1, 0.01);
      const pb::GibbsPosterior post(problem, c.prior, data, lambda);
      const auto res = inf::flow_train(
          flow, [&](std::span<const double> t) { return post.log_unnorm_gradient(t); }, flow_options(c));
      std::mt19937_64 rng(c.seed);
      ckpt.thetas = res.flow.sample(c.n_candidates, rng);
      ckpt.flow = res.flow;
      header = "step,objective";
      for (std::size_t s = 0; s < res.objective.size(); ++s) {
        rows.push_back(std::to_string(s) + "," + num(res.objective[s]));
      }
      std::cout << "flows: " << c.flow_layers << " layers, objective " << res.objective.front() << " -> "
                << res.objective.back() << "\n";
      break;
    }
  }
  io::write_checkpoint(l.checkpoint_path, ckpt);
  io::write_csv(path_in(c, "train_metrics.csv"), header, rows);
  std::cout << "wrote " << l.checkpoint_path << "\n";
  return 0;
}

// ---- bound ----

int cmd_bound(const Loaded& l) {
  const auto& c = l.cfg;
  const auto data = read_data(l);
  const auto problem = c.problem();
  const double lambda = c.resolved_lambda(data.size());
  std::vector<std::string> rows;

  if (c.method == config::Method::kGrid) {
    const auto post = inf::grid_posterior(c.prior, problem, data, lambda, c.grid_resolution);
    const Vec mass = post.mass();
    double expected = 0.0;
    for (std::size_t i = 0; i < mass.size(); ++i) expected += mass[i] * post.lhat[i];
    auto r = pb::bounds_qstar_exact(expected, post.log_z, c.delta, lambda, problem.cost.bound, data.size());
    r.method = "grid";
    rows.push_back(r.csv_row());
    std::cout << "upper " << r.upper << ", lower " << r.lower << "; " << validity_text(r) << "\n";
  } else if (!c.split_s1.empty()) {
    pipeline::TwoStageFlowOptions o;
    o.stage1 = c.train;
    o.layers = c.flow_layers;
    o.base_std = c.flow_scale;
    o.flow = flow_options(c);
    o.prior_samples = c.n_prior;
    o.sample_seed = c.seed + 5;
    std::map<std::size_t, pipeline::TwoStageFlowResult> done;
    const auto best = pb::two_stage_split_search(
        c.split_s1, data.size(), lambda, c.delta, problem.cost.bound, c.n_prior, [&](std::size_t s1) {
          auto res = pipeline::two_stage_flow_bound(problem, c.prior, data, s1, lambda, c.delta, o);
          std::cout << "S1 = " << s1 << ": upper " << res.report.upper << "\n";
          const auto report = res.report;
          done.emplace(s1, std::move(res));
          return report;
        });
    for (const auto& [s1, res] : done) rows.push_back(res.report.csv_row() + "," + std::to_string(s1));
    io::Checkpoint prior_ckpt;
    prior_ckpt.arch = c.arch;
    prior_ckpt.method = "two_stage_prior";
    prior_ckpt.thetas = {done.at(best.s1).stage1_theta};
    prior_ckpt.flow = done.at(best.s1).flow;
    io::write_checkpoint(path_in(c, "two_stage_prior.json"), prior_ckpt);
    io::write_csv(path_in(c, "bound.csv"), pb::BoundReport::csv_header() + ",s1", rows);
    std::cout << "selected S1 = " << best.s1 << ": upper " << best.report.upper << ", lower "
              << best.report.lower << "; " << validity_text(best.report) << "\n";
    return 0;
  } else {
    const auto ckpt = read_ckpt(l);
    if (ckpt.thetas.empty()) throw ConfigError("checkpoint holds no controllers");
    std::mt19937_64 rng(c.seed);
    std::vector<Vec> prior_samples;
    prior_samples.reserve(c.n_prior);
    for (std::size_t i = 0; i < c.n_prior; ++i) prior_samples.push_back(c.prior.sample(rng));
    auto r = pb::bounds_qstar_mc(problem, ckpt.thetas.front(), prior_samples, data, lambda, c.delta);
    r.method = config::method_name(c.method);
    rows.push_back(r.csv_row());
    std::cout << "upper " << r.upper << " (McDiarmid term " << r.mcdiarmid_term << "), lower " << r.lower
              << "; " << validity_text(r) << "\n";
  }
  io::write_csv(path_in(c, "bound.csv"), pb::BoundReport::csv_header(), rows);
  return 0;
}

// ---- evaluate ----

int cmd_evaluate(const Loaded& l) {
  const auto& c = l.cfg;
  const auto ckpt = read_ckpt(l);
  ControlProblem p = c.problem();
  p.arch = ckpt.arch;
  const auto test = sim::generate_dataset(c.noise, c.n_test, c.horizon, c.test_seed);
  std::vector<std::string> per_seq;
  std::vector<std::string> summary;
  for (std::size_t k = 0; k < ckpt.thetas.size(); ++k) {
    const Vec& theta = ckpt.thetas[k];
    const Vec transformed = sequence_costs(p, theta, test);
    Vec raw(test.size());
    std::vector<int> hit(test.size());
    parallel_for(test.size(), [&](std::size_t s) {
      raw[s] = p.raw_sequence_cost(theta, test[s]);
      const std::size_t idx[] = {s};
      hit[s] = collision_percentage(p, theta, test.subset(idx)) > 0.0 ? 1 : 0;
    });
    for (std::size_t s = 0; s < test.size(); ++s) {
      per_seq.push_back(std::to_string(k) + "," + std::to_string(s) + "," + num(raw[s]) + "," +
                        num(transformed[s]) + "," + std::to_string(hit[s]));
    }
    const auto t = mean_and_stderr(transformed);
    const auto r = mean_and_stderr(raw);
    const double pct = 100.0 * std::accumulate(hit.begin(), hit.end(), 0.0) / static_cast<double>(test.size());
    summary.push_back(std::to_string(k) + "," + num(r.mean) + "," + num(t.mean) + "," + num(t.stderr_) + "," +
                      num(pct));
    std::cout << "controller " << k << ": transformed " << t.mean << " +- " << t.stderr_ << ", raw " << r.mean
              << ", collisions " << pct << "%\n";
  }
  io::write_csv(path_in(c, "evaluate_sequences.csv"), "controller,sequence,raw_cost,transformed_cost,collision",
                per_seq);
  io::write_csv(path_in(c, "evaluate_summary.csv"),
                "controller,mean_raw_cost,mean_transformed_cost,stderr_transformed_cost,collision_pct", summary);
  return 0;
}

// ---- select ----

int cmd_select(const Loaded& l) {
  const auto& c = l.cfg;
  const auto data = read_data(l);
  const auto ckpt = read_ckpt(l);
  ControlProblem p = c.problem();
  p.arch = ckpt.arch;
  const auto res = sel::bootstrap_select(p, ckpt.thetas, data, c.bootstrap_resamples, c.seed);
  io::write_csv(path_in(c, "selection.csv"), sel::selection_csv_header(), sel::selection_csv_rows(res));
  io::Checkpoint chosen{ckpt.arch, {ckpt.thetas[res.best]}, ckpt.method + "+bootstrap", std::nullopt};
  io::write_checkpoint(path_in(c, "selected.json"), chosen);
  const double dprime = pb::union_delta(c.delta, ckpt.thetas.size());
  std::cout << "selected candidate " << res.best << " of " << ckpt.thetas.size() << " (out-of-bag score "
            << res.estimates[res.best].score << ")\n"
            << "per-candidate bounds use delta' = " << dprime << " so that all hold jointly with probability >= "
            << 1.0 - c.delta << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PAC-Bayesian stochastic nonlinear optimal control"};
  app.require_subcommand(1);
  Invocation inv;
  const std::vector<std::pair<std::string, std::string>> verbs{
      {"gen-data", "Generate the training noise dataset"},
      {"train", "Train a controller or posterior"},
      {"bound", "Compute PAC-Bayesian bounds"},
      {"evaluate", "Evaluate checkpoint controllers on fresh test sequences"},
      {"select", "Bootstrap selection among checkpoint controllers"}};
  std::map<std::string, CLI::App*> cmds;
  for (const auto& [name, help] : verbs) {
    cmds[name] = app.add_subcommand(name, help);
    add_common(cmds[name], inv);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigExit;
  }
  try {
    const Loaded l = load(inv);
    std::cerr << "threads: " << thread_count() << "\n";
    if (cmds["gen-data"]->parsed()) return cmd_gen_data(l);
    if (cmds["train"]->parsed()) return cmd_train(l);
    if (cmds["bound"]->parsed()) return cmd_bound(l);
    if (cmds["evaluate"]->parsed()) return cmd_evaluate(l);
    return cmd_select(l);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigExit;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericalExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
