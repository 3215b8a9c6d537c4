#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pacsnoc/inference/grid.hpp"
#include "pacsnoc/io.hpp"
#include "pacsnoc/pac_bayes.hpp"

using namespace pacsnoc;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(PACSNOC_CLI_PATH) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[512];
  while (fgets(buf, sizeof buf, pipe) != nullptr) r.out += buf;
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string config(const std::string& name) { return std::string(PACSNOC_CONFIG_DIR) + "/" + name; }

std::string scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "pacsnoc_test_cli" / name;
  std::filesystem::remove_all(dir);
  return dir.string();
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  ADD_FAILURE() << "missing column " << name;
  return 0;
}

}  // namespace

TEST(GenData, LtiShapeAndByteIdenticalRerun) {
  const std::string dir = scratch("gen_lti");
  const std::string common = "--config " + config("lti.toml") + " --output-dir " + dir + " --S 32";
  ASSERT_EQ(run("gen-data " + common).code, 0);
  const auto data = io::read_dataset(dir + "/dataset.json");
  EXPECT_EQ(data.size(), 32u);
  EXPECT_EQ(data[0].length(), 11u);
  const std::string first = io::read_text(dir + "/dataset.json");
  ASSERT_EQ(run("gen-data " + common).code, 0);
  EXPECT_EQ(io::read_text(dir + "/dataset.json"), first);
  EXPECT_TRUE(std::filesystem::exists(dir + "/config.toml"));
}

TEST(GenData, RobotNoiseOnlyAtStart) {
  const std::string dir = scratch("gen_robots");
  ASSERT_EQ(run("gen-data --config " + config("robots.toml") + " --output-dir " + dir).code, 0);
  const auto data = io::read_dataset(dir + "/dataset.json");
  ASSERT_EQ(data.size(), 8u);
  EXPECT_EQ(data[0].length(), 101u);
  double start = 0.0;
  for (const auto& seq : data.sequences()) {
    for (double v : seq.values[0]) start += std::abs(v);
    for (std::size_t t = 1; t < seq.length(); ++t) {
      for (double v : seq.values[t]) ASSERT_EQ(v, 0.0);
    }
  }
  EXPECT_GT(start, 0.0);
}

TEST(Train, GridWithZeroLambdaIsPrior) {
  const std::string dir = scratch("grid_prior");
  const std::string common = "--config " + config("lti.toml") + " --output-dir " + dir +
                             " --S 8 --grid-resolution 30 --lambda 0";
  ASSERT_EQ(run("gen-data " + common).code, 0);
  ASSERT_EQ(run("train " + common).code, 0);
  const auto rows = read_csv(dir + "/grid_posterior.csv");
  ASSERT_EQ(rows.size(), 1u + 900u);
  const std::size_t mass_col = column(rows[0], "mass");

  const pb::Prior prior = pb::lti_prior(pb::ih_lqr_gain(0.8, 0.1, 5.0, 0.003), true);
  const auto axes = inf::prior_axes(prior, 30);
  const Vec log_prior = inf::grid_log_prior(prior, axes);
  double max_err = 0.0;
  for (std::size_t i = 0; i < 900; ++i) {
    max_err = std::max(max_err, std::abs(std::stod(rows[i + 1][mass_col]) - std::exp(log_prior[i])));
  }
  EXPECT_LT(max_err, 1e-10);
}

TEST(Train, EmpiricalLtiLargeSampleRecoversOffset) {
  const std::string dir = scratch("empirical_lti");
  const std::string common = "--config " + config("lti.toml") + " --output-dir " + dir +
                             " --S 512 --method empirical --epochs 3000 --lr 50";
  ASSERT_EQ(run("gen-data " + common).code, 0);
  const auto r = run("train " + common);
  ASSERT_EQ(r.code, 0) << r.out;
  const auto ckpt = io::read_checkpoint(dir + "/checkpoint.json");
  ASSERT_EQ(ckpt.thetas.size(), 1u);
  EXPECT_LT(std::abs(ckpt.thetas[0][1] - 3.0), 0.5);
  EXPECT_GT(read_csv(dir + "/train_metrics.csv").size(), 2u);
}

TEST(Bound, GridAndMonteCarloReports) {
  const std::string dir = scratch("bound");
  const std::string common = "--config " + config("lti.toml") + " --output-dir " + dir + " --S 32";
  ASSERT_EQ(run("gen-data " + common).code, 0);
  ASSERT_EQ(run("train " + common).code, 0);
  const auto g = run("bound " + common);
  ASSERT_EQ(g.code, 0) << g.out;
  EXPECT_NE(g.out.find("jointly"), std::string::npos);
  auto rows = read_csv(dir + "/bound.csv");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1][column(rows[0], "family")], "gibbs_exact");
  const double upper = std::stod(rows[1][column(rows[0], "upper")]);
  EXPECT_GT(upper, 0.0);
  EXPECT_LT(upper, 1.0);

  const auto mc = run("bound " + common + " --method svgd --n-prior 500");
  ASSERT_EQ(mc.code, 0) << mc.out;
  rows = read_csv(dir + "/bound.csv");
  EXPECT_EQ(rows[1][column(rows[0], "family")], "gibbs_mc");
  EXPECT_EQ(rows[1][column(rows[0], "n_prior")], "500");
  EXPECT_GT(std::stod(rows[1][column(rows[0], "mcdiarmid_term")]), 0.0);
}

TEST(Evaluate, RobotsStartingAtTargetNeverCollide) {
  const std::string dir = scratch("eval_robots");
  const std::string common = "--config " + config("robots.toml") + " --output-dir " + dir +
                             " --S 1 --T 40 --method empirical --epochs 1 --lr 0 --n-test 5"
                             " --set noise.stddev=0 --set plant.spawns=[[2.0,2.0],[-2.0,2.0]]";
  ASSERT_EQ(run("gen-data " + common).code, 0);
  ASSERT_EQ(run("train " + common).code, 0);
  const auto r = run("evaluate " + common);
  ASSERT_EQ(r.code, 0) << r.out;
  const auto summary = read_csv(dir + "/evaluate_summary.csv");
  EXPECT_DOUBLE_EQ(std::stod(summary[1][column(summary[0], "collision_pct")]), 0.0);
  const auto seqs = read_csv(dir + "/evaluate_sequences.csv");
  ASSERT_EQ(seqs.size(), 6u);
  for (std::size_t i = 1; i < seqs.size(); ++i) {
    const double c = std::stod(seqs[i][column(seqs[0], "transformed_cost")]);
    EXPECT_GE(c, 0.0);
    EXPECT_LT(c, 1.0);
  }
}

TEST(Select, UnionDeltaReported) {
  const std::string dir = scratch("select");
  const std::string common = "--config " + config("lti.toml") + " --output-dir " + dir + " --S 16";
  ASSERT_EQ(run("gen-data " + common).code, 0);
  ASSERT_EQ(run("train " + common).code, 0);
  const auto r = run("select " + common);
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("delta' = 0.02"), std::string::npos) << r.out;
  EXPECT_EQ(read_csv(dir + "/selection.csv").size(), 11u);
  EXPECT_EQ(io::read_checkpoint(dir + "/selected.json").thetas.size(), 1u);
}

TEST(ExitCodes, ConfigAndNumericalErrors) {
  const std::string dir = scratch("errors");
  const std::string lti = "--config " + config("lti.toml") + " --output-dir " + dir;
  EXPECT_EQ(run("train " + lti).code, 2);  // no dataset yet
  EXPECT_EQ(run("gen-data " + lti + " --delta 1.5").code, 2);
  EXPECT_EQ(run("gen-data " + lti + " --set plant.speed=3").code, 2);
  EXPECT_EQ(run("gen-data --config /nonexistent.toml").code, 2);
  EXPECT_EQ(run("gen-data").code, 2);
  ASSERT_EQ(run("gen-data " + lti + " --S 4").code, 0);
  // A flow trained with an absurd step size diverges and aborts.
  const auto r = run("train " + lti + " --method flows --epochs 1 --set method.flow_lr=1e6 --set method.steps=50");
  EXPECT_EQ(r.code, 3) << r.out;
}
