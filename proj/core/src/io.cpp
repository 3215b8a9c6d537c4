#include "pacsnoc/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace pacsnoc::io {

using nlohmann::json;

namespace {

json arch_to_json(const ctrl::Architecture& arch) {
  if (std::holds_alternative<ctrl::AffineArch>(arch)) {
    return {{"kind", "affine"}, {"parameter_order", "k, beta"}};
  }
  const auto& r = std::get<ctrl::ImcRenArch>(arch);
  return {{"kind", "imc_ren"},
          {"xi_dim", r.xi_dim},
          {"zeta_dim", r.zeta_dim},
          {"state_dim", r.state_dim},
          {"input_dim", r.input_dim},
          {"epsilon", r.epsilon},
          {"parameter_order", "X(n x n, n = 2 xi + zeta), Y(xi x xi), B2(xi x Nx), C2(Nu x xi), "
                              "D21(Nu x zeta), D22(Nu x Nx), D12(zeta x Nx); row-major"}};
}

ctrl::Architecture arch_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "affine") return ctrl::AffineArch{};
  if (kind != "imc_ren") throw ConfigError("checkpoint: unknown architecture '" + kind + "'");
  ctrl::ImcRenArch r;
  r.xi_dim = j.at("xi_dim").get<std::size_t>();
  r.zeta_dim = j.at("zeta_dim").get<std::size_t>();
  r.state_dim = j.at("state_dim").get<std::size_t>();
  r.input_dim = j.at("input_dim").get<std::size_t>();
  r.epsilon = j.at("epsilon").get<double>();
  return r;
}

template <class F>
auto parse_or_throw(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

std::string dataset_to_json(const sim::NoiseDataset& data) {
  json seqs = json::array();
  for (const auto& s : data.sequences()) seqs.push_back(s.values);
  json j = {{"state_dim", data.state_dim()}, {"horizon", data.horizon()}, {"sequences", seqs}};
  return j.dump(1) + "\n";
}

sim::NoiseDataset dataset_from_json(const std::string& text) {
  return parse_or_throw("dataset", [&] {
    const json j = json::parse(text);
    std::vector<sim::NoiseSequence> seqs;
    for (const auto& s : j.at("sequences")) seqs.push_back({s.get<std::vector<Vec>>()});
    return sim::NoiseDataset(j.at("state_dim").get<std::size_t>(), j.at("horizon").get<std::size_t>(), std::move(seqs));
  });
}

void write_dataset(const std::string& path, const sim::NoiseDataset& data) { write_text(path, dataset_to_json(data)); }

sim::NoiseDataset read_dataset(const std::string& path) { return dataset_from_json(read_text(path)); }

std::string checkpoint_to_json(const Checkpoint& ckpt) {
  json j = {{"arch", arch_to_json(ckpt.arch)}, {"method", ckpt.method}, {"theta", ckpt.thetas}};
  if (ckpt.flow) {
    j["flow"] = {{"dim", ckpt.flow->dim()}, {"layers", ckpt.flow->num_layers()}, {"params", ckpt.flow->params()}};
  }
  return j.dump(1) + "\n";
}

Checkpoint checkpoint_from_json(const std::string& text) {
  return parse_or_throw("checkpoint", [&] {
    const json j = json::parse(text);
    Checkpoint c;
    c.arch = arch_from_json(j.at("arch"));
    c.method = j.value("method", std::string("unknown"));
    c.thetas = j.at("theta").get<std::vector<Vec>>();
    for (const auto& t : c.thetas) ctrl::ControllerParams{c.arch, t}.validate();
    if (j.contains("flow")) {
      const auto& f = j.at("flow");
      c.flow = inf::PlanarFlow(f.at("dim").get<std::size_t>(), f.at("layers").get<std::size_t>(),
                               f.at("params").get<Vec>());
    }
    return c;
  });
}

void write_checkpoint(const std::string& path, const Checkpoint& ckpt) { write_text(path, checkpoint_to_json(ckpt)); }

Checkpoint read_checkpoint(const std::string& path) { return checkpoint_from_json(read_text(path)); }

void write_text(const std::string& path, const std::string& text) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) ensure_directory(parent.string());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_csv(const std::string& path, const std::string& header, const std::vector<std::string>& rows) {
  std::string text = header + "\n";
  for (const auto& r : rows) text += r + "\n";
  write_text(path, text);
}

void ensure_directory(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw ConfigError("cannot create directory '" + path + "': " + ec.message());
}

}  // namespace pacsnoc::io
