#pragma once

// JSON datasets and checkpoints, CSV output.

#include <optional>
#include <string>
#include <vector>

#include "pacsnoc/controllers.hpp"
#include "pacsnoc/inference/flows.hpp"
#include "pacsnoc/sim.hpp"

namespace pacsnoc::io {

/// {"state_dim", "horizon", "sequences": [[[w_0], ..., [w_T]], ...]}
std::string dataset_to_json(const sim::NoiseDataset& data);
sim::NoiseDataset dataset_from_json(const std::string& text);
void write_dataset(const std::string& path, const sim::NoiseDataset& data);
sim::NoiseDataset read_dataset(const std::string& path);

/// A controller checkpoint: one or more parameter vectors for one architecture
/// (a single controller, a particle set or flow samples), plus optional flow
/// parameters.
struct Checkpoint {
  ctrl::Architecture arch;
  std::vector<Vec> thetas;
  std::string method;
  std::optional<inf::PlanarFlow> flow;
};

std::string checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const std::string& text);
void write_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::string& path);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);
void write_csv(const std::string& path, const std::string& header, const std::vector<std::string>& rows);
/// Creates the directory and its parents.
void ensure_directory(const std::string& path);

}  // namespace pacsnoc::io
