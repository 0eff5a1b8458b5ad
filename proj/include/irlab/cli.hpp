#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "irlab/dynamics.hpp"
#include "irlab/graph.hpp"

namespace irlab::cli {

// Bad usage or configuration; exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::uint64_t fnv1a(std::string_view s);
std::string hash_hex(std::uint64_t h);
// "# irlab <version> config=<hash>"
std::string provenance_header(std::uint64_t config_hash);

// Writes to a temporary file next to path, then renames it into place.
void write_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);
// Parses a JSON file, skipping leading "#" provenance lines.
nlohmann::json read_json_file(const std::string& path);

// Comma-separated ids, "all", or "@file" (ids separated by commas or whitespace).
VertexSet parse_vertex_set(const std::string& spec, Index n);
// "graph" or "vertex:<t>".
Prediction parse_mode(const std::string& spec, Index n);

nlohmann::json tensor_to_json(const DenseTensor& t);
DenseTensor tensor_from_json(const nlohmann::json& j);
nlohmann::json count_json(const Count& c);

std::vector<std::string> preset_names();
nlohmann::json preset(const std::string& name);

struct SimulateConfig {
  nlohmann::json expanded;  // after preset expansion; hashed for provenance
  std::uint64_t seed = 0;

  FactorizationKind kind = FactorizationKind::Matrix;
  std::vector<Index> dims;
  Index depth = 2;
  std::vector<Index> hidden;
  Index components = 1;
  std::optional<nlohmann::json> tree;
  bool balanced_init = false;
  double init_scale = 1e-3;
  std::optional<int> det_sign;

  enum class Truth { LowRank, Fixture2x2, File } truth = Truth::LowRank;
  Index truth_rank = 1;
  std::string truth_path;
  std::optional<Index> observations;  // nullopt: every entry

  EntryLoss entry = EntryLoss::Squared;
  double huber_delta = 0;
  Normalization normalization = Normalization::Mean;
  TrainConfig train;

  std::string out_dir = ".";
  std::string prefix = "run";
};

// Parses config text; errors carry "config:<line>: ".
SimulateConfig parse_simulate_config(const std::string& text);

struct Experiment {
  Factorization init;
  Loss loss;
  TrainConfig train;
  std::optional<DenseTensor> ground_truth;
  bool fixture_2x2 = false;
};

// Scales t to Frobenius norm sqrt(#entries).
DenseTensor normalize_truth(DenseTensor t);
// count distinct entries, uniformly without replacement, sorted by index.
std::vector<Observed> sample_observations(const DenseTensor& t, Index count, Rng& rng);
Experiment build_experiment(const SimulateConfig& cfg);

// Summary of a finished run.
nlohmann::json summarize(const Factorization& f, const Trajectory& t, const Experiment& ex);

int run(int argc, char** argv);

}  // namespace irlab::cli
