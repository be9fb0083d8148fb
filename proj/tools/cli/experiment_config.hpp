#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "magmcmc/sampler.hpp"
#include "magmcmc/target.hpp"

namespace magmcmc::cli {

// Anything wrong with the config document itself (exit code 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kSchemaVersion = 1;

// One fully resolved run: a single step size and step count.
struct RunSpec {
  double step_size = 0.0;
  int num_steps = 0;
};

struct ExperimentConfig {
  std::string target;  // gaussian_affine | bvmf | sphere_uniform | simplex_sphere | network_eigenmodel
  SamplerKind sampler = SamplerKind::kMagneticHmc;
  std::vector<double> step_sizes;
  std::vector<int> num_steps;
  int num_samples = 1000;
  std::optional<int> burn_in;
  int thin = 1;
  std::uint64_t seed = 0;
  int num_fields = 5;
  double field_scale = 1.0;
  bool interleave_canonical = false;
  bool strict_reversibility = false;
  double newton_tol = 1e-10;
  int newton_max_iter = 50;
  double ess_ceiling = 10000.0;
  std::filesystem::path output_dir;

  // Target-specific keys, already checked against the target's key set.
  nlohmann::json target_params = nlohmann::json::object();
  // Directory of the config file; relative data paths resolve against it.
  std::filesystem::path base_dir;

  // Cartesian product of step_sizes x num_steps. Throws ConfigError when a
  // list has more than one entry and grid is false.
  std::vector<RunSpec> runs(bool grid) const;
};

// Validates the whole document before anything is computed.
ExperimentConfig parse_experiment_config(const nlohmann::json& doc,
                                         const std::filesystem::path& base_dir);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Builds the target named by the config. Data-file and model errors surface
// as ConfigError.
TargetPtr build_target(const ExperimentConfig& config);

}  // namespace magmcmc::cli
