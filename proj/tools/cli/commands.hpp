#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace magmcmc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitRuntime = 2;
inline constexpr int kExitCheckFailed = 3;

struct SampleArgs {
  std::filesystem::path config;
  bool grid = false;
  std::optional<std::filesystem::path> output_dir;  // overrides the config's
};

struct GeodesicArgs {
  std::string manifold;  // euclidean3 | sphere2 | so3
  std::uint64_t seed = 0;
  double eps = 0.01;
  int steps = 1000;
  std::filesystem::path out;
  bool canonical = false;  // L = 0
  double field_scale = 1.0;
};

struct CheckArgs {
  std::string suite;  // core | constrained | all
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> thresholds;  // JSON object of threshold overrides
  std::optional<std::filesystem::path> report;
  std::string fault = "none";  // none | skip-second-kick | broken-kinetic
};

struct EssArgs {
  std::filesystem::path csv;
  double ceiling = 10000.0;
};

int cmd_sample(const SampleArgs& args, std::ostream& out, std::ostream& err);
int cmd_geodesic(const GeodesicArgs& args, std::ostream& out, std::ostream& err);
int cmd_check(const CheckArgs& args, std::ostream& out, std::ostream& err);
int cmd_ess(const EssArgs& args, std::ostream& out, std::ostream& err);

// Parses argv and dispatches to one of the commands above.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace magmcmc::cli
