#include "experiment_config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "magmcmc/errors.hpp"
#include "magmcmc/manifold.hpp"

namespace magmcmc::cli {

using nlohmann::json;

namespace {

const std::set<std::string> kCommonKeys = {
    "schema_version", "target",      "sampler",         "step_size",
    "num_steps",      "num_samples", "burn_in",         "thin",
    "seed",           "num_fields",  "field_scale",     "interleave_canonical",
    "strict_reversibility", "newton_tol", "newton_max_iter", "ess_ceiling",
    "output_dir"};

const std::map<std::string, std::set<std::string>> kTargetKeys = {
    {"gaussian_affine", {"A", "b", "mean", "cov_diag"}},
    {"bvmf", {"dim", "problem_seed", "A", "b"}},
    {"sphere_uniform", {"dim"}},
    {"simplex_sphere", {"alpha", "games_csv"}},
    {"network_eigenmodel",
     {"adjacency", "synthetic_nodes", "graph_seed", "rank", "prior_var_sigma", "prior_var_c"}},
};

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw ConfigError("config key '" + key + "': " + what);
}

double get_number(const json& v, const std::string& key) {
  if (!v.is_number()) fail(key, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(key, "expected a finite number");
  return x;
}

double get_positive(const json& v, const std::string& key) {
  const double x = get_number(v, key);
  if (!(x > 0.0)) fail(key, "must be positive");
  return x;
}

long long get_integer(const json& v, const std::string& key, long long min_value) {
  if (!v.is_number_integer()) fail(key, "expected an integer");
  const long long x = v.get<long long>();
  if (x < min_value) fail(key, "must be >= " + std::to_string(min_value));
  return x;
}

int get_int(const json& v, const std::string& key, int min_value) {
  const long long x = get_integer(v, key, min_value);
  if (x > 1'000'000'000LL) fail(key, "is too large");
  return static_cast<int>(x);
}

bool get_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) fail(key, "expected true or false");
  return v.get<bool>();
}

std::string get_string(const json& v, const std::string& key) {
  if (!v.is_string()) fail(key, "expected a string");
  return v.get<std::string>();
}

Vector get_vector(const json& v, const std::string& key) {
  if (!v.is_array() || v.empty()) fail(key, "expected a non-empty array of numbers");
  Vector out(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Index>(i)) = get_number(v[i], key);
  return out;
}

Matrix get_matrix(const json& v, const std::string& key) {
  if (!v.is_array() || v.empty() || !v[0].is_array() || v[0].empty())
    fail(key, "expected a non-empty array of rows");
  const Index rows = static_cast<Index>(v.size());
  const Index cols = static_cast<Index>(v[0].size());
  Matrix out(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const json& row = v[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) fail(key, "rows have unequal length");
    for (Index j = 0; j < cols; ++j) out(i, j) = get_number(row[static_cast<std::size_t>(j)], key);
  }
  return out;
}

template <typename T, typename Get>
std::vector<T> scalar_or_list(const json& v, const std::string& key, Get get) {
  std::vector<T> out;
  if (v.is_array()) {
    if (v.empty()) fail(key, "list must not be empty");
    for (const auto& e : v) out.push_back(get(e));
  } else {
    out.push_back(get(v));
  }
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

std::vector<RunSpec> ExperimentConfig::runs(bool grid) const {
  if (!grid && (step_sizes.size() > 1 || num_steps.size() > 1))
    throw ConfigError("step_size / num_steps lists require --grid");
  std::vector<RunSpec> out;
  for (double eps : step_sizes)
    for (int n : num_steps) out.push_back({eps, n});
  return out;
}

ExperimentConfig parse_experiment_config(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (const char* key : {"schema_version", "target", "sampler", "step_size", "num_steps"})
    if (!doc.contains(key)) fail(key, "is required");
  if (get_integer(doc["schema_version"], "schema_version", 0) != kSchemaVersion)
    fail("schema_version", "unsupported version (expected " + std::to_string(kSchemaVersion) + ")");

  ExperimentConfig cfg;
  cfg.base_dir = base_dir;
  cfg.target = get_string(doc["target"], "target");
  const auto tk = kTargetKeys.find(cfg.target);
  if (tk == kTargetKeys.end()) fail("target", "unknown target '" + cfg.target + "'");

  for (const auto& [key, value] : doc.items()) {
    if (kCommonKeys.count(key)) continue;
    if (tk->second.count(key)) {
      cfg.target_params[key] = value;
      continue;
    }
    fail(key, "unknown key for target '" + cfg.target + "'");
  }

  try {
    cfg.sampler = parse_sampler_kind(get_string(doc["sampler"], "sampler"));
  } catch (const Error& e) {
    fail("sampler", e.what());
  }
  cfg.step_sizes = scalar_or_list<double>(doc["step_size"], "step_size",
                                          [](const json& v) { return get_positive(v, "step_size"); });
  cfg.num_steps = scalar_or_list<int>(doc["num_steps"], "num_steps",
                                      [](const json& v) { return get_int(v, "num_steps", 1); });

  auto opt = [&](const char* key) -> const json* {
    auto it = doc.find(key);
    return it == doc.end() ? nullptr : &*it;
  };
  if (auto v = opt("num_samples")) cfg.num_samples = get_int(*v, "num_samples", 1);
  if (auto v = opt("burn_in")) cfg.burn_in = get_int(*v, "burn_in", 0);
  if (auto v = opt("thin")) cfg.thin = get_int(*v, "thin", 1);
  if (auto v = opt("seed")) cfg.seed = static_cast<std::uint64_t>(get_integer(*v, "seed", 0));
  if (auto v = opt("num_fields")) cfg.num_fields = get_int(*v, "num_fields", 1);
  if (auto v = opt("field_scale")) {
    cfg.field_scale = get_number(*v, "field_scale");
    if (cfg.field_scale < 0.0) fail("field_scale", "must be >= 0");
  }
  if (auto v = opt("interleave_canonical")) cfg.interleave_canonical = get_bool(*v, "interleave_canonical");
  if (auto v = opt("strict_reversibility")) cfg.strict_reversibility = get_bool(*v, "strict_reversibility");
  if (auto v = opt("newton_tol")) cfg.newton_tol = get_positive(*v, "newton_tol");
  if (auto v = opt("newton_max_iter")) cfg.newton_max_iter = get_int(*v, "newton_max_iter", 1);
  if (auto v = opt("ess_ceiling")) cfg.ess_ceiling = get_positive(*v, "ess_ceiling");
  cfg.output_dir = resolve(base_dir, opt("output_dir") ? get_string(doc["output_dir"], "output_dir") : "output");

  // Shape-check target parameters now so that errors surface before sampling.
  const json& tp = cfg.target_params;
  if (cfg.target == "gaussian_affine") {
    if (tp.contains("A")) get_matrix(tp["A"], "A");
    for (const char* key : {"b", "mean", "cov_diag"})
      if (tp.contains(key)) get_vector(tp[key], key);
  } else if (cfg.target == "bvmf") {
    if (tp.contains("dim")) get_int(tp["dim"], "dim", 2);
    if (tp.contains("problem_seed")) get_integer(tp["problem_seed"], "problem_seed", 0);
    if (tp.contains("A") != tp.contains("b")) throw ConfigError("bvmf: A and b must be given together");
    if (tp.contains("A")) {
      get_matrix(tp["A"], "A");
      get_vector(tp["b"], "b");
    }
  } else if (cfg.target == "sphere_uniform") {
    if (tp.contains("dim")) get_int(tp["dim"], "dim", 2);
  } else if (cfg.target == "simplex_sphere") {
    if (!tp.contains("alpha")) fail("alpha", "is required for simplex_sphere");
    get_vector(tp["alpha"], "alpha");
    if (tp.contains("games_csv")) get_string(tp["games_csv"], "games_csv");
  } else if (cfg.target == "network_eigenmodel") {
    if (tp.contains("adjacency")) get_string(tp["adjacency"], "adjacency");
    if (tp.contains("synthetic_nodes")) get_int(tp["synthetic_nodes"], "synthetic_nodes", 2);
    if (tp.contains("graph_seed")) get_integer(tp["graph_seed"], "graph_seed", 0);
    if (tp.contains("rank")) get_int(tp["rank"], "rank", 1);
    if (tp.contains("prior_var_sigma")) get_positive(tp["prior_var_sigma"], "prior_var_sigma");
    if (tp.contains("prior_var_c")) get_positive(tp["prior_var_c"], "prior_var_c");
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  return parse_experiment_config(doc, path.parent_path());
}

TargetPtr build_target(const ExperimentConfig& cfg) {
  const json& tp = cfg.target_params;
  try {
    if (cfg.target == "gaussian_affine") {
      if (tp.empty()) return default_linear_gaussian_target();
      const auto def = default_linear_gaussian_target();
      const Matrix a = tp.contains("A") ? get_matrix(tp["A"], "A") : def->a();
      const Vector b = tp.contains("b") ? get_vector(tp["b"], "b") : Vector::Zero(a.rows()).eval();
      const Vector mean = tp.contains("mean") ? get_vector(tp["mean"], "mean") : Vector::Zero(a.cols()).eval();
      const Vector cov = tp.contains("cov_diag") ? get_vector(tp["cov_diag"], "cov_diag")
                                                 : Vector::Ones(a.cols()).eval();
      if (b.size() != a.rows() || mean.size() != a.cols() || cov.size() != a.cols())
        throw ConfigError("gaussian_affine: A, b, mean, cov_diag have inconsistent sizes");
      return gaussian_affine_target(mean, cov, a, b);
    }
    if (cfg.target == "bvmf") {
      if (tp.contains("A")) return bvmf_target(get_matrix(tp["A"], "A"), get_vector(tp["b"], "b"));
      const Index dim = tp.contains("dim") ? get_int(tp["dim"], "dim", 2) : 6;
      Rng rng(tp.contains("problem_seed") ? static_cast<std::uint64_t>(get_integer(tp["problem_seed"], "problem_seed", 0))
                                          : 0);
      const BvmfProblem problem = random_bvmf_problem(dim, rng);
      return bvmf_target(problem.a, problem.b);
    }
    if (cfg.target == "sphere_uniform") {
      const Index dim = tp.contains("dim") ? get_int(tp["dim"], "dim", 2) : 3;
      return zero_potential_target(make_sphere(dim));
    }
    if (cfg.target == "simplex_sphere") {
      std::vector<Game> games;
      if (tp.contains("games_csv")) games = read_games_csv(resolve(cfg.base_dir, tp["games_csv"].get<std::string>()));
      return simplex_sphere_target(get_vector(tp["alpha"], "alpha"), std::move(games));
    }
    if (cfg.target == "network_eigenmodel") {
      const Index rank = tp.contains("rank") ? get_int(tp["rank"], "rank", 1) : 2;
      Matrix adjacency;
      if (tp.contains("adjacency")) {
        adjacency = read_adjacency_matrix(resolve(cfg.base_dir, tp["adjacency"].get<std::string>()));
      } else {
        const Index nodes = tp.contains("synthetic_nodes") ? get_int(tp["synthetic_nodes"], "synthetic_nodes", 2) : 8;
        Rng rng(tp.contains("graph_seed") ? static_cast<std::uint64_t>(get_integer(tp["graph_seed"], "graph_seed", 0)) : 0);
        adjacency = synthetic_eigenmodel_graph(nodes, rank, rng);
      }
      const double vs = tp.contains("prior_var_sigma") ? get_positive(tp["prior_var_sigma"], "prior_var_sigma") : 230.0;
      const double vc = tp.contains("prior_var_c") ? get_positive(tp["prior_var_c"], "prior_var_c") : 100.0;
      return network_eigenmodel_target(adjacency, rank, vs, vc);
    }
  } catch (const Error& e) {
    throw ConfigError(cfg.target + ": " + e.what());
  }
  throw ConfigError("unknown target '" + cfg.target + "'");
}

}  // namespace magmcmc::cli
