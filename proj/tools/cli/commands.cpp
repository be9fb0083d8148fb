#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <ostream>
#include <regex>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "csv.hpp"
#include "experiment_config.hpp"
#include "magmcmc/checks.hpp"
#include "magmcmc/errors.hpp"
#include "magmcmc/ess.hpp"
#include "magmcmc/integrator.hpp"
#include "magmcmc/magnetic.hpp"
#include "magmcmc/manifold.hpp"
#include "magmcmc/sampler.hpp"

namespace magmcmc::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------- sample ---

struct ChainJob {
  ChainConfig config;
  ChainOutput output;
  std::string error;
};

unsigned worker_count(std::size_t jobs) {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MAGMCMC_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) n = static_cast<unsigned>(v);
  }
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

void run_jobs(std::vector<ChainJob>& jobs) {
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        jobs[i].output = run_chain(jobs[i].config);
      } catch (const std::exception& e) {
        jobs[i].error = e.what();
      }
    }
  };
  const unsigned n = worker_count(jobs.size());
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json ess_json(const ChainOutput& out, double ceiling) {
  if (out.samples.rows() < 10) return nullptr;
  const EssReport r = ess_report(out.samples, ceiling, out.wall_time_seconds);
  json per = json::array();
  bool any = false;
  for (const auto& v : r.per_coordinate) {
    per.push_back(v ? json(*v) : json(nullptr));
    any = any || v.has_value();
  }
  json j;
  j["per_coordinate"] = per;
  j["min"] = any ? json(r.min) : json(nullptr);
  j["mean"] = any ? json(r.mean) : json(nullptr);
  j["min_per_second"] = any ? json(r.min_per_second) : json(nullptr);
  j["mean_per_second"] = any ? json(r.mean_per_second) : json(nullptr);
  j["ceiling"] = ceiling;
  return j;
}

void write_samples_csv(const fs::path& path, const ChainOutput& out) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  const Index m = out.samples.cols();
  f << "idx";
  for (Index j = 0; j < m; ++j) f << ",q" << j;
  f << ",H,accepted\n";
  for (Index i = 0; i < out.samples.rows(); ++i) {
    f << i;
    for (Index j = 0; j < m; ++j) f << ',' << format_double(out.samples(i, j));
    f << ',' << format_double(out.hamiltonian_values[static_cast<std::size_t>(i)]) << ','
      << (out.accept_flags[static_cast<std::size_t>(i)] ? 1 : 0) << '\n';
  }
  if (!f) throw Error("write failed for " + path.string());
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << j.dump(2) << '\n';
  if (!f) throw Error("write failed for " + path.string());
}

std::vector<ChainJob> make_jobs(const ExperimentConfig& cfg, const TargetPtr& target, const RunSpec& run) {
  const bool magnetic = cfg.sampler == SamplerKind::kMagneticHmc;
  const int chains = magnetic ? cfg.num_fields : 1;
  std::vector<ChainJob> jobs(static_cast<std::size_t>(chains));
  for (int c = 0; c < chains; ++c) {
    ChainConfig& cc = jobs[static_cast<std::size_t>(c)].config;
    cc.target = target;
    cc.sampler = cfg.sampler;
    cc.step_size = run.step_size;
    cc.num_steps = run.num_steps;
    cc.num_samples = cfg.num_samples;
    cc.burn_in = cfg.burn_in;
    cc.thin = cfg.thin;
    cc.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(c));
    cc.interleave_canonical = cfg.interleave_canonical;
    cc.strict_reversibility = cfg.strict_reversibility;
    cc.newton_tol = cfg.newton_tol;
    cc.newton_max_iter = cfg.newton_max_iter;
    if (magnetic) {
      Rng field_rng(derive_seed(cfg.seed, 1'000'000u + static_cast<std::uint64_t>(c)));
      cc.field = MagneticField(validate_skew(cfg.field_scale * skew_from_gaussian(target->dim(), field_rng).matrix()));
    } else {
      cc.field = MagneticField::zero(target->dim());
    }
  }
  return jobs;
}

json chain_stats(const ExperimentConfig& cfg, const ChainJob& job) {
  const ChainConfig& cc = job.config;
  const ChainOutput& out = job.output;
  json s;
  s["target"] = cfg.target;
  s["sampler"] = to_string(cc.sampler);
  s["step_size"] = cc.step_size;
  s["num_steps"] = cc.num_steps;
  s["num_samples"] = cc.num_samples;
  s["burn_in"] = cc.effective_burn_in();
  s["thin"] = cc.thin;
  s["seed"] = cc.seed;
  s["acceptance_rate"] = out.acceptance_rate();
  s["newton_failure_count"] = out.newton_failure_count;
  s["transitions"] = out.transitions;
  s["wall_time_seconds"] = out.wall_time_seconds;
  s["ess"] = ess_json(out, cfg.ess_ceiling);
  s["field"] = matrix_json(cc.field.dim() ? cc.field.matrix() : Matrix::Zero(cc.target->dim(), cc.target->dim()).eval());
  return s;
}

// --------------------------------------------------------------- geodesic ---

struct GeodesicSetup {
  ManifoldPtr manifold;
  PhaseState start;
};

GeodesicSetup geodesic_setup(const std::string& name, Rng& rng) {
  GeodesicSetup s;
  if (name == "euclidean3") {
    s.manifold = make_euclidean(3);
    s.start.q = Vector::Zero(3);
  } else if (name == "sphere2") {
    s.manifold = make_sphere(3);
    s.start.q = s.manifold->retract(rng.normal_vector(3));
  } else if (name == "so3") {
    s.manifold = make_special_orthogonal(3);
    const Matrix eye = Matrix::Identity(3, 3);
    s.start.q = Eigen::Map<const Vector>(eye.data(), 9);
  } else {
    throw ConfigError("unknown manifold '" + name + "' (expected euclidean3, sphere2 or so3)");
  }
  s.start.p = sample_momentum(*s.manifold, s.start.q, rng);
  return s;
}

void write_trajectory_rows(std::ostream& f, const char* pass, const std::vector<PhaseState>& traj, bool so3) {
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const PhaseState& z = traj[k];
    f << pass << ',' << k;
    for (Index i = 0; i < z.q.size(); ++i) f << ',' << format_double(z.q(i));
    for (Index i = 0; i < z.p.size(); ++i) f << ',' << format_double(z.p(i));
    if (so3) {
      const Eigen::Map<const Matrix> rot(z.q.data(), 3, 3);
      const Vector action = rot * Vector::Ones(3);
      for (Index i = 0; i < 3; ++i) f << ',' << format_double(action(i));
    }
    f << '\n';
  }
}

// ------------------------------------------------------------------ check ---

std::optional<CheckSuite> parse_suite(const std::string& s) {
  if (s == "core") return CheckSuite::kCore;
  if (s == "constrained") return CheckSuite::kConstrained;
  if (s == "all") return CheckSuite::kAll;
  return std::nullopt;
}

std::optional<Fault> parse_fault(const std::string& s) {
  if (s == "none") return Fault::kNone;
  if (s == "skip-second-kick") return Fault::kSkipSecondKick;
  if (s == "broken-kinetic") return Fault::kBrokenKinetic;
  return std::nullopt;
}

CheckThresholds load_thresholds(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open thresholds file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed thresholds file: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("thresholds file must hold a JSON object");
  CheckThresholds t;
  const std::map<std::string, double*> fields = {
      {"reversibility", &t.reversibility},
      {"euclidean_symplectic", &t.euclidean_symplectic},
      {"manifold_symplectic", &t.manifold_symplectic},
      {"order_slope_min", &t.order_slope_min},
      {"order_slope_max", &t.order_slope_max},
      {"feasibility", &t.feasibility},
  };
  for (const auto& [key, value] : doc.items()) {
    const auto it = fields.find(key);
    if (it == fields.end()) throw ConfigError("unknown threshold '" + key + "'");
    if (!value.is_number()) throw ConfigError("threshold '" + key + "' must be a number");
    *it->second = value.get<double>();
  }
  return t;
}

bool is_q_column(const std::string& name) {
  static const std::regex re("q[0-9]+");
  return std::regex_match(name, re);
}

}  // namespace

int cmd_sample(const SampleArgs& args, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg;
  TargetPtr target;
  std::vector<RunSpec> runs;
  try {
    cfg = load_experiment_config(args.config);
    if (args.output_dir) cfg.output_dir = *args.output_dir;
    runs = cfg.runs(args.grid);
    target = build_target(cfg);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    json grid_index = json::array();
    for (std::size_t r = 0; r < runs.size(); ++r) {
      const fs::path run_dir = args.grid ? cfg.output_dir / ("run_" + std::to_string(r)) : cfg.output_dir;
      std::vector<ChainJob> jobs = make_jobs(cfg, target, runs[r]);
      run_jobs(jobs);
      for (const auto& job : jobs) {
        if (!job.error.empty()) {
          err << "runtime failure: " << job.error << '\n';
          return kExitRuntime;
        }
      }

      json summary;
      summary["step_size"] = runs[r].step_size;
      summary["num_steps"] = runs[r].num_steps;
      summary["chains"] = json::array();
      int best = -1;
      double best_min = -1.0;
      for (std::size_t c = 0; c < jobs.size(); ++c) {
        const fs::path chain_dir = run_dir / ("chain_" + std::to_string(c));
        fs::create_directories(chain_dir);
        write_samples_csv(chain_dir / "samples.csv", jobs[c].output);
        const json stats = chain_stats(cfg, jobs[c]);
        write_json(chain_dir / "stats.json", stats);

        json entry;
        entry["chain"] = c;
        entry["acceptance_rate"] = stats["acceptance_rate"];
        entry["min_ess"] = stats["ess"].is_null() ? json(nullptr) : stats["ess"]["min"];
        entry["mean_ess"] = stats["ess"].is_null() ? json(nullptr) : stats["ess"]["mean"];
        if (entry["min_ess"].is_number() && entry["min_ess"].get<double>() > best_min) {
          best_min = entry["min_ess"].get<double>();
          best = static_cast<int>(c);
        }
        summary["chains"].push_back(entry);
        char line[96];
        if (entry["min_ess"].is_number())
          std::snprintf(line, sizeof line, "acceptance %.4f, min ESS %.1f", jobs[c].output.acceptance_rate(),
                        entry["min_ess"].get<double>());
        else
          std::snprintf(line, sizeof line, "acceptance %.4f, min ESS n/a", jobs[c].output.acceptance_rate());
        out << chain_dir.string() << ": " << line << '\n';
      }
      summary["best_chain"] = best >= 0 ? json(best) : json(nullptr);
      write_json(run_dir / "summary.json", summary);
      grid_index.push_back({{"run", r}, {"step_size", runs[r].step_size}, {"num_steps", runs[r].num_steps}});
    }
    if (args.grid) write_json(cfg.output_dir / "grid.json", grid_index);
  } catch (const std::exception& e) {
    err << "runtime failure: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_geodesic(const GeodesicArgs& args, std::ostream& out, std::ostream& err) {
  if (!(args.eps > 0.0) || args.steps < 1) {
    err << "config error: --eps must be positive and --steps >= 1\n";
    return kExitConfig;
  }
  Rng rng(args.seed);
  GeodesicSetup setup;
  try {
    setup = geodesic_setup(args.manifold, rng);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  const Index m = setup.manifold->ambient_dim();
  const MagneticField field = args.canonical
                                  ? MagneticField::zero(m)
                                  : MagneticField(validate_skew(args.field_scale * skew_from_gaussian(m, rng).matrix()));
  const auto target = zero_potential_target(setup.manifold, setup.start.q);

  IntegratorParams params;
  params.step_size = args.eps;
  params.num_steps = args.steps;
  params.record_trajectory = true;
  std::vector<PhaseState> forward, backward;
  try {
    forward = integrate(setup.start, *target, field.factorization(), params).trajectory;
    params.step_size = -args.eps;
    backward = integrate(forward.back(), *target, field.factorization(), params).trajectory;
  } catch (const Error& e) {
    err << "runtime failure: " << e.what() << '\n';
    return kExitRuntime;
  }

  double roundtrip = 0.0, feasibility = 0.0;
  const std::size_t n = forward.size();
  for (std::size_t k = 0; k < n; ++k) {
    roundtrip = std::max(roundtrip, max_abs_diff(backward[k], forward[n - 1 - k]));
    feasibility = std::max(feasibility, setup.manifold->constraint_residual(forward[k].q));
  }

  const bool so3 = args.manifold == "so3";
  std::ofstream f(args.out, std::ios::binary);
  if (!f) {
    err << "runtime failure: cannot write " << args.out.string() << '\n';
    return kExitRuntime;
  }
  f << "pass,step";
  for (Index i = 0; i < m; ++i) f << ",q" << i;
  for (Index i = 0; i < m; ++i) f << ",p" << i;
  if (so3) f << ",a0,a1,a2";
  f << '\n';
  write_trajectory_rows(f, "forward", forward, so3);
  write_trajectory_rows(f, "backward", backward, so3);
  if (!f) {
    err << "runtime failure: write failed for " << args.out.string() << '\n';
    return kExitRuntime;
  }

  json summary;
  summary["manifold"] = args.manifold;
  summary["steps"] = args.steps;
  summary["eps"] = args.eps;
  summary["field"] = matrix_json(field.matrix());
  summary["roundtrip_error"] = roundtrip;
  summary["max_constraint_residual"] = feasibility;
  out << summary.dump() << '\n';
  return kExitOk;
}

int cmd_check(const CheckArgs& args, std::ostream& out, std::ostream& err) {
  const auto suite = parse_suite(args.suite);
  const auto fault = parse_fault(args.fault);
  if (!suite || !fault) {
    err << "config error: unknown " << (suite ? "fault '" + args.fault : "suite '" + args.suite) << "'\n";
    return kExitConfig;
  }
  CheckOptions options;
  options.seed = args.seed;
  try {
    if (args.thresholds) options.thresholds = load_thresholds(*args.thresholds);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  const std::vector<CheckReport> reports = run_check_suite(*suite, options, *fault);
  std::vector<std::string> lines;
  int failed = 0;
  for (const auto& r : reports) {
    lines.push_back(format_report_line(r));
    out << lines.back() << '\n';
    if (!r.passed) {
      ++failed;
      err << "failed: " << r.name << " (" << r.details << ")\n";
    }
  }
  if (args.report) {
    std::ofstream f(*args.report, std::ios::binary);
    for (const auto& l : lines) f << l << '\n';
    if (!f) {
      err << "runtime failure: cannot write " << args.report->string() << '\n';
      return kExitRuntime;
    }
  }
  err << (reports.size() - static_cast<std::size_t>(failed)) << "/" << reports.size() << " checks passed\n";
  return failed ? kExitCheckFailed : kExitOk;
}

int cmd_ess(const EssArgs& args, std::ostream& out, std::ostream& err) {
  if (!(args.ceiling > 0.0)) {
    err << "config error: --ceiling must be positive\n";
    return kExitConfig;
  }
  NumericTable table;
  try {
    table = read_numeric_csv(args.csv);
  } catch (const CsvError& e) {
    err << "malformed csv: " << e.what() << '\n';
    return kExitConfig;
  }
  std::vector<Index> cols;
  for (std::size_t j = 0; j < table.header.size(); ++j)
    if (is_q_column(table.header[j])) cols.push_back(static_cast<Index>(j));
  if (cols.empty())
    for (std::size_t j = 0; j < table.header.size(); ++j) cols.push_back(static_cast<Index>(j));
  if (table.rows.rows() < 10) {
    err << "malformed csv: " << SeriesTooShort(static_cast<std::size_t>(table.rows.rows())).what() << '\n';
    return kExitConfig;
  }

  Matrix selected(table.rows.rows(), static_cast<Index>(cols.size()));
  json names = json::array();
  for (std::size_t k = 0; k < cols.size(); ++k) {
    selected.col(static_cast<Index>(k)) = table.rows.col(cols[k]);
    names.push_back(table.header[static_cast<std::size_t>(cols[k])]);
  }
  const EssReport r = ess_report(selected, args.ceiling);
  json per = json::array();
  bool any = false;
  for (const auto& v : r.per_coordinate) {
    per.push_back(v ? json(*v) : json(nullptr));
    any = any || v.has_value();
  }
  if (!any) {
    err << "malformed csv: every column is constant\n";
    return kExitConfig;
  }
  json j;
  j["rows"] = table.rows.rows();
  j["columns"] = names;
  j["per_coordinate"] = per;
  j["min"] = r.min;
  j["mean"] = r.mean;
  j["ceiling"] = args.ceiling;
  out << j.dump() << '\n';
  return kExitOk;
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Magnetic manifold HMC sampler and verification tool"};
  app.require_subcommand(1);

  SampleArgs sample;
  std::string sample_out;
  auto* sample_cmd = app.add_subcommand("sample", "Run chains described by a JSON experiment config");
  sample_cmd->add_option("config", sample.config, "Experiment config (JSON)")->required();
  sample_cmd->add_flag("--grid", sample.grid, "Expand step_size / num_steps lists into a grid");
  sample_cmd->add_option("--out", sample_out, "Override the config's output_dir");

  GeodesicArgs geodesic;
  auto* geodesic_cmd = app.add_subcommand("geodesic", "Trace a magnetic geodesic forward then backward");
  geodesic_cmd->add_option("manifold", geodesic.manifold, "euclidean3 | sphere2 | so3")->required();
  geodesic_cmd->add_option("--seed", geodesic.seed, "Seed for the start state and field");
  geodesic_cmd->add_option("--eps", geodesic.eps, "Step size");
  geodesic_cmd->add_option("--steps", geodesic.steps, "Number of steps");
  geodesic_cmd->add_option("--out", geodesic.out, "Output CSV")->required();
  geodesic_cmd->add_flag("--canonical", geodesic.canonical, "Use the zero field");
  geodesic_cmd->add_option("--field-scale", geodesic.field_scale, "Scale of the random field");

  CheckArgs check;
  std::string thresholds, report;
  auto* check_cmd = app.add_subcommand("check", "Run the integrator verification suite");
  check_cmd->add_option("suite", check.suite, "core | constrained | all")->required();
  check_cmd->add_option("--seed", check.seed, "Seed");
  check_cmd->add_option("--thresholds", thresholds, "JSON file of threshold overrides");
  check_cmd->add_option("--report", report, "Write the report lines to this file");
  check_cmd->add_option("--inject-fault", check.fault, "none | skip-second-kick | broken-kinetic");

  EssArgs ess;
  auto* ess_cmd = app.add_subcommand("ess", "Effective sample size of a samples CSV");
  ess_cmd->add_option("csv", ess.csv, "Samples CSV")->required();
  ess_cmd->add_option("--ceiling", ess.ceiling, "Truncation ceiling");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*sample_cmd) {
    if (!sample_out.empty()) sample.output_dir = fs::path(sample_out);
    return cmd_sample(sample, out, err);
  }
  if (*geodesic_cmd) return cmd_geodesic(geodesic, out, err);
  if (*check_cmd) {
    if (!thresholds.empty()) check.thresholds = fs::path(thresholds);
    if (!report.empty()) check.report = fs::path(report);
    return cmd_check(check, out, err);
  }
  return cmd_ess(ess, out, err);
}

}  // namespace magmcmc::cli
