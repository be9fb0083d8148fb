#include "magmcmc/sampler.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>

#include "magmcmc/errors.hpp"

namespace magmcmc {

std::string to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::kMagneticHmc: return "magnetic_hmc";
    case SamplerKind::kCanonicalHmc: return "canonical_hmc";
    case SamplerKind::kMala: return "mala";
    case SamplerKind::kRandomWalk: return "rwm";
  }
  return "unknown";
}

SamplerKind parse_sampler_kind(const std::string& name) {
  if (name == "magnetic_hmc") return SamplerKind::kMagneticHmc;
  if (name == "canonical_hmc") return SamplerKind::kCanonicalHmc;
  if (name == "mala") return SamplerKind::kMala;
  if (name == "rwm") return SamplerKind::kRandomWalk;
  throw Error("unknown sampler '" + name + "'");
}

void ChainConfig::validate() const {
  if (!target) throw Error("chain config has no target");
  if (!(step_size > 0.0) || !std::isfinite(step_size)) throw Error("base step size must be positive");
  if (num_steps < 1) throw Error("number of integration steps must be >= 1");
  if (num_samples < 1) throw Error("number of samples must be >= 1");
  if (effective_burn_in() < 0) throw Error("burn-in must be >= 0");
  if (thin < 1) throw Error("thinning interval must be >= 1");
  if (field.dim() != 0 && field.dim() != target->dim())
    throw Error("magnetic field dimension does not match the target");
}

double ChainOutput::acceptance_rate() const {
  if (accept_flags.empty()) return 0.0;
  std::size_t n = 0;
  for (bool a : accept_flags) n += a ? 1 : 0;
  return static_cast<double>(n) / static_cast<double>(accept_flags.size());
}

namespace {

struct Proposal {
  const SpectralFactorization* fact;
  int num_steps;
  bool potential_force;
};

TransitionResult metropolis_step(const PhaseState& state, const ChainConfig& cfg, Rng& rng,
                                 const Proposal& proposal) {
  const Target& target = *cfg.target;
  const Index m = target.dim();
  const double eps = rng.coin() ? cfg.step_size : -cfg.step_size;

  IntegratorParams params;
  params.step_size = eps;
  params.num_steps = proposal.num_steps;
  params.newton_tol = cfg.newton_tol;
  params.newton_max_iter = cfg.newton_max_iter;

  const GradientOracle grad =
      proposal.potential_force ? target.gradient_oracle()
                               : GradientOracle([m](const Vector&) { return Vector::Zero(m).eval(); });

  TransitionResult out;
  out.state = state;
  std::optional<PhaseState> candidate;
  try {
    candidate = integrate(state, target.manifold(), grad, *proposal.fact, params).state;
  } catch (const ConvergenceFailure&) {
    out.newton_failure = true;
  } catch (const NumericalFailure&) {
    out.newton_failure = true;
  }
  const double u = rng.uniform();
  if (!candidate) {
    out.delta_h = std::numeric_limits<double>::infinity();
    return out;
  }

  out.delta_h = target.hamiltonian(*candidate) - target.hamiltonian(state);
  if (!std::isfinite(out.delta_h) || !(u < std::exp(-out.delta_h))) return out;

  if (cfg.strict_reversibility) {
    params.step_size = -eps;
    try {
      const PhaseState back = integrate(*candidate, target.manifold(), grad, *proposal.fact, params).state;
      if (!(max_abs_diff(back, state) <= cfg.reversibility_tol)) return out;
    } catch (const ConvergenceFailure&) {
      return out;
    }
  }
  out.state = std::move(*candidate);
  out.accepted = true;
  return out;
}

SpectralFactorization zero_factorization(Index m) {
  return SpectralFactorization(m, {}, Matrix::Identity(m, m));
}

}  // namespace

TransitionResult hmc_transition(const PhaseState& state, const ChainConfig& cfg, Rng& rng) {
  if (cfg.sampler == SamplerKind::kMagneticHmc && cfg.field.dim() != 0)
    return metropolis_step(state, cfg, rng, {&cfg.field.factorization(), cfg.num_steps, true});
  const SpectralFactorization zero = zero_factorization(cfg.target->dim());
  return metropolis_step(state, cfg, rng, {&zero, cfg.num_steps, true});
}

TransitionResult mala_transition(const PhaseState& state, const ChainConfig& cfg, Rng& rng) {
  const SpectralFactorization zero = zero_factorization(cfg.target->dim());
  return metropolis_step(state, cfg, rng, {&zero, 1, true});
}

TransitionResult rwm_transition(const PhaseState& state, const ChainConfig& cfg, Rng& rng) {
  const SpectralFactorization zero = zero_factorization(cfg.target->dim());
  return metropolis_step(state, cfg, rng, {&zero, 1, false});
}

namespace {

TransitionResult dispatch(const PhaseState& state, const ChainConfig& cfg, Rng& rng) {
  switch (cfg.sampler) {
    case SamplerKind::kMagneticHmc:
    case SamplerKind::kCanonicalHmc: return hmc_transition(state, cfg, rng);
    case SamplerKind::kMala: return mala_transition(state, cfg, rng);
    case SamplerKind::kRandomWalk: return rwm_transition(state, cfg, rng);
  }
  throw Error("unknown sampler kind");
}

}  // namespace

ChainOutput run_chain(const ChainConfig& cfg) {
  Rng rng(cfg.seed);
  return run_chain(cfg, rng);
}

ChainOutput run_chain(const ChainConfig& cfg, Rng& rng) {
  cfg.validate();
  const Target& target = *cfg.target;
  const Manifold& manifold = target.manifold();

  PhaseState state;
  state.q = cfg.initial_point ? *cfg.initial_point : target.default_initial_point();
  if (state.q.size() != target.dim()) throw InitializationInfeasible("initial point has wrong dimension");
  if (!(manifold.constraint_residual(state.q) <= 1e-8))
    throw InitializationInfeasible("initial point violates the manifold constraints");
  manifold.validate_initial_point(state.q);

  const int burn_in = cfg.effective_burn_in();
  const long long total = burn_in + static_cast<long long>(cfg.num_samples) * cfg.thin;
  const bool interleave = cfg.interleave_canonical && cfg.sampler == SamplerKind::kMagneticHmc;

  ChainOutput out;
  out.samples.resize(cfg.num_samples, target.dim());
  out.accept_flags.reserve(static_cast<std::size_t>(cfg.num_samples));
  out.hamiltonian_values.reserve(static_cast<std::size_t>(cfg.num_samples));

  const auto start = std::chrono::steady_clock::now();
  Index recorded = 0;
  for (long long t = 0; t < total; ++t) {
    state.p = sample_momentum(manifold, state.q, rng);
    TransitionResult res = dispatch(state, cfg, rng);
    out.newton_failure_count += res.newton_failure ? 1 : 0;
    const bool accepted = res.accepted;
    state = std::move(res.state);
    if (interleave) {
      state.p = sample_momentum(manifold, state.q, rng);
      TransitionResult extra = mala_transition(state, cfg, rng);
      out.newton_failure_count += extra.newton_failure ? 1 : 0;
      state = std::move(extra.state);
    }
    ++out.transitions;
    if (t >= burn_in && (t - burn_in + 1) % cfg.thin == 0) {
      out.samples.row(recorded++) = state.q.transpose();
      out.accept_flags.push_back(accepted);
      out.hamiltonian_values.push_back(target.hamiltonian(state));
    }
  }
  out.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace magmcmc
