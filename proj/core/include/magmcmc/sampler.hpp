#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "magmcmc/integrator.hpp"
#include "magmcmc/magnetic.hpp"
#include "magmcmc/random.hpp"
#include "magmcmc/target.hpp"

namespace magmcmc {

enum class SamplerKind { kMagneticHmc, kCanonicalHmc, kMala, kRandomWalk };

std::string to_string(SamplerKind kind);
// Accepts "magnetic_hmc", "canonical_hmc", "mala", "rwm". Throws Error.
SamplerKind parse_sampler_kind(const std::string& name);

struct ChainConfig {
  TargetPtr target;
  MagneticField field;  // used by kMagneticHmc only; an empty field means zero
  SamplerKind sampler = SamplerKind::kMagneticHmc;
  double step_size = 0.01;  // base step size eps* > 0
  int num_steps = 10;
  int num_samples = 1000;
  std::optional<int> burn_in;  // default: num_samples / 10
  int thin = 1;                // transitions per recorded sample
  std::uint64_t seed = 0;
  bool interleave_canonical = false;
  bool strict_reversibility = false;
  double reversibility_tol = 1e-6;
  double newton_tol = 1e-10;
  int newton_max_iter = 50;
  std::optional<Vector> initial_point;

  int effective_burn_in() const { return burn_in.value_or(num_samples / 10); }
  void validate() const;
};

struct TransitionResult {
  PhaseState state;
  bool accepted = false;
  double delta_h = 0.0;  // H(proposal) - H(current); +inf on Newton failure
  bool newton_failure = false;
};

// Metropolis-corrected transition with a randomly signed step. Draws one
// coin for the sign, integrates, then one uniform for the accept test. On
// rejection or Newton failure the input state is returned unchanged. Uses the
// configured field for kMagneticHmc and the zero field otherwise.
TransitionResult hmc_transition(const PhaseState& state, const ChainConfig& cfg, Rng& rng);

// Canonical (zero field) constrained HMC with a single step.
TransitionResult mala_transition(const PhaseState& state, const ChainConfig& cfg, Rng& rng);

// Single force-free constrained step, accepted on exp(-dU - dK). On manifolds
// where the force-free step preserves |p| (spheres) this is plain Metropolis
// on pi(q).
TransitionResult rwm_transition(const PhaseState& state, const ChainConfig& cfg, Rng& rng);

struct ChainOutput {
  Matrix samples;  // num_samples x dim
  std::vector<bool> accept_flags;
  std::vector<double> hamiltonian_values;
  double wall_time_seconds = 0.0;
  int newton_failure_count = 0;
  int transitions = 0;  // total, including burn-in

  double acceptance_rate() const;
};

// Runs burn-in plus num_samples * thin transitions, drawing fresh cotangent
// momentum before each. Throws InitializationInfeasible if the start point
// violates the constraints by more than 1e-8.
ChainOutput run_chain(const ChainConfig& cfg);
ChainOutput run_chain(const ChainConfig& cfg, Rng& rng);

}  // namespace magmcmc
