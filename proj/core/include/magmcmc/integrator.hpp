#pragma once

#include <optional>
#include <vector>

#include "magmcmc/magnetic.hpp"
#include "magmcmc/manifold.hpp"
#include "magmcmc/target.hpp"
#include "magmcmc/types.hpp"

namespace magmcmc {

inline constexpr double kCotangentTolerance = 1e-9;

struct IntegratorParams {
  double step_size = 0.01;  // signed, nonzero
  int num_steps = 1;
  double newton_tol = 1e-10;  // on ||g(q)||_inf
  int newton_max_iter = 50;
  bool record_trajectory = false;

  // Throws Error if any field is out of range.
  void validate() const;
};

struct MultiplierSolve {
  Vector mu;        // position multiplier
  Vector mu_prime;  // momentum multiplier
  int newton_iters = 0;
  bool converged = false;
};

struct NewtonResult {
  Vector mu;
  int iterations = 0;
};

// Newton root-finding for mu such that the Strang step started from
// (q, p - eps/2 G(q)^T mu) lands on g = 0. Starts at mu = 0 and uses the
// exact Jacobian -eps/2 G(q') M(eps) G(q)^T, which holds because the step's
// position output is affine in its input momentum.
// Throws ConvergenceFailure if tol is not met within max_iter iterations.
NewtonResult newton_lagrange(const Vector& q, const Vector& p, const Manifold& manifold,
                             const GradientOracle& grad, const SpectralFactorization& fact,
                             double eps, double tol, int max_iter);

// Solves (eps/2) G G^T mu' = G p_bar. Throws RankDeficient if G G^T is
// singular.
Vector solve_mu_prime(const Matrix& g, const Vector& p_bar, double eps);

struct StepResult {
  PhaseState state;
  MultiplierSolve multipliers;
};

// One step of the manifold-constrained magnetic integrator: momentum kick
// along G(q)^T mu, Strang step on R^m, then the momentum correction along
// G(q')^T mu'.
StepResult constrained_step(const PhaseState& state, const Manifold& manifold,
                            const GradientOracle& grad, const SpectralFactorization& fact,
                            const IntegratorParams& params);
StepResult constrained_step(const PhaseState& state, const Target& target,
                            const SpectralFactorization& fact, const IntegratorParams& params);

struct IntegrationResult {
  PhaseState state;
  std::vector<PhaseState> trajectory;  // includes the start; empty unless recorded
  int total_newton_iters = 0;
};

// params.num_steps constrained steps. A ConvergenceFailure carries the index
// of the failing step.
IntegrationResult integrate(const PhaseState& state, const Manifold& manifold,
                            const GradientOracle& grad, const SpectralFactorization& fact,
                            const IntegratorParams& params);
IntegrationResult integrate(const PhaseState& state, const Target& target,
                            const SpectralFactorization& fact, const IntegratorParams& params);

}  // namespace magmcmc
