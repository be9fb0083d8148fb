#include "magmcmc/integrator.hpp"

#include <cmath>

#include <Eigen/LU>

#include "magmcmc/errors.hpp"

namespace magmcmc {

void IntegratorParams::validate() const {
  if (step_size == 0.0 || !std::isfinite(step_size)) throw Error("step size must be finite and nonzero");
  if (num_steps < 1) throw Error("number of integration steps must be >= 1");
  if (!(newton_tol > 0.0)) throw Error("Newton tolerance must be positive");
  if (newton_max_iter < 1) throw Error("Newton iteration cap must be >= 1");
}

namespace {

NewtonResult solve_position_multiplier(const Vector& q, const Vector& p, const Matrix& g_q,
                                       const Vector& grad_q, const Manifold& manifold,
                                       const SpectralFactorization& fact, double eps, double tol,
                                       int max_iter) {
  const Index k = g_q.rows();
  // q'(mu) = base - eps/2 * disp_basis * mu exactly.
  const Vector base = q + fact.displacement(p - (0.5 * eps) * grad_q, eps);
  Matrix disp_basis(q.size(), k);
  for (Index j = 0; j < k; ++j) disp_basis.col(j) = fact.displacement(g_q.row(j).transpose(), eps);

  Vector mu = Vector::Zero(k);
  double residual = 0.0;
  for (int iter = 0;; ++iter) {
    const Vector q_next = base - (0.5 * eps) * (disp_basis * mu);
    const Vector f = manifold.constraint(q_next);
    residual = max_abs(f);
    if (!std::isfinite(residual)) throw ConvergenceFailure(iter, residual);
    if (residual <= tol) return {std::move(mu), iter};
    if (iter == max_iter) break;
    const Matrix jac = (-0.5 * eps) * (manifold.jacobian(q_next) * disp_basis);
    const Eigen::FullPivLU<Matrix> lu(jac);
    if (!lu.isInvertible()) throw ConvergenceFailure(iter, residual);
    mu -= lu.solve(f);
  }
  throw ConvergenceFailure(max_iter, residual);
}

// One step; grad_q holds grad U(q) on entry and grad U(q_next) on exit.
StepResult step_with_gradient(const PhaseState& state, const Manifold& manifold,
                              const GradientOracle& grad, const SpectralFactorization& fact,
                              const IntegratorParams& params, Vector& grad_q) {
  const double eps = params.step_size;
  const double half = 0.5 * eps;
  StepResult out;
  out.multipliers.converged = false;

  Vector p_bar = state.p;
  const bool constrained = manifold.constraint_dim() > 0;
  if (constrained) {
    const Matrix g_q = manifold.jacobian(state.q);
    NewtonResult nr = solve_position_multiplier(state.q, state.p, g_q, grad_q, manifold, fact, eps,
                                                params.newton_tol, params.newton_max_iter);
    p_bar -= half * (g_q.transpose() * nr.mu);
    out.multipliers.mu = std::move(nr.mu);
    out.multipliers.newton_iters = nr.iterations;
  }

  Vector disp, rotated;
  fact.kinetic(p_bar - half * grad_q, eps, disp, rotated);
  Vector q_next = state.q + disp;
  grad_q = checked_gradient(grad, q_next);
  Vector p_next = rotated - half * grad_q;

  if (constrained) {
    const Matrix g_next = manifold.jacobian(q_next);
    out.multipliers.mu_prime = solve_mu_prime(g_next, p_next, eps);
    p_next -= half * (g_next.transpose() * out.multipliers.mu_prime);
  }
  out.multipliers.converged = true;
  out.state = {std::move(q_next), std::move(p_next)};
  return out;
}

}  // namespace

NewtonResult newton_lagrange(const Vector& q, const Vector& p, const Manifold& manifold,
                             const GradientOracle& grad, const SpectralFactorization& fact,
                             double eps, double tol, int max_iter) {
  if (eps == 0.0) throw Error("step size must be nonzero");
  if (manifold.constraint_dim() == 0) return {Vector(0), 0};
  return solve_position_multiplier(q, p, manifold.jacobian(q), checked_gradient(grad, q), manifold,
                                   fact, eps, tol, max_iter);
}

Vector solve_mu_prime(const Matrix& g, const Vector& p_bar, double eps) {
  if (eps == 0.0) throw Error("step size must be nonzero");
  if (g.rows() == 0) return Vector(0);
  const Matrix gram = g * g.transpose();
  const Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success) throw RankDeficient("G G^T is not positive definite");
  const Vector diag = llt.matrixLLT().diagonal();
  if (diag.minCoeff() <= 1e-12 * std::max(1.0, diag.maxCoeff()))
    throw RankDeficient("G G^T is numerically singular");
  return (2.0 / eps) * llt.solve(g * p_bar);
}

StepResult constrained_step(const PhaseState& state, const Manifold& manifold,
                            const GradientOracle& grad, const SpectralFactorization& fact,
                            const IntegratorParams& params) {
  params.validate();
  Vector grad_q = checked_gradient(grad, state.q);
  return step_with_gradient(state, manifold, grad, fact, params, grad_q);
}

StepResult constrained_step(const PhaseState& state, const Target& target,
                            const SpectralFactorization& fact, const IntegratorParams& params) {
  return constrained_step(state, target.manifold(), target.gradient_oracle(), fact, params);
}

IntegrationResult integrate(const PhaseState& state, const Manifold& manifold,
                            const GradientOracle& grad, const SpectralFactorization& fact,
                            const IntegratorParams& params) {
  params.validate();
  IntegrationResult out;
  out.state = state;
  if (params.record_trajectory) {
    out.trajectory.reserve(static_cast<std::size_t>(params.num_steps) + 1);
    out.trajectory.push_back(state);
  }
  Vector grad_q = checked_gradient(grad, state.q);
  for (int n = 0; n < params.num_steps; ++n) {
    StepResult step;
    try {
      step = step_with_gradient(out.state, manifold, grad, fact, params, grad_q);
    } catch (const ConvergenceFailure& e) {
      throw ConvergenceFailure(e.iterations(), e.residual(), n);
    }
    out.total_newton_iters += step.multipliers.newton_iters;
    out.state = std::move(step.state);
    if (params.record_trajectory) out.trajectory.push_back(out.state);
  }
  return out;
}

IntegrationResult integrate(const PhaseState& state, const Target& target,
                            const SpectralFactorization& fact, const IntegratorParams& params) {
  return integrate(state, target.manifold(), target.gradient_oracle(), fact, params);
}

}  // namespace magmcmc
