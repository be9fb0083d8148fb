#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "magmcmc/magnetic.hpp"
#include "magmcmc/manifold.hpp"
#include "magmcmc/random.hpp"
#include "magmcmc/types.hpp"

namespace magmcmc {

// Density pi(q) proportional to exp(-U(q)) on an embedded manifold. The
// Hamiltonian is H(q, p) = U(q) + p^T p / 2.
class Target {
 public:
  virtual ~Target() = default;

  virtual double potential(const Vector& q) const = 0;
  virtual Vector gradient(const Vector& q) const = 0;
  // Feasible starting point used when a chain is given none.
  virtual Vector default_initial_point() const = 0;

  const Manifold& manifold() const { return *manifold_; }
  const ManifoldPtr& manifold_ptr() const { return manifold_; }
  const std::string& name() const { return name_; }
  Index dim() const { return manifold_->ambient_dim(); }

  double hamiltonian(const PhaseState& z) const { return potential(z.q) + 0.5 * z.p.squaredNorm(); }
  GradientOracle gradient_oracle() const {
    return [this](const Vector& q) { return gradient(q); };
  }

 protected:
  Target(ManifoldPtr manifold, std::string name)
      : manifold_(std::move(manifold)), name_(std::move(name)) {}

 private:
  ManifoldPtr manifold_;
  std::string name_;
};

using TargetPtr = std::shared_ptr<const Target>;

// Target built from callables; used for ad hoc potentials in tests and demos.
class FunctionTarget final : public Target {
 public:
  using PotentialFn = std::function<double(const Vector&)>;

  FunctionTarget(ManifoldPtr manifold, std::string name, PotentialFn potential,
                 GradientOracle gradient, Vector initial_point);

  double potential(const Vector& q) const override { return potential_(q); }
  Vector gradient(const Vector& q) const override { return gradient_(q); }
  Vector default_initial_point() const override { return initial_point_; }

 private:
  PotentialFn potential_;
  GradientOracle gradient_;
  Vector initial_point_;
};

// U = 0 on the given manifold. initial_point defaults to the retraction of
// (1, 1, ..., 1).
std::shared_ptr<FunctionTarget> zero_potential_target(ManifoldPtr manifold,
                                                      Vector initial_point = Vector());

// U(q) + offset, sharing the manifold of the base target.
std::shared_ptr<FunctionTarget> shifted_target(TargetPtr base, double offset);

// Normal(mean, diag(cov_diag)) restricted to {A q = b}.
class GaussianAffineTarget final : public Target {
 public:
  GaussianAffineTarget(Vector mean, Vector cov_diag, const Matrix& a, const Vector& b);

  double potential(const Vector& q) const override;
  Vector gradient(const Vector& q) const override;
  Vector default_initial_point() const override { return conditioned_mean(); }

  // Moments of the conditioned Gaussian:
  // mean + S A^T (A S A^T)^{-1} (b - A mean) and S - S A^T (A S A^T)^{-1} A S.
  Vector conditioned_mean() const;
  Matrix conditioned_covariance() const;

  const Vector& mean() const { return mean_; }
  const Vector& cov_diag() const { return cov_diag_; }
  const Matrix& a() const { return a_; }
  const Vector& b() const { return b_; }

 private:
  Vector mean_;
  Vector cov_diag_;
  Matrix a_;
  Vector b_;
};

std::shared_ptr<GaussianAffineTarget> gaussian_affine_target(const Vector& mean,
                                                             const Vector& cov_diag,
                                                             const Matrix& a, const Vector& b);

// The four-dimensional linearly constrained Gaussian benchmark:
// A = [[1,1,1,1],[1,1,-1,1]], b = 0, mean = 0, cov = diag(1, 1, 1/100, 1/100).
std::shared_ptr<GaussianAffineTarget> default_linear_gaussian_target();

// Bingham-von Mises-Fisher on the unit sphere: pi(q) ~ exp(b^T q + q^T A q).
class BvmfTarget final : public Target {
 public:
  BvmfTarget(const Matrix& a, Vector b);

  double potential(const Vector& q) const override;
  Vector gradient(const Vector& q) const override;
  Vector default_initial_point() const override;

  const Matrix& a() const { return a_; }
  const Vector& b() const { return b_; }

 private:
  Matrix a_;  // symmetrized
  Vector b_;
};

std::shared_ptr<BvmfTarget> bvmf_target(const Matrix& a, const Vector& b);

struct BvmfProblem {
  Matrix a;
  Vector b;
};

// A = Z Z^T / dim with Z standard normal (positive definite almost surely),
// b standard normal.
BvmfProblem random_bvmf_problem(Index dim, Rng& rng);

// Team game record: players in team_a versus team_b.
struct Game {
  std::vector<Index> team_a;
  std::vector<Index> team_b;
  bool winner_a = true;
};

// Dirichlet(alpha) prior on the simplex with a team win-probability
// likelihood, pulled back to the sphere through theta_i = q_i^2:
// U(q) = -sum_i (2 alpha_i - 1) log|q_i| - sum_games log(S_win / S_all),
// S_T = sum_{i in T} q_i^2.
class SimplexSphereTarget final : public Target {
 public:
  SimplexSphereTarget(Vector alpha, std::vector<Game> games);

  double potential(const Vector& q) const override;
  Vector gradient(const Vector& q) const override;
  Vector default_initial_point() const override;

  const Vector& alpha() const { return alpha_; }
  const std::vector<Game>& games() const { return games_; }

 private:
  Vector alpha_;
  std::vector<Game> games_;
};

// Throws NonPositiveAlpha if any alpha_i <= 0.
std::shared_ptr<SimplexSphereTarget> simplex_sphere_target(const Vector& alpha,
                                                           std::vector<Game> games);

// Probit network eigenmodel on Stiefel(n, r) x R^r x R:
// delta_ij ~ Bernoulli(Phi((U diag(sigma) U^T)_ij + c)) for i < j,
// sigma_k ~ Normal(0, prior_var_sigma), c ~ Normal(0, prior_var_c), U uniform.
// Position layout: [vec(U) column-major | sigma | c].
class NetworkEigenmodelTarget final : public Target {
 public:
  NetworkEigenmodelTarget(Matrix adjacency, Index rank, double prior_var_sigma, double prior_var_c,
                          double likelihood_weight = 1.0);

  double potential(const Vector& q) const override;
  Vector gradient(const Vector& q) const override;
  // Rank-r eigendecomposition of the adjacency matrix, c = 0.
  Vector default_initial_point() const override;

  Index nodes() const { return adjacency_.rows(); }
  Index rank() const { return rank_; }
  Vector pack(const Matrix& u, const Vector& sigma, double c) const;

 private:
  Matrix logits(const Vector& q) const;

  Matrix adjacency_;
  Index rank_;
  double prior_var_sigma_;
  double prior_var_c_;
  double likelihood_weight_;
};

std::shared_ptr<NetworkEigenmodelTarget> network_eigenmodel_target(
    const Matrix& adjacency, Index rank, double prior_var_sigma, double prior_var_c,
    double likelihood_weight = 1.0);

// Adjacency matrix sampled from the eigenmodel itself with a random U,
// sigma_k ~ Normal(0, (n/2)^2) and c ~ Normal(0, 1).
Matrix synthetic_eigenmodel_graph(Index nodes, Index rank, Rng& rng);

// log Phi(x) for the standard normal CDF; switches to log-domain forms for
// |x| > 6 so deep tails neither underflow nor lose precision.
double log_normal_cdf(double x);
// phi(x) / Phi(x).
double inverse_mills_ratio(double x);

// Whitespace-separated square 0/1 matrix.
Matrix read_adjacency_matrix(const std::filesystem::path& path);
// CSV with columns teamA,teamB,winnerA; teams are semicolon-separated
// zero-based player indices and winnerA is 0 or 1. A header row is optional.
std::vector<Game> read_games_csv(const std::filesystem::path& path);

}  // namespace magmcmc
