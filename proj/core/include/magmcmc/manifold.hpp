#pragma once

#include <memory>
#include <string>
#include <vector>

#include "magmcmc/random.hpp"
#include "magmcmc/types.hpp"

namespace magmcmc {

inline constexpr double kFeasibilityTolerance = 1e-9;

// Embedded manifold M = {q in R^m : g(q) = 0} with constraint Jacobian G.
// Implementations are immutable and safe to share between threads.
class Manifold {
 public:
  virtual ~Manifold() = default;

  virtual Index ambient_dim() const = 0;
  virtual Index constraint_dim() const = 0;
  virtual std::string name() const = 0;

  // g(q), a constraint_dim() vector.
  virtual Vector constraint(const Vector& q) const = 0;
  // G(q), constraint_dim() x ambient_dim().
  virtual Matrix jacobian(const Vector& q) const = 0;
  // Orthogonal projection of v onto the cotangent space {p : G(q) p = 0}.
  // The default uses the normal equations.
  virtual Vector project(const Vector& q, const Vector& v) const;

  // Nearest-point map used to build feasible initial points. Never called by
  // the integrator, which enforces constraints only through multipliers.
  virtual Vector retract(const Vector& x) const = 0;

  // Extra checks on a chain's starting point beyond g(q) = 0.
  virtual void validate_initial_point(const Vector& /*q*/) const {}

  double constraint_residual(const Vector& q) const { return max_abs(constraint(q)); }
  double cotangent_residual(const Vector& q, const Vector& p) const;
};

using ManifoldPtr = std::shared_ptr<const Manifold>;

// v - G^T (G G^T)^{-1} G v.
Vector generic_cotangent_projection(const Matrix& g, const Vector& v);

// R^m, no constraints.
ManifoldPtr make_euclidean(Index dim);

// {q : A q = b}. Throws RankDeficient if the smallest singular value of A is
// at most 1e-10.
ManifoldPtr make_affine(const Matrix& a, const Vector& b);

// Unit sphere in R^dim, g(q) = q^T q - 1.
ManifoldPtr make_sphere(Index dim);

// n x r matrices with orthonormal columns, flattened column-major. The
// constraint keeps only the upper triangle (diagonal included) of
// Q^T Q - I so that G has full row rank.
ManifoldPtr make_stiefel(Index n, Index r);

// Stiefel(n, n) restricted to det = +1. Starting points with negative
// determinant are rejected with WrongComponent.
ManifoldPtr make_special_orthogonal(Index n);

// Concatenation of blocks; a make_euclidean block is an unconstrained block.
ManifoldPtr make_product(std::vector<ManifoldPtr> blocks);

class ProductManifold final : public Manifold {
 public:
  explicit ProductManifold(std::vector<ManifoldPtr> blocks);

  Index ambient_dim() const override { return ambient_dim_; }
  Index constraint_dim() const override { return constraint_dim_; }
  std::string name() const override;
  Vector constraint(const Vector& q) const override;
  Matrix jacobian(const Vector& q) const override;
  Vector project(const Vector& q, const Vector& v) const override;
  Vector retract(const Vector& x) const override;
  void validate_initial_point(const Vector& q) const override;

  const std::vector<ManifoldPtr>& blocks() const { return blocks_; }
  Index offset(std::size_t block) const { return offsets_[block]; }

 private:
  std::vector<ManifoldPtr> blocks_;
  std::vector<Index> offsets_;
  std::vector<Index> constraint_offsets_;
  Index ambient_dim_ = 0;
  Index constraint_dim_ = 0;
};

// U V^T from the thin SVD of x: the closest matrix with orthonormal columns.
Matrix polar_retract(const Matrix& x);

// Standard normal ambient draw projected onto the cotangent space at q.
Vector sample_momentum(const Manifold& manifold, const Vector& q, Rng& rng);

}  // namespace magmcmc
