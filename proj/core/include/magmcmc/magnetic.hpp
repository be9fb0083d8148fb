#pragma once

#include <functional>
#include <vector>

#include "magmcmc/random.hpp"
#include "magmcmc/types.hpp"

namespace magmcmc {

// Maps a position to the gradient of the potential energy at that position.
using GradientOracle = std::function<Vector(const Vector&)>;

inline constexpr double kSkewTolerance = 1e-12;
inline constexpr double kNullFrequency = 1e-10;

// Real skew-symmetric matrix L defining the magnetic part of the symplectic
// structure. Stored entries satisfy L(i,j) == -L(j,i) exactly.
class SkewMatrix {
 public:
  static SkewMatrix zero(Index dim);

  Index dim() const { return entries_.rows(); }
  const Matrix& matrix() const { return entries_; }

 private:
  explicit SkewMatrix(Matrix entries) : entries_(std::move(entries)) {}
  Matrix entries_;

  friend SkewMatrix validate_skew(const Matrix& a);
};

// Returns (A - A^T) / 2, or throws NotSkewSymmetric when ||A + A^T||_max
// exceeds kSkewTolerance.
SkewMatrix validate_skew(const Matrix& a);

// (Z - Z^T) / 2 for Z with i.i.d. standard normal entries.
SkewMatrix skew_from_gaussian(Index dim, Rng& rng);

// A 2-plane on which -L acts as frequency * (u v^T - v u^T), so that
// L u = frequency * v and L v = -frequency * u.
struct RotationBlock {
  Vector u;
  Vector v;
  double frequency = 0.0;
};

// Real block form of the spectral decomposition of -L: an orthonormal set of
// rotation planes plus an orthonormal basis of the kernel.
class SpectralFactorization {
 public:
  SpectralFactorization() = default;
  SpectralFactorization(Index dim, std::vector<RotationBlock> blocks, Matrix null_basis);

  Index dim() const { return dim_; }
  const std::vector<RotationBlock>& blocks() const { return blocks_; }
  const Matrix& null_basis() const { return null_basis_; }
  bool is_zero() const { return blocks_.empty(); }

  // -L rebuilt from the blocks.
  Matrix reconstruct_negative_field() const;

  // exp(-eps L) p.
  Vector rotate(const Vector& p, double eps) const;
  // M(eps) p = integral_0^eps exp(-s L) p ds, the position change of the
  // pure kinetic flow.
  Vector displacement(const Vector& p, double eps) const;
  // Both of the above in one pass.
  void kinetic(const Vector& p, double eps, Vector& displacement, Vector& rotated) const;

 private:
  Index dim_ = 0;
  std::vector<RotationBlock> blocks_;
  Matrix null_basis_;
  Matrix planes_;  // dim x 2|blocks|, columns (u_0, v_0, u_1, v_1, ...)
};

// Throws NumericalFailure if the eigensolver fails.
SpectralFactorization factorize(const SkewMatrix& field);

// A skew field together with its cached factorization; immutable and safe
// to share between chains.
class MagneticField {
 public:
  MagneticField() = default;
  explicit MagneticField(SkewMatrix field);
  static MagneticField zero(Index dim);

  Index dim() const { return field_.dim(); }
  const SkewMatrix& field() const { return field_; }
  const Matrix& matrix() const { return field_.matrix(); }
  const SpectralFactorization& factorization() const { return factorization_; }

 private:
  SkewMatrix field_ = SkewMatrix::zero(0);
  SpectralFactorization factorization_;
};

// Potential half-flow: (q, p - eps/2 grad U(q)).
PhaseState flow_potential(const PhaseState& state, const GradientOracle& grad, double eps);

// Exact flow of the kinetic energy under the magnetic structure:
// p' = exp(-eps L) p, q' = q + M(eps) p.
PhaseState flow_kinetic(const PhaseState& state, const SpectralFactorization& fact, double eps);

// Strang composition potential / kinetic / potential on R^m.
PhaseState euclidean_magnetic_step(const PhaseState& state, const GradientOracle& grad,
                                   const SpectralFactorization& fact, double eps);

// Throws NonFiniteGradient if any entry is NaN or infinite.
Vector checked_gradient(const GradientOracle& grad, const Vector& q);

}  // namespace magmcmc
