#include "magmcmc/magnetic.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "magmcmc/errors.hpp"

namespace magmcmc {

SkewMatrix SkewMatrix::zero(Index dim) { return SkewMatrix(Matrix::Zero(dim, dim)); }

SkewMatrix validate_skew(const Matrix& a) {
  if (a.rows() != a.cols()) throw Error("skew matrix must be square");
  if (!a.allFinite()) throw Error("skew matrix has non-finite entries");
  const double defect = max_abs(Matrix(a + a.transpose()));
  if (!(defect <= kSkewTolerance)) throw NotSkewSymmetric(defect);
  Matrix entries = 0.5 * (a - a.transpose());
  entries.diagonal().setZero();
  return SkewMatrix(std::move(entries));
}

SkewMatrix skew_from_gaussian(Index dim, Rng& rng) {
  const Matrix z = rng.normal_matrix(dim, dim);
  return validate_skew(0.5 * (z - z.transpose()));
}

SpectralFactorization::SpectralFactorization(Index dim, std::vector<RotationBlock> blocks,
                                             Matrix null_basis)
    : dim_(dim), blocks_(std::move(blocks)), null_basis_(std::move(null_basis)) {
  planes_.resize(dim_, 2 * static_cast<Index>(blocks_.size()));
  for (std::size_t j = 0; j < blocks_.size(); ++j) {
    planes_.col(2 * j) = blocks_[j].u;
    planes_.col(2 * j + 1) = blocks_[j].v;
  }
}

Matrix SpectralFactorization::reconstruct_negative_field() const {
  Matrix out = Matrix::Zero(dim_, dim_);
  for (const auto& b : blocks_) out += b.frequency * (b.u * b.v.transpose() - b.v * b.u.transpose());
  return out;
}

void SpectralFactorization::kinetic(const Vector& p, double eps, Vector& displacement,
                                    Vector& rotated) const {
  if (blocks_.empty()) {
    displacement = eps * p;
    rotated = p;
    return;
  }
  const Vector coeffs = planes_.transpose() * p;
  const Vector null_part = p - planes_ * coeffs;
  Vector rot(coeffs.size());
  Vector disp(coeffs.size());
  for (std::size_t j = 0; j < blocks_.size(); ++j) {
    const double w = blocks_[j].frequency;
    const double a = coeffs(2 * j);
    const double c = coeffs(2 * j + 1);
    const double theta = eps * w;
    const double cs = std::cos(theta);
    const double sn = std::sin(theta);
    const double half = std::sin(0.5 * theta);
    const double one_minus_cos = 2.0 * half * half;
    rot(2 * j) = a * cs + c * sn;
    rot(2 * j + 1) = -a * sn + c * cs;
    disp(2 * j) = (a * sn + c * one_minus_cos) / w;
    disp(2 * j + 1) = (-a * one_minus_cos + c * sn) / w;
  }
  rotated = null_part + planes_ * rot;
  displacement = eps * null_part + planes_ * disp;
}

Vector SpectralFactorization::rotate(const Vector& p, double eps) const {
  Vector disp, rot;
  kinetic(p, eps, disp, rot);
  return rot;
}

Vector SpectralFactorization::displacement(const Vector& p, double eps) const {
  Vector disp, rot;
  kinetic(p, eps, disp, rot);
  return disp;
}

SpectralFactorization factorize(const SkewMatrix& field) {
  const Index m = field.dim();
  const Matrix& l = field.matrix();
  if (m == 0 || max_abs(l) == 0.0) return SpectralFactorization(m, {}, Matrix::Identity(m, m));

  // For a normal matrix the real Schur form is block diagonal; each 2x2 block
  // of a skew matrix is [[0, beta], [-beta, 0]].
  Eigen::RealSchur<Matrix> schur(l);
  if (schur.info() != Eigen::Success) throw NumericalFailure("real Schur decomposition did not converge");
  const Matrix& t = schur.matrixT();
  const Matrix& basis = schur.matrixU();

  std::vector<RotationBlock> blocks;
  std::vector<Index> null_columns;
  for (Index i = 0; i < m;) {
    if (i + 1 < m && t(i + 1, i) != 0.0) {
      const double beta = 0.5 * (t(i, i + 1) - t(i + 1, i));
      if (std::abs(beta) <= kNullFrequency) {
        null_columns.push_back(i);
        null_columns.push_back(i + 1);
      } else if (beta > 0.0) {
        blocks.push_back({basis.col(i + 1), basis.col(i), beta});
      } else {
        blocks.push_back({basis.col(i), basis.col(i + 1), -beta});
      }
      i += 2;
    } else {
      null_columns.push_back(i);
      i += 1;
    }
  }
  Matrix null_basis(m, static_cast<Index>(null_columns.size()));
  for (std::size_t j = 0; j < null_columns.size(); ++j) null_basis.col(j) = basis.col(null_columns[j]);
  return SpectralFactorization(m, std::move(blocks), std::move(null_basis));
}

MagneticField::MagneticField(SkewMatrix field)
    : field_(std::move(field)), factorization_(factorize(field_)) {}

MagneticField MagneticField::zero(Index dim) { return MagneticField(SkewMatrix::zero(dim)); }

Vector checked_gradient(const GradientOracle& grad, const Vector& q) {
  Vector g = grad(q);
  if (!g.allFinite()) throw NonFiniteGradient();
  return g;
}

PhaseState flow_potential(const PhaseState& state, const GradientOracle& grad, double eps) {
  return {state.q, state.p - (0.5 * eps) * checked_gradient(grad, state.q)};
}

PhaseState flow_kinetic(const PhaseState& state, const SpectralFactorization& fact, double eps) {
  Vector disp, rot;
  fact.kinetic(state.p, eps, disp, rot);
  return {state.q + disp, std::move(rot)};
}

PhaseState euclidean_magnetic_step(const PhaseState& state, const GradientOracle& grad,
                                   const SpectralFactorization& fact, double eps) {
  return flow_potential(flow_kinetic(flow_potential(state, grad, eps), fact, eps), grad, eps);
}

}  // namespace magmcmc
