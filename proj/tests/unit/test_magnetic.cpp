#include <cmath>
#include <complex>
#include <limits>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "magmcmc/errors.hpp"
#include "magmcmc/magnetic.hpp"
#include "oracles.hpp"

namespace magmcmc {
namespace {

Matrix random_skew(Index n, Rng& rng) { return skew_from_gaussian(n, rng).matrix(); }

TEST(SkewMatrix, ValidateReturnsExactSkewPart) {
  Matrix a(2, 2);
  a << 0.0, 1.0, -1.0 + 1e-13, 0.0;
  const SkewMatrix s = validate_skew(a);
  EXPECT_EQ(s.matrix()(0, 1), -s.matrix()(1, 0));
  EXPECT_EQ(s.matrix()(0, 0), 0.0);
}

TEST(SkewMatrix, RejectsSymmetricDefect) {
  Matrix a(2, 2);
  a << 0.0, 1.0, -0.9, 0.0;
  try {
    validate_skew(a);
    FAIL() << "expected NotSkewSymmetric";
  } catch (const NotSkewSymmetric& e) {
    EXPECT_NEAR(e.defect(), 0.1, 1e-12);
  }
}

TEST(SkewMatrix, RejectsNaNAndNonSquare) {
  Matrix a = Matrix::Zero(3, 3);
  a(0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(validate_skew(a), Error);
  EXPECT_THROW(validate_skew(Matrix::Zero(2, 3)), Error);
}

TEST(SkewMatrix, GaussianDrawIsSkewAndSeeded) {
  Rng r1(5), r2(5);
  const Matrix a = random_skew(6, r1);
  EXPECT_EQ(max_abs(Matrix(a + a.transpose())), 0.0);
  EXPECT_EQ(a, random_skew(6, r2));
}

TEST(Factorization, ReconstructsField) {
  Rng rng(11);
  for (Index n : {1, 2, 3, 4, 5, 8}) {
    const Matrix l = random_skew(n, rng);
    const SpectralFactorization f = factorize(validate_skew(l));
    EXPECT_LE(max_abs(Matrix(f.reconstruct_negative_field() + l)), 1e-12) << n;
    // Planes and kernel together form an orthonormal basis.
    Matrix basis(n, 2 * static_cast<Index>(f.blocks().size()) + f.null_basis().cols());
    Index c = 0;
    for (const auto& b : f.blocks()) {
      basis.col(c++) = b.u;
      basis.col(c++) = b.v;
    }
    basis.rightCols(f.null_basis().cols()) = f.null_basis();
    EXPECT_LE(max_abs(Matrix(basis.transpose() * basis - Matrix::Identity(n, n))), 1e-12) << n;
    EXPECT_EQ(f.null_basis().cols(), n % 2) << n;
  }
}

TEST(Factorization, BlockConvention) {
  Rng rng(12);
  const Matrix l = random_skew(4, rng);
  const SpectralFactorization f = factorize(validate_skew(l));
  for (const auto& b : f.blocks()) {
    EXPECT_LE(max_abs(Vector(l * b.u - b.frequency * b.v)), 1e-12);
    EXPECT_LE(max_abs(Vector(l * b.v + b.frequency * b.u)), 1e-12);
  }
}

TEST(Factorization, ZeroAndDegenerateFields) {
  const SpectralFactorization zero = factorize(SkewMatrix::zero(4));
  EXPECT_TRUE(zero.is_zero());
  EXPECT_EQ(zero.null_basis().cols(), 4);

  // Rank-2 field in R^4: one plane, two-dimensional kernel.
  Matrix l = Matrix::Zero(4, 4);
  l(0, 2) = 1.5;
  l(2, 0) = -1.5;
  const SpectralFactorization f = factorize(validate_skew(l));
  ASSERT_EQ(f.blocks().size(), 1u);
  EXPECT_NEAR(std::abs(f.blocks()[0].frequency), 1.5, 1e-14);
  EXPECT_EQ(f.null_basis().cols(), 2);
}

TEST(Kinetic, MatchesRk4Oracle) {
  Rng rng(21);
  for (Index n : {2, 3, 5, 6}) {
    const Matrix l = 2.0 * random_skew(n, rng);
    const SpectralFactorization f = factorize(validate_skew(l));
    const Vector p = rng.normal_vector(n);
    for (double eps : {0.01, 0.3, -0.7}) {
      Vector disp, rot, d_ref, r_ref;
      f.kinetic(p, eps, disp, rot);
      oracle::kinetic_flow_rk4(l, p, eps, 4000, d_ref, r_ref);
      EXPECT_LE(max_abs(Vector(disp - d_ref)), 1e-10) << n << " " << eps;
      EXPECT_LE(max_abs(Vector(rot - r_ref)), 1e-10) << n << " " << eps;
      EXPECT_LE(max_abs(Vector(f.rotate(p, eps) - rot)), 1e-15);
      EXPECT_LE(max_abs(Vector(f.displacement(p, eps) - disp)), 1e-15);
    }
  }
}

TEST(Kinetic, MatchesComplexEigenForm) {
  // -L is normal, so -L = W diag(lambda) W^H with W unitary and lambda
  // purely imaginary.
  Rng rng(22);
  const Index n = 5;
  const Matrix l = random_skew(n, rng);
  const SpectralFactorization f = factorize(validate_skew(l));
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(Eigen::MatrixXcd(-l.cast<std::complex<double>>()));
  ASSERT_EQ(es.info(), Eigen::Success);
  Eigen::MatrixXcd w = es.eigenvectors();
  for (Index j = 0; j < n; ++j) w.col(j).normalize();
  const Eigen::VectorXcd lambda = es.eigenvalues();
  const Vector p = rng.normal_vector(n);
  const double eps = 0.4;
  const Eigen::VectorXcd c = w.adjoint() * p.cast<std::complex<double>>();
  Eigen::VectorXcd rot_c = Eigen::VectorXcd::Zero(n), disp_c = Eigen::VectorXcd::Zero(n);
  for (Index j = 0; j < n; ++j) {
    const std::complex<double> lam = lambda(j);
    rot_c += w.col(j) * (std::exp(eps * lam) * c(j));
    const std::complex<double> m = std::abs(lam) < 1e-12 ? std::complex<double>(eps) : (std::exp(eps * lam) - 1.0) / lam;
    disp_c += w.col(j) * (m * c(j));
  }
  EXPECT_LE(max_abs(Vector(rot_c.real() - f.rotate(p, eps))), 1e-12);
  EXPECT_LE(max_abs(Vector(disp_c.real() - f.displacement(p, eps))), 1e-12);
  EXPECT_LE(rot_c.imag().cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Kinetic, RotationPreservesNorm) {
  Rng rng(23);
  const SpectralFactorization f = factorize(skew_from_gaussian(7, rng));
  const Vector p = rng.normal_vector(7);
  EXPECT_NEAR(f.rotate(p, 3.0).norm(), p.norm(), 1e-12);
}

TEST(Kinetic, ZeroFieldIsFreeMotion) {
  const MagneticField field = MagneticField::zero(3);
  PhaseState z{Vector::Ones(3), Vector::LinSpaced(3, -1.0, 1.0)};
  const PhaseState out = flow_kinetic(z, field.factorization(), 0.25);
  EXPECT_EQ(out.p, z.p);
  EXPECT_LE(max_abs(Vector(out.q - (z.q + 0.25 * z.p))), 1e-15);
}

TEST(Strang, ZeroFieldEqualsLeapfrog) {
  Rng rng(31);
  const Matrix h = [&] {
    const Matrix a = rng.normal_matrix(4, 4);
    return Matrix(a * a.transpose() + Matrix::Identity(4, 4));
  }();
  const GradientOracle grad = [&h](const Vector& q) { return Vector(h * q); };
  PhaseState z{rng.normal_vector(4), rng.normal_vector(4)};
  const double eps = 0.05;
  const PhaseState out = euclidean_magnetic_step(z, grad, factorize(SkewMatrix::zero(4)), eps);
  const Vector p_half = z.p - 0.5 * eps * h * z.q;
  const Vector q1 = z.q + eps * p_half;
  const Vector p1 = p_half - 0.5 * eps * h * q1;
  EXPECT_LE(max_abs(Vector(out.q - q1)), 1e-15);
  EXPECT_LE(max_abs(Vector(out.p - p1)), 1e-15);
}

TEST(Strang, ReversibleUnderNegatedStep) {
  Rng rng(32);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 5;
    const Matrix a = rng.normal_matrix(n, n);
    const Matrix h = a * a.transpose() / n;
    const GradientOracle grad = [h](const Vector& q) { return Vector(h * q); };
    const SpectralFactorization f = factorize(skew_from_gaussian(n, rng));
    PhaseState z{rng.normal_vector(n), rng.normal_vector(n)};
    const double eps = 0.01 + 0.09 * rng.uniform();
    PhaseState w = z;
    for (int k = 0; k < 10; ++k) w = euclidean_magnetic_step(w, grad, f, eps);
    for (int k = 0; k < 10; ++k) w = euclidean_magnetic_step(w, grad, f, -eps);
    EXPECT_LE(max_abs_diff(w, z), 1e-10);
  }
}

TEST(Strang, PotentialHalfFlow) {
  const GradientOracle grad = [](const Vector& q) { return Vector(2.0 * q); };
  PhaseState z{Vector::Constant(2, 1.0), Vector::Zero(2)};
  const PhaseState out = flow_potential(z, grad, 0.5);
  EXPECT_EQ(out.q, z.q);
  EXPECT_DOUBLE_EQ(out.p(0), -0.5);
}

TEST(Strang, NonFiniteGradientThrows) {
  const GradientOracle bad = [](const Vector& q) {
    Vector g = q;
    g(0) = std::numeric_limits<double>::infinity();
    return g;
  };
  EXPECT_THROW(checked_gradient(bad, Vector::Zero(2)), NonFiniteGradient);
  PhaseState z{Vector::Zero(2), Vector::Zero(2)};
  EXPECT_THROW(euclidean_magnetic_step(z, bad, factorize(SkewMatrix::zero(2)), 0.1), NonFiniteGradient);
}

TEST(Strang, EnergyErrorBoundedOverLongRun) {
  Rng rng(33);
  const Index n = 4;
  const Matrix h = Matrix::Identity(n, n);
  const GradientOracle grad = [h](const Vector& q) { return Vector(h * q); };
  const SpectralFactorization f = factorize(skew_from_gaussian(n, rng));
  PhaseState z{rng.normal_vector(n), rng.normal_vector(n)};
  auto energy = [&](const PhaseState& s) { return 0.5 * s.q.squaredNorm() + 0.5 * s.p.squaredNorm(); };
  const double h0 = energy(z);
  double worst = 0.0;
  for (int k = 0; k < 20000; ++k) {
    z = euclidean_magnetic_step(z, grad, f, 0.05);
    worst = std::max(worst, std::abs(energy(z) - h0));
  }
  EXPECT_LE(worst, 0.05 * 0.05 * h0);
}

}  // namespace
}  // namespace magmcmc
