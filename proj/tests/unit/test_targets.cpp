#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "magmcmc/errors.hpp"
#include "magmcmc/target.hpp"
#include "oracles.hpp"

namespace magmcmc {
namespace {

// Ambient gradient against central differences at points near the default
// start, relative to max(1, |grad|).
void expect_gradient_matches(const Target& t, Rng& rng, int points, double tol, double noise = 0.05) {
  const auto f = [&t](const Vector& q) { return t.potential(q); };
  for (int i = 0; i < points; ++i) {
    const Vector q = t.manifold().retract(t.default_initial_point() + noise * rng.normal_vector(t.dim()));
    const Vector g = t.gradient(q);
    const Vector fd = oracle::fd_gradient(f, q);
    const double scale = std::max(1.0, max_abs(g));
    ASSERT_LE(max_abs(Vector(g - fd)) / scale, tol) << t.name() << " point " << i;
  }
}

TEST(Gradients, AllFamiliesMatchFiniteDifferences) {
  Rng rng(100);
  expect_gradient_matches(*default_linear_gaussian_target(), rng, 50, 1e-6, 1.0);
  expect_gradient_matches(*fixture::bvmf6(3), rng, 50, 1e-6, 1.0);
  expect_gradient_matches(*fixture::volleyball_target(2.0, rng), rng, 50, 1e-5, 0.1);
  expect_gradient_matches(*fixture::eigenmodel8(4), rng, 50, 1e-5, 0.3);
  Rng wrng(5);
  expect_gradient_matches(*fixture::matrix_fisher(make_stiefel(5, 2), wrng.normal_matrix(5, 2)), rng, 50, 1e-6, 1.0);
}

TEST(GaussianAffine, StandardNormalValues) {
  Matrix a(1, 2);
  a << 0.0, 1.0;
  const auto t = gaussian_affine_target(Vector::Zero(2), Vector::Ones(2), a, Vector::Zero(1));
  EXPECT_EQ(t->potential(Vector::Zero(2)), 0.0);
  EXPECT_EQ(max_abs(t->gradient(Vector::Zero(2))), 0.0);
  Vector q(2);
  q << 3.0, 0.0;
  EXPECT_DOUBLE_EQ(t->potential(q), 4.5);
}

TEST(GaussianAffine, ConditionedMomentsMatchNullSpaceOracle) {
  const auto t = default_linear_gaussian_target();
  const auto ref = oracle::condition_on_null_space(t->mean(), t->cov_diag(), t->a(), t->b());
  EXPECT_LE(max_abs(Vector(t->conditioned_mean() - ref.mean)), 1e-12);
  EXPECT_LE(max_abs(Matrix(t->conditioned_covariance() - ref.cov)), 1e-12);

  Rng rng(7);
  Matrix a = rng.normal_matrix(2, 5);
  const Vector b = rng.normal_vector(2), mean = rng.normal_vector(5);
  const Vector cov = (rng.normal_vector(5).array().square() + 0.5).matrix();
  const auto t2 = gaussian_affine_target(mean, cov, a, b);
  const auto ref2 = oracle::condition_on_null_space(mean, cov, a, b);
  EXPECT_LE(max_abs(Vector(t2->conditioned_mean() - ref2.mean)), 1e-10);
  EXPECT_LE(max_abs(Matrix(t2->conditioned_covariance() - ref2.cov)), 1e-10);
  EXPECT_LE(t2->manifold().constraint_residual(t2->default_initial_point()), 1e-10);
}

TEST(GaussianAffine, ShapeErrors) {
  Matrix a(1, 3);
  a << 1, 1, 1;
  EXPECT_THROW(gaussian_affine_target(Vector::Zero(2), Vector::Ones(3), a, Vector::Zero(1)), Error);
  EXPECT_THROW(gaussian_affine_target(Vector::Zero(3), Vector::Constant(3, -1.0), a, Vector::Zero(1)), Error);
}

TEST(Bvmf, ZeroParametersGiveUniform) {
  const auto t = bvmf_target(Matrix::Zero(3, 3), Vector::Zero(3));
  Rng rng(8);
  for (int i = 0; i < 5; ++i) {
    const Vector q = rng.normal_vector(3).normalized();
    EXPECT_EQ(t->potential(q), 0.0);
    EXPECT_EQ(max_abs(t->gradient(q)), 0.0);
  }
}

TEST(Bvmf, GradientFormula) {
  Matrix a(2, 2);
  a << 1.0, 2.0, 0.0, -1.0;  // symmetrized to [[1,1],[1,-1]]
  Vector b(2);
  b << 0.5, -0.5;
  const auto t = bvmf_target(a, b);
  Vector q(2);
  q << 0.6, 0.8;
  const Matrix as = 0.5 * (a + a.transpose());
  EXPECT_LE(max_abs(Vector(t->gradient(q) - (-b - 2.0 * as * q))), 1e-15);
  EXPECT_NEAR(t->potential(q), -(b.dot(q) + q.dot(as * q)), 1e-15);
}

TEST(Bvmf, IsotropicShiftIsConstantOnSphere) {
  Rng rng(9);
  const BvmfProblem p = random_bvmf_problem(4, rng);
  const auto t1 = bvmf_target(p.a, p.b);
  const auto t2 = bvmf_target(p.a + 3.0 * Matrix::Identity(4, 4), p.b);
  for (int i = 0; i < 10; ++i) {
    const Vector q = rng.normal_vector(4).normalized();
    EXPECT_NEAR(t2->potential(q) - t1->potential(q), -3.0, 1e-12);
  }
}

TEST(Simplex, RejectsNonPositiveAlpha) {
  EXPECT_THROW(simplex_sphere_target(Vector::Zero(3), {}), NonPositiveAlpha);
  Vector alpha(2);
  alpha << 1.0, -0.5;
  EXPECT_THROW(simplex_sphere_target(alpha, {}), NonPositiveAlpha);
}

TEST(Simplex, SingleGameLikelihood) {
  Game g;
  g.team_a = {0};
  g.team_b = {1};
  g.winner_a = true;
  const auto with = simplex_sphere_target(Vector::Constant(3, 2.0), {g});
  const auto without = simplex_sphere_target(Vector::Constant(3, 2.0), {});
  Vector q(3);
  q << 0.6, 0.48, 0.64;
  const double expected = -std::log(0.36 / (0.36 + 0.2304));
  EXPECT_NEAR(with->potential(q) - without->potential(q), expected, 1e-14);
}

TEST(Simplex, PushforwardDensityNormalized) {
  // Over the positive octant of S^2, B(alpha)^{-1} 2^{n-1} exp(-U) integrates
  // to one when there are no games.
  Vector alpha(3);
  alpha << 1.5, 2.0, 0.8;
  const auto t = simplex_sphere_target(alpha, {});
  const double log_beta = std::lgamma(alpha(0)) + std::lgamma(alpha(1)) + std::lgamma(alpha(2)) -
                          std::lgamma(alpha.sum());
  const int nodes = 1200;
  const double h = 0.5 * std::numbers::pi / nodes;
  double total = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double th = (i + 0.5) * h;
    for (int j = 0; j < nodes; ++j) {
      const double ph = (j + 0.5) * h;
      Vector q(3);
      q << std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th);
      total += std::exp(-t->potential(q)) * std::sin(th) * h * h;
    }
  }
  EXPECT_NEAR(4.0 * total * std::exp(-log_beta), 1.0, 2e-3);
}

TEST(Eigenmodel, LogNormalCdfOracle) {
  for (double x : {-5.9, -3.0, -0.5, 0.0, 1.0, 5.0}) {
    EXPECT_NEAR(log_normal_cdf(x), std::log(0.5 * std::erfc(-x / std::numbers::sqrt2)), 1e-13) << x;
  }
  for (double x : {-7.0, -15.0, -30.0}) {
    const double ref = std::log(0.5 * std::erfc(-x / std::numbers::sqrt2));
    EXPECT_NEAR(log_normal_cdf(x) / ref, 1.0, 1e-12) << x;
  }
  // Beyond double range of Phi itself: compare to the asymptotic series.
  const double x = -60.0;
  const double series = -0.5 * x * x - std::log(-x) - 0.5 * std::log(2.0 * std::numbers::pi) +
                        std::log(1.0 - 1.0 / (x * x) + 3.0 / std::pow(x, 4));
  EXPECT_NEAR(log_normal_cdf(x), series, 1e-8);
  EXPECT_TRUE(std::isfinite(log_normal_cdf(-1e4)));
  EXPECT_NEAR(log_normal_cdf(40.0), 0.0, 1e-300);
}

TEST(Eigenmodel, InverseMillsRatio) {
  for (double x : {-30.0, -4.0, 0.0, 3.0}) {
    const double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    const double cdf = 0.5 * std::erfc(-x / std::numbers::sqrt2);
    EXPECT_NEAR(inverse_mills_ratio(x) / (phi / cdf), 1.0, 1e-10) << x;
  }
}

TEST(Eigenmodel, PackLayoutAndFeasibleStart) {
  Rng grng(1);
  const auto t = network_eigenmodel_target(synthetic_eigenmodel_graph(8, 2, grng), 2, 230.0, 100.0);
  EXPECT_EQ(t->dim(), 8 * 2 + 2 + 1);
  const Vector q0 = t->default_initial_point();
  EXPECT_LE(t->manifold().constraint_residual(q0), 1e-10);
  Matrix u = Matrix::Zero(8, 2);
  u(0, 0) = 1.0;
  u(1, 1) = 1.0;
  Vector sigma(2);
  sigma << 3.0, -1.0;
  const Vector q = t->pack(u, sigma, 0.25);
  EXPECT_EQ(q(0), 1.0);
  EXPECT_EQ(q(9), 1.0);
  EXPECT_EQ(q(16), 3.0);
  EXPECT_EQ(q(17), -1.0);
  EXPECT_EQ(q(18), 0.25);
}

TEST(Eigenmodel, PriorOnlyPotential) {
  Rng rng(3);
  const auto t = network_eigenmodel_target(synthetic_eigenmodel_graph(6, 2, rng), 2, 230.0, 100.0, 0.0);
  const Matrix u = polar_retract(rng.normal_matrix(6, 2));
  Vector sigma(2);
  sigma << 10.0, -4.0;
  const double c = 2.0;
  const double expected = (100.0 + 16.0) / (2.0 * 230.0) + 4.0 / (2.0 * 100.0);
  EXPECT_NEAR(t->potential(t->pack(u, sigma, c)), expected, 1e-12);
}

TEST(Eigenmodel, InputValidation) {
  Matrix asym = Matrix::Zero(4, 4);
  asym(0, 1) = 1.0;
  EXPECT_THROW(network_eigenmodel_target(asym, 2, 1.0, 1.0), Error);
  Matrix sym = Matrix::Zero(4, 4);
  EXPECT_THROW(network_eigenmodel_target(sym, 5, 1.0, 1.0), Error);
  EXPECT_THROW(network_eigenmodel_target(sym, 2, -1.0, 1.0), Error);
}

TEST(Readers, GamesAndAdjacency) {
  const auto dir = std::filesystem::temp_directory_path() / "magmcmc_test_readers";
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "games.csv");
    f << "teamA,teamB,winnerA\n0;1;2,3;4;5,1\n6,7,0\n";
  }
  const auto games = read_games_csv(dir / "games.csv");
  ASSERT_EQ(games.size(), 2u);
  EXPECT_EQ(games[0].team_a.size(), 3u);
  EXPECT_TRUE(games[0].winner_a);
  EXPECT_EQ(games[1].team_b[0], 7);
  EXPECT_FALSE(games[1].winner_a);
  {
    std::ofstream f(dir / "adj.txt");
    f << "0 1 0\n1 0 1\n0 1 0\n";
  }
  const Matrix adj = read_adjacency_matrix(dir / "adj.txt");
  EXPECT_EQ(adj.rows(), 3);
  EXPECT_EQ(adj(1, 2), 1.0);
  EXPECT_THROW(read_games_csv(dir / "missing.csv"), Error);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace magmcmc
