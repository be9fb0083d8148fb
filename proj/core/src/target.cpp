#include "magmcmc/target.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include <Eigen/Eigenvalues>

#include "magmcmc/errors.hpp"

namespace magmcmc {

FunctionTarget::FunctionTarget(ManifoldPtr manifold, std::string name, PotentialFn potential,
                               GradientOracle gradient, Vector initial_point)
    : Target(std::move(manifold), std::move(name)),
      potential_(std::move(potential)),
      gradient_(std::move(gradient)),
      initial_point_(std::move(initial_point)) {}

std::shared_ptr<FunctionTarget> zero_potential_target(ManifoldPtr manifold, Vector initial_point) {
  const Index m = manifold->ambient_dim();
  if (initial_point.size() == 0) initial_point = manifold->retract(Vector::Ones(m));
  return std::make_shared<FunctionTarget>(
      manifold, "zero_potential", [](const Vector&) { return 0.0; },
      [m](const Vector&) { return Vector::Zero(m).eval(); }, std::move(initial_point));
}

std::shared_ptr<FunctionTarget> shifted_target(TargetPtr base, double offset) {
  return std::make_shared<FunctionTarget>(
      base->manifold_ptr(), base->name() + "+shift",
      [base, offset](const Vector& q) { return base->potential(q) + offset; },
      [base](const Vector& q) { return base->gradient(q); }, base->default_initial_point());
}

// ---------------------------------------------------------------------------

GaussianAffineTarget::GaussianAffineTarget(Vector mean, Vector cov_diag, const Matrix& a,
                                           const Vector& b)
    : Target(make_affine(a, b), "gaussian_affine"),
      mean_(std::move(mean)),
      cov_diag_(std::move(cov_diag)),
      a_(a),
      b_(b) {
  if (mean_.size() != a_.cols() || cov_diag_.size() != a_.cols())
    throw Error("gaussian_affine: mean/covariance dimension does not match A");
  if (!(cov_diag_.array() > 0.0).all()) throw Error("gaussian_affine: covariance must be positive");
}

double GaussianAffineTarget::potential(const Vector& q) const {
  const Vector d = q - mean_;
  return 0.5 * d.cwiseProduct(d).cwiseQuotient(cov_diag_).sum();
}

Vector GaussianAffineTarget::gradient(const Vector& q) const {
  return (q - mean_).cwiseQuotient(cov_diag_);
}

Vector GaussianAffineTarget::conditioned_mean() const {
  const Matrix sat = cov_diag_.asDiagonal() * a_.transpose();
  const Matrix gram = a_ * sat;
  return mean_ + sat * gram.ldlt().solve(b_ - a_ * mean_);
}

Matrix GaussianAffineTarget::conditioned_covariance() const {
  const Matrix sat = cov_diag_.asDiagonal() * a_.transpose();
  const Matrix gram = a_ * sat;
  Matrix cov = Matrix(cov_diag_.asDiagonal()) - sat * gram.ldlt().solve(sat.transpose());
  return 0.5 * (cov + cov.transpose());
}

std::shared_ptr<GaussianAffineTarget> gaussian_affine_target(const Vector& mean,
                                                             const Vector& cov_diag,
                                                             const Matrix& a, const Vector& b) {
  return std::make_shared<GaussianAffineTarget>(mean, cov_diag, a, b);
}

std::shared_ptr<GaussianAffineTarget> default_linear_gaussian_target() {
  Matrix a(2, 4);
  a << 1, 1, 1, 1, 1, 1, -1, 1;
  Vector cov(4);
  cov << 1.0, 1.0, 0.01, 0.01;
  return gaussian_affine_target(Vector::Zero(4), cov, a, Vector::Zero(2));
}

// ---------------------------------------------------------------------------

BvmfTarget::BvmfTarget(const Matrix& a, Vector b)
    : Target(make_sphere(a.rows()), "bvmf"), a_(0.5 * (a + a.transpose())), b_(std::move(b)) {
  if (a.rows() != a.cols() || b_.size() != a.rows())
    throw Error("bvmf: A must be square and match b");
}

double BvmfTarget::potential(const Vector& q) const { return -b_.dot(q) - q.dot(a_ * q); }

Vector BvmfTarget::gradient(const Vector& q) const { return -b_ - 2.0 * (a_ * q); }

Vector BvmfTarget::default_initial_point() const {
  if (b_.norm() > 0.0) return b_.normalized();
  return Vector::Unit(b_.size(), 0);
}

std::shared_ptr<BvmfTarget> bvmf_target(const Matrix& a, const Vector& b) {
  return std::make_shared<BvmfTarget>(a, b);
}

BvmfProblem random_bvmf_problem(Index dim, Rng& rng) {
  const Matrix z = rng.normal_matrix(dim, dim);
  BvmfProblem out;
  out.a = z * z.transpose() / static_cast<double>(dim);
  out.a = 0.5 * (out.a + out.a.transpose());
  out.b = rng.normal_vector(dim);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

double team_mass(const Vector& q, const std::vector<Index>& team) {
  double s = 0.0;
  for (Index i : team) s += q(i) * q(i);
  return s;
}

}  // namespace

SimplexSphereTarget::SimplexSphereTarget(Vector alpha, std::vector<Game> games)
    : Target(make_sphere(alpha.size()), "simplex_sphere"),
      alpha_(std::move(alpha)),
      games_(std::move(games)) {
  const Index n = alpha_.size();
  for (Index i = 0; i < n; ++i)
    if (!(alpha_(i) > 0.0)) throw NonPositiveAlpha("Dirichlet parameters must be positive");
  for (const Game& g : games_) {
    if (g.team_a.empty() || g.team_b.empty()) throw Error("simplex_sphere: empty team in game");
    std::set<Index> seen;
    for (const auto* team : {&g.team_a, &g.team_b}) {
      for (Index i : *team) {
        if (i < 0 || i >= n) throw Error("simplex_sphere: player index out of range");
        if (!seen.insert(i).second) throw Error("simplex_sphere: teams in a game must be disjoint");
      }
    }
  }
}

double SimplexSphereTarget::potential(const Vector& q) const {
  double u = 0.0;
  for (Index i = 0; i < alpha_.size(); ++i) u -= (2.0 * alpha_(i) - 1.0) * std::log(std::abs(q(i)));
  for (const Game& g : games_) {
    const double sa = team_mass(q, g.team_a);
    const double sb = team_mass(q, g.team_b);
    u -= std::log((g.winner_a ? sa : sb) / (sa + sb));
  }
  return u;
}

Vector SimplexSphereTarget::gradient(const Vector& q) const {
  Vector grad(alpha_.size());
  for (Index i = 0; i < alpha_.size(); ++i) grad(i) = -(2.0 * alpha_(i) - 1.0) / q(i);
  for (const Game& g : games_) {
    const double sa = team_mass(q, g.team_a);
    const double sb = team_mass(q, g.team_b);
    const double total = sa + sb;
    const auto& winners = g.winner_a ? g.team_a : g.team_b;
    const double swin = g.winner_a ? sa : sb;
    for (Index i : winners) grad(i) -= 2.0 * q(i) / swin;
    for (Index i : g.team_a) grad(i) += 2.0 * q(i) / total;
    for (Index i : g.team_b) grad(i) += 2.0 * q(i) / total;
  }
  return grad;
}

Vector SimplexSphereTarget::default_initial_point() const {
  const Index n = alpha_.size();
  return Vector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
}

std::shared_ptr<SimplexSphereTarget> simplex_sphere_target(const Vector& alpha,
                                                           std::vector<Game> games) {
  return std::make_shared<SimplexSphereTarget>(alpha, std::move(games));
}

// ---------------------------------------------------------------------------

double log_normal_cdf(double x) {
  constexpr double kInvSqrt2 = 0.70710678118654752440;
  if (x > 6.0) return std::log1p(-0.5 * std::erfc(x * kInvSqrt2));
  if (x > -37.0) return std::log(0.5 * std::erfc(-x * kInvSqrt2));
  // Asymptotic expansion of the lower tail.
  const double x2 = x * x;
  const double inv = 1.0 / x2;
  const double series = 1.0 - inv * (1.0 - 3.0 * inv * (1.0 - 5.0 * inv * (1.0 - 7.0 * inv)));
  return -0.5 * x2 - std::log(-x) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

double inverse_mills_ratio(double x) {
  const double log_pdf = -0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi);
  return std::exp(log_pdf - log_normal_cdf(x));
}

NetworkEigenmodelTarget::NetworkEigenmodelTarget(Matrix adjacency, Index rank,
                                                 double prior_var_sigma, double prior_var_c,
                                                 double likelihood_weight)
    : Target(make_product({make_stiefel(adjacency.rows(), rank), make_euclidean(rank + 1)}),
             "network_eigenmodel"),
      adjacency_(std::move(adjacency)),
      rank_(rank),
      prior_var_sigma_(prior_var_sigma),
      prior_var_c_(prior_var_c),
      likelihood_weight_(likelihood_weight) {
  const Index n = adjacency_.rows();
  if (adjacency_.cols() != n) throw Error("eigenmodel: adjacency matrix must be square");
  for (Index i = 0; i < n; ++i) {
    if (adjacency_(i, i) != 0.0) throw Error("eigenmodel: adjacency diagonal must be zero");
    for (Index j = 0; j < n; ++j) {
      const double d = adjacency_(i, j);
      if ((d != 0.0 && d != 1.0) || d != adjacency_(j, i))
        throw Error("eigenmodel: adjacency must be a symmetric 0/1 matrix");
    }
  }
  if (!(prior_var_sigma_ > 0.0) || !(prior_var_c_ > 0.0))
    throw Error("eigenmodel: prior variances must be positive");
}

Matrix NetworkEigenmodelTarget::logits(const Vector& q) const {
  const Index n = nodes();
  const Eigen::Map<const Matrix> u(q.data(), n, rank_);
  const Vector sigma = q.segment(n * rank_, rank_);
  const double c = q(n * rank_ + rank_);
  return (u * sigma.asDiagonal() * u.transpose()).array() + c;
}

double NetworkEigenmodelTarget::potential(const Vector& q) const {
  const Index n = nodes();
  const Matrix x = logits(q);
  double loglik = 0.0;
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < j; ++i)
      loglik += adjacency_(i, j) != 0.0 ? log_normal_cdf(x(i, j)) : log_normal_cdf(-x(i, j));
  const Vector sigma = q.segment(n * rank_, rank_);
  const double c = q(n * rank_ + rank_);
  return -likelihood_weight_ * loglik + 0.5 * sigma.squaredNorm() / prior_var_sigma_ +
         0.5 * c * c / prior_var_c_;
}

Vector NetworkEigenmodelTarget::gradient(const Vector& q) const {
  const Index n = nodes();
  const Matrix x = logits(q);
  // w(i, j) = d(-loglik) / d x_ij, symmetric with zero diagonal.
  Matrix w = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < j; ++i) {
      const double d = adjacency_(i, j) != 0.0 ? -inverse_mills_ratio(x(i, j))
                                               : inverse_mills_ratio(-x(i, j));
      w(i, j) = w(j, i) = likelihood_weight_ * d;
    }
  }
  const Eigen::Map<const Matrix> u(q.data(), n, rank_);
  const Vector sigma = q.segment(n * rank_, rank_);
  const double c = q(n * rank_ + rank_);

  Vector grad(q.size());
  const Matrix grad_u = w * u * sigma.asDiagonal();
  grad.head(n * rank_) = Eigen::Map<const Vector>(grad_u.data(), grad_u.size());
  grad.segment(n * rank_, rank_) =
      0.5 * (u.transpose() * w * u).diagonal() + sigma / prior_var_sigma_;
  grad(n * rank_ + rank_) = 0.5 * w.sum() + c / prior_var_c_;
  return grad;
}

Vector NetworkEigenmodelTarget::pack(const Matrix& u, const Vector& sigma, double c) const {
  Vector q(nodes() * rank_ + rank_ + 1);
  q.head(nodes() * rank_) = Eigen::Map<const Vector>(u.data(), u.size());
  q.segment(nodes() * rank_, rank_) = sigma;
  q(nodes() * rank_ + rank_) = c;
  return q;
}

Vector NetworkEigenmodelTarget::default_initial_point() const {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(adjacency_);
  const Vector& values = eig.eigenvalues();
  std::vector<Index> order(values.size());
  for (Index i = 0; i < values.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return std::abs(values(a)) > std::abs(values(b)); });
  Matrix u(nodes(), rank_);
  Vector sigma(rank_);
  for (Index k = 0; k < rank_; ++k) {
    u.col(k) = eig.eigenvectors().col(order[k]);
    sigma(k) = values(order[k]);
  }
  return pack(u, sigma, 0.0);
}

std::shared_ptr<NetworkEigenmodelTarget> network_eigenmodel_target(const Matrix& adjacency,
                                                                   Index rank,
                                                                   double prior_var_sigma,
                                                                   double prior_var_c,
                                                                   double likelihood_weight) {
  return std::make_shared<NetworkEigenmodelTarget>(adjacency, rank, prior_var_sigma, prior_var_c,
                                                   likelihood_weight);
}

Matrix synthetic_eigenmodel_graph(Index nodes, Index rank, Rng& rng) {
  const Matrix u = polar_retract(rng.normal_matrix(nodes, rank));
  Vector sigma = rng.normal_vector(rank) * (0.5 * static_cast<double>(nodes));
  const double c = rng.normal();
  const Matrix x = (u * sigma.asDiagonal() * u.transpose()).array() + c;
  Matrix delta = Matrix::Zero(nodes, nodes);
  for (Index j = 0; j < nodes; ++j) {
    for (Index i = 0; i < j; ++i) {
      const double prob = std::exp(log_normal_cdf(x(i, j)));
      delta(i, j) = delta(j, i) = rng.uniform() < prob ? 1.0 : 0.0;
    }
  }
  return delta;
}

}  // namespace magmcmc
