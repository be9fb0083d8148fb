#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the code path it is meant to check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "magmcmc/random.hpp"
#include "magmcmc/types.hpp"

namespace magmcmc::oracle {

// Gaussian N(mean, diag(cov)) conditioned on {A q = b} through an explicit
// null-space parametrization q = x0 + Z y.
struct ConditionedGaussian {
  Vector mean;
  Matrix cov;
};

inline ConditionedGaussian condition_on_null_space(const Vector& mean, const Vector& cov_diag,
                                                   const Matrix& a, const Vector& b) {
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Index rank = svd.rank();
  const Matrix z = svd.matrixV().rightCols(a.cols() - rank);
  const Vector x0 = svd.solve(b);  // minimum-norm particular solution
  const Matrix prec = cov_diag.cwiseInverse().asDiagonal();
  const Matrix p = z.transpose() * prec * z;
  const Matrix p_inv = p.inverse();
  const Vector y_mean = -p_inv * (z.transpose() * prec * (x0 - mean));
  return {x0 + z * y_mean, z * p_inv * z.transpose()};
}

// Central finite-difference gradient in ambient coordinates.
inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x, double h = 1e-6) {
  Vector g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    Vector xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    g(i) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

// exp(-t L) p by fixed-step RK4 on dp/dt = -L p, and its time integral.
inline void kinetic_flow_rk4(const Matrix& l, const Vector& p, double t, int steps, Vector& disp,
                             Vector& rotated) {
  const double h = t / steps;
  Vector q = Vector::Zero(p.size());
  Vector v = p;
  auto f = [&](const Vector& vv) { return Vector(-l * vv); };
  for (int i = 0; i < steps; ++i) {
    const Vector k1 = f(v), k2 = f(v + 0.5 * h * k1), k3 = f(v + 0.5 * h * k2), k4 = f(v + h * k3);
    const Vector d1 = v, d2 = v + 0.5 * h * k1, d3 = v + 0.5 * h * k2, d4 = v + h * k3;
    q += h / 6.0 * (d1 + 2 * d2 + 2 * d3 + d4);
    v += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  disp = q;
  rotated = v;
}

// Canonical constrained leapfrog (RATTLE) with its own Newton iteration on the
// position multiplier. g / jac describe the constraint, grad is grad U.
struct RattleProblem {
  std::function<Vector(const Vector&)> g;
  std::function<Matrix(const Vector&)> jac;
  std::function<Vector(const Vector&)> grad;
};

inline void rattle_step(const RattleProblem& prob, Vector& q, Vector& p, double eps, double tol = 1e-13,
                        int max_iter = 100) {
  const Vector gu = prob.grad(q);
  const Matrix g0 = prob.jac(q);
  const Index k = g0.rows();
  Vector lambda = Vector::Zero(k);
  auto position = [&](const Vector& lam) {
    return Vector(q + eps * (p - 0.5 * eps * gu - 0.5 * eps * g0.transpose() * lam));
  };
  if (k > 0) {
    for (int it = 0; it < max_iter; ++it) {
      const Vector r = prob.g(position(lambda));
      if (r.cwiseAbs().maxCoeff() <= tol) break;
      const Matrix j = prob.jac(position(lambda)) * (-0.5 * eps * eps) * g0.transpose();
      lambda -= j.partialPivLu().solve(r);
    }
  }
  const Vector p_half = p - 0.5 * eps * gu - 0.5 * eps * (k > 0 ? Vector(g0.transpose() * lambda) : Vector::Zero(q.size()));
  q = q + eps * p_half;
  Vector p_new = p_half - 0.5 * eps * prob.grad(q);
  if (k > 0) {
    const Matrix g1 = prob.jac(q);
    // Remove the normal component: p_new - G^T (G G^T)^{-1} G p_new.
    const Vector nu = (g1 * g1.transpose()).ldlt().solve(g1 * p_new);
    p_new -= g1.transpose() * nu;
  }
  p = p_new;
}

// Density on S^1 (angle theta) normalized by the midpoint rule and binned
// into equal-width angular bins on [-pi, pi).
inline std::vector<double> circle_bin_masses(const std::function<double(const Vector&)>& potential, int bins,
                                             int nodes = 400000) {
  std::vector<double> mass(static_cast<std::size_t>(bins), 0.0);
  double total = 0.0;
  for (int k = 0; k < nodes; ++k) {
    const double th = -std::numbers::pi + (k + 0.5) * 2.0 * std::numbers::pi / nodes;
    Vector q(2);
    q << std::cos(th), std::sin(th);
    const double w = std::exp(-potential(q));
    const int b = std::min(bins - 1, static_cast<int>((th + std::numbers::pi) / (2.0 * std::numbers::pi) * bins));
    mass[static_cast<std::size_t>(b)] += w;
    total += w;
  }
  for (auto& m : mass) m /= total;
  return mass;
}

inline int circle_bin(const Vector& q, int bins) {
  const double th = std::atan2(q(1), q(0));
  return std::clamp(static_cast<int>((th + std::numbers::pi) / (2.0 * std::numbers::pi) * bins), 0, bins - 1);
}

inline double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
  double tv = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) tv += std::abs(a[i] - b[i]);
  return 0.5 * tv;
}

// x_t = phi x_{t-1} + sqrt(1 - phi^2) e_t, started in stationarity.
inline std::vector<double> ar1_series(double phi, std::size_t n, Rng& rng) {
  std::vector<double> x(n);
  x[0] = rng.normal();
  const double s = std::sqrt(1.0 - phi * phi);
  for (std::size_t t = 1; t < n; ++t) x[t] = phi * x[t - 1] + s * rng.normal();
  return x;
}

// ESS from the full autocovariance sequence with the initial monotone positive
// sequence rule, written directly from the definition (O(n^2)).
inline double brute_force_ess(const std::vector<double>& x, double ceiling) {
  const std::size_t n = x.size();
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  std::vector<double> gamma(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double s = 0.0;
    for (std::size_t t = 0; t + k < n; ++t) s += (x[t] - mean) * (x[t + k] - mean);
    gamma[k] = s / static_cast<double>(n);
  }
  // Pair sums Gamma_m = gamma_{2m} + gamma_{2m+1}; keep the positive prefix,
  // then force it non-increasing.
  std::vector<double> pairs;
  for (std::size_t m = 0; 2 * m + 1 < n; ++m) {
    const double pm = gamma[2 * m] + gamma[2 * m + 1];
    if (pm <= 0.0) break;
    pairs.push_back(pm);
  }
  for (std::size_t m = 1; m < pairs.size(); ++m) pairs[m] = std::min(pairs[m], pairs[m - 1]);
  double sum = 0.0;
  for (double pm : pairs) sum += pm;
  const double tau = -1.0 + 2.0 * sum / gamma[0];
  return tau > 0.0 ? std::clamp(static_cast<double>(n) / tau, 1e-12, ceiling) : ceiling;
}

}  // namespace magmcmc::oracle
