#include "magmcmc/checks.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>

#include "magmcmc/errors.hpp"
#include "magmcmc/integrator.hpp"
#include "magmcmc/magnetic.hpp"

namespace magmcmc {

std::string format_report_line(const CheckReport& report) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%s %.6e %.6e %s", report.name.c_str(), report.max_residual,
                report.threshold, report.passed ? "PASS" : "FAIL");
  return buf;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

CheckReport finish(std::string name, double residual, double threshold, std::string details) {
  CheckReport r;
  r.name = std::move(name);
  r.max_residual = residual;
  r.threshold = threshold;
  r.passed = residual <= threshold;  // false for NaN
  r.details = std::move(details);
  return r;
}

double draw_step(Rng& rng, const CheckOptions& options) {
  return options.eps_min + (options.eps_max - options.eps_min) * rng.uniform();
}

bool is_constrained(const CheckSubject& subject) {
  return subject.manifold && subject.manifold->constraint_dim() > 0;
}

Vector flatten(const PhaseState& z) {
  Vector out(2 * z.dim());
  out << z.q, z.p;
  return out;
}

PhaseState unflatten(const Vector& v) {
  const Index m = v.size() / 2;
  return {v.head(m), v.tail(m)};
}

Matrix magnetic_form(const Matrix& field) {
  const Index m = field.rows();
  Matrix j = Matrix::Zero(2 * m, 2 * m);
  j.topLeftCorner(m, m) = field;
  j.topRightCorner(m, m) = Matrix::Identity(m, m);
  j.bottomLeftCorner(m, m) = -Matrix::Identity(m, m);
  return j;
}

// u^T J_mag v for phase-space tangent vectors.
double two_form(const Matrix& field, const PhaseState& u, const PhaseState& v) {
  return u.q.dot(field * v.q) + u.q.dot(v.p) - u.p.dot(v.q);
}

PhaseState scaled_difference(const PhaseState& a, const PhaseState& b, double scale) {
  return {(a.q - b.q) * scale, (a.p - b.p) * scale};
}

double euclidean_symplectic_residual(const CheckInstance& inst, double eps, double h) {
  const Vector z = flatten(inst.state);
  const Index n = z.size();
  Matrix jac(n, n);
  for (Index j = 0; j < n; ++j) {
    Vector plus = z, minus = z;
    plus(j) += h;
    minus(j) -= h;
    jac.col(j) = (flatten(inst.integrate(unflatten(plus), eps, 1)) -
                  flatten(inst.integrate(unflatten(minus), eps, 1))) /
                 (2.0 * h);
  }
  const Matrix form = magnetic_form(inst.field);
  return max_abs(Matrix(jac.transpose() * form * jac - form));
}

// Tangent vector of T*M at z along the curve s -> (R(q + s a), P(R(q + s a), p + s b)).
struct TangentCurve {
  const Manifold& manifold;
  PhaseState base;
  Vector a;
  Vector b;

  PhaseState at(double s) const {
    Vector q = manifold.retract(base.q + s * a);
    Vector p = manifold.project(q, base.p + s * b);
    return {std::move(q), std::move(p)};
  }
};

double manifold_symplectic_residual(const CheckSubject& subject, const CheckInstance& inst,
                                    double eps, double h, Rng& rng) {
  const Manifold& manifold = *subject.manifold;
  const Index m = manifold.ambient_dim();
  auto make_curve = [&]() {
    Vector a = manifold.project(inst.state.q, rng.normal_vector(m));
    a /= std::max(a.norm(), 1e-300);
    Vector b = rng.normal_vector(m);
    b /= b.norm();
    return TangentCurve{manifold, inst.state, std::move(a), std::move(b)};
  };
  const TangentCurve cu = make_curve();
  const TangentCurve cv = make_curve();
  const double inv = 1.0 / (2.0 * h);
  const PhaseState u = scaled_difference(cu.at(h), cu.at(-h), inv);
  const PhaseState v = scaled_difference(cv.at(h), cv.at(-h), inv);
  const PhaseState du =
      scaled_difference(inst.integrate(cu.at(h), eps, 1), inst.integrate(cu.at(-h), eps, 1), inv);
  const PhaseState dv =
      scaled_difference(inst.integrate(cv.at(h), eps, 1), inst.integrate(cv.at(-h), eps, 1), inv);
  return std::abs(two_form(inst.field, du, dv) - two_form(inst.field, u, v));
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

CheckReport check_reversibility(const CheckSubject& subject, const CheckOptions& options) {
  Rng rng(derive_seed(options.seed, 1));
  double worst = 0.0;
  std::string details;
  for (int c = 0; c < options.cases; ++c) {
    const CheckInstance inst = subject.draw(rng);
    const double eps = draw_step(rng, options);
    try {
      const PhaseState fwd = inst.integrate(inst.state, eps, options.reversibility_steps);
      const PhaseState back = inst.integrate(fwd, -eps, options.reversibility_steps);
      worst = std::max(worst, max_abs_diff(back, inst.state));
    } catch (const Error& e) {
      worst = kInf;
      details = std::string("case failed: ") + e.what();
      break;
    }
  }
  return finish(subject.name + "/reversibility", worst, options.thresholds.reversibility,
                details.empty() ? std::to_string(options.cases) + " cases" : details);
}

CheckReport check_symplectic(const CheckSubject& subject, const CheckOptions& options) {
  Rng rng(derive_seed(options.seed, 2));
  const bool constrained = is_constrained(subject);
  const double threshold = constrained ? options.thresholds.manifold_symplectic
                                       : options.thresholds.euclidean_symplectic;
  const int cases = std::max(1, options.cases / 2);
  double worst = 0.0;
  std::string details = constrained ? "restricted 2-form on tangent pairs" : "J^T J_mag J - J_mag";
  for (int c = 0; c < cases; ++c) {
    const CheckInstance inst = subject.draw(rng);
    const double eps = draw_step(rng, options);
    try {
      const double r = constrained ? manifold_symplectic_residual(subject, inst, eps, options.fd_step, rng)
                                   : euclidean_symplectic_residual(inst, eps, options.fd_step);
      if (!std::isfinite(r)) throw NumericalFailure("non-finite 2-form residual");
      worst = std::max(worst, r);
    } catch (const Error& e) {
      worst = kInf;
      details = std::string("case failed: ") + e.what();
      break;
    }
  }
  return finish(subject.name + "/symplectic", worst, threshold, details);
}

CheckReport check_order(const CheckSubject& subject, const CheckOptions& options) {
  Rng rng(derive_seed(options.seed, 3));
  const double center = 0.5 * (options.thresholds.order_slope_min + options.thresholds.order_slope_max);
  const double half_width =
      0.5 * (options.thresholds.order_slope_max - options.thresholds.order_slope_min);
  double worst = 0.0;
  std::string details;
  for (int c = 0; c < options.order_cases; ++c) {
    const CheckInstance inst = subject.draw(rng);
    const double h0 = inst.hamiltonian(inst.state);
    std::vector<double> log_eps, log_err;
    try {
      for (double eps : options.order_ladder) {
        const int steps = std::max(1, static_cast<int>(std::lround(options.order_horizon / eps)));
        PhaseState z = inst.state;
        double err = 0.0;
        for (int s = 0; s < steps; ++s) {
          z = inst.integrate(z, eps, 1);
          err = std::max(err, std::abs(inst.hamiltonian(z) - h0));
        }
        log_eps.push_back(std::log(eps));
        log_err.push_back(std::log(err));
      }
    } catch (const Error& e) {
      worst = kInf;
      details = std::string("case failed: ") + e.what();
      break;
    }
    const double slope = fit_slope(log_eps, log_err);
    const double r = std::isfinite(slope) ? std::abs(slope - center) : kInf;
    if (!(r <= worst)) worst = r;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%sslope=%.4f", details.empty() ? "" : " ", slope);
    details += buf;
  }
  return finish(subject.name + "/order", worst, half_width, details);
}

CheckReport check_feasibility(const CheckSubject& subject, const CheckOptions& options) {
  Rng rng(derive_seed(options.seed, 4));
  const CheckInstance inst = subject.draw(rng);
  double worst = 0.0;
  std::string details = std::to_string(options.feasibility_steps) + " steps";
  if (is_constrained(subject)) {
    const Manifold& manifold = *subject.manifold;
    PhaseState z = inst.state;
    try {
      for (int s = 0; s < options.feasibility_steps; ++s) {
        z = inst.integrate(z, options.feasibility_eps, 1);
        const double r = std::max(manifold.constraint_residual(z.q), manifold.cotangent_residual(z.q, z.p));
        if (!(r <= worst)) worst = r;
      }
    } catch (const Error& e) {
      worst = kInf;
      details = std::string("failed: ") + e.what();
    }
  }
  return finish(subject.name + "/feasibility", worst, options.thresholds.feasibility, details);
}

// ---------------------------------------------------------------------------

namespace {

Matrix random_spd(Index dim, Rng& rng) {
  const Matrix b = rng.normal_matrix(dim, dim);
  return b * b.transpose() / static_cast<double>(dim) + 0.5 * Matrix::Identity(dim, dim);
}

PhaseState faulty_step(const PhaseState& z, const GradientOracle& grad,
                       const SpectralFactorization& fact, double eps, Fault fault) {
  switch (fault) {
    case Fault::kNone: return euclidean_magnetic_step(z, grad, fact, eps);
    case Fault::kSkipSecondKick: return flow_kinetic(flow_potential(z, grad, eps), fact, eps);
    case Fault::kBrokenKinetic: {
      PhaseState half = flow_potential(z, grad, eps);
      half.p = fact.rotate(half.p, eps);
      half.q += eps * half.p;
      return flow_potential(half, grad, eps);
    }
  }
  return z;
}

}  // namespace

CheckSubject euclidean_magnetic_subject(Index dim, Fault fault) {
  CheckSubject s;
  s.name = fault == Fault::kNone ? "euclidean_magnetic" : "euclidean_magnetic[fault]";
  s.manifold = make_euclidean(dim);
  s.draw = [dim, fault](Rng& rng) {
    const Matrix hess = random_spd(dim, rng);
    auto field = std::make_shared<const MagneticField>(skew_from_gaussian(dim, rng));
    CheckInstance inst;
    inst.state = {rng.normal_vector(dim), rng.normal_vector(dim)};
    inst.field = field->matrix();
    const GradientOracle grad = [hess](const Vector& q) { return Vector(hess * q); };
    inst.integrate = [grad, field, fault](const PhaseState& z, double eps, int steps) {
      PhaseState out = z;
      for (int i = 0; i < steps; ++i) out = faulty_step(out, grad, field->factorization(), eps, fault);
      return out;
    };
    inst.hamiltonian = [hess](const PhaseState& z) {
      return 0.5 * z.q.dot(hess * z.q) + 0.5 * z.p.squaredNorm();
    };
    return inst;
  };
  return s;
}

CheckSubject canonical_leapfrog_subject(Index dim) {
  CheckSubject s;
  s.name = "canonical_leapfrog";
  s.manifold = make_euclidean(dim);
  s.draw = [dim](Rng& rng) {
    const Matrix hess = random_spd(dim, rng);
    CheckInstance inst;
    inst.state = {rng.normal_vector(dim), rng.normal_vector(dim)};
    inst.field = Matrix::Zero(dim, dim);
    inst.integrate = [hess](const PhaseState& z, double eps, int steps) {
      Vector q = z.q, p = z.p;
      for (int i = 0; i < steps; ++i) {
        p -= 0.5 * eps * (hess * q);
        q += eps * p;
        p -= 0.5 * eps * (hess * q);
      }
      return PhaseState{q, p};
    };
    inst.hamiltonian = [hess](const PhaseState& z) {
      return 0.5 * z.q.dot(hess * z.q) + 0.5 * z.p.squaredNorm();
    };
    return inst;
  };
  return s;
}

CheckSubject constrained_subject(std::string name, TargetPtr target, double field_scale,
                                 double momentum_scale) {
  CheckSubject s;
  s.name = std::move(name);
  s.manifold = target->manifold_ptr();
  s.draw = [target, field_scale, momentum_scale](Rng& rng) {
    const Manifold& manifold = target->manifold();
    const Index m = target->dim();
    CheckInstance inst;
    inst.state.q = manifold.retract(target->default_initial_point() + 0.1 * rng.normal_vector(m));
    inst.state.p = momentum_scale * sample_momentum(manifold, inst.state.q, rng);
    auto field = std::make_shared<const MagneticField>(
        validate_skew(field_scale * skew_from_gaussian(m, rng).matrix()));
    inst.field = field->matrix();
    inst.integrate = [target, field](const PhaseState& z, double eps, int steps) {
      IntegratorParams params;
      params.step_size = eps;
      params.num_steps = steps;
      return integrate(z, *target, field->factorization(), params).state;
    };
    inst.hamiltonian = [target](const PhaseState& z) { return target->hamiltonian(z); };
    return inst;
  };
  return s;
}

namespace {

std::shared_ptr<FunctionTarget> matrix_fisher_target(ManifoldPtr manifold, Index n, Index r,
                                                     const Matrix& weight) {
  const Vector w = Eigen::Map<const Vector>(weight.data(), weight.size());
  const Vector init = manifold->retract(Vector::Ones(n * r) + w);
  return std::make_shared<FunctionTarget>(
      manifold, "matrix_fisher", [w](const Vector& q) { return -w.dot(q); },
      [w](const Vector&) { return Vector(-w); }, init);
}

std::vector<CheckSubject> constrained_catalog(std::uint64_t seed) {
  Rng rng(derive_seed(seed, 100));
  std::vector<CheckSubject> out;
  const BvmfProblem bvmf = random_bvmf_problem(6, rng);
  out.push_back(constrained_subject("sphere_bvmf", bvmf_target(bvmf.a, bvmf.b)));
  out.push_back(constrained_subject("affine_gaussian", default_linear_gaussian_target()));
  out.push_back(constrained_subject(
      "stiefel_fisher", matrix_fisher_target(make_stiefel(4, 2), 4, 2, rng.normal_matrix(4, 2))));
  out.push_back(constrained_subject(
      "so3_fisher", matrix_fisher_target(make_special_orthogonal(3), 3, 3, rng.normal_matrix(3, 3))));
  Vector alpha = Vector::Constant(3, 2.0);
  out.push_back(constrained_subject("simplex_sphere",
                                    simplex_sphere_target(alpha, {Game{{0}, {1, 2}, true}}), 1.0, 0.3));
  const Matrix graph = synthetic_eigenmodel_graph(8, 2, rng);
  out.push_back(constrained_subject("network_eigenmodel",
                                    network_eigenmodel_target(graph, 2, 230.0, 100.0), 1.0, 0.3));
  return out;
}

}  // namespace

std::vector<CheckReport> run_check_suite(CheckSuite suite, const CheckOptions& options, Fault fault) {
  std::vector<CheckReport> reports;
  auto run_all = [&](const CheckSubject& s, bool order) {
    reports.push_back(check_reversibility(s, options));
    reports.push_back(check_symplectic(s, options));
    if (order) reports.push_back(check_order(s, options));
    reports.push_back(check_feasibility(s, options));
  };
  if (suite == CheckSuite::kCore || suite == CheckSuite::kAll) {
    run_all(euclidean_magnetic_subject(4, fault), true);
    run_all(canonical_leapfrog_subject(3), true);
  }
  if (suite == CheckSuite::kConstrained || suite == CheckSuite::kAll) {
    for (const auto& s : constrained_catalog(options.seed)) {
      const bool order = s.name == "sphere_bvmf";
      run_all(s, order);
    }
  }
  return reports;
}

}  // namespace magmcmc
