#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "magmcmc/manifold.hpp"
#include "magmcmc/random.hpp"
#include "magmcmc/target.hpp"
#include "magmcmc/types.hpp"

namespace magmcmc {

// Pass/fail thresholds for the structural checks. Kept as data so a run is
// reproducible from (thresholds, seed).
struct CheckThresholds {
  double reversibility = 1e-8;
  double euclidean_symplectic = 1e-6;
  double manifold_symplectic = 1e-5;
  double order_slope_min = 1.8;
  double order_slope_max = 2.2;
  double feasibility = 1e-8;
};

struct CheckOptions {
  std::uint64_t seed = 0;
  int cases = 20;
  double eps_min = 1e-3;
  double eps_max = 1e-1;
  int reversibility_steps = 10;
  std::vector<double> order_ladder = {0.2, 0.1, 0.05, 0.025, 0.0125};
  double order_horizon = 1.0;
  int order_cases = 3;
  int feasibility_steps = 1000;
  double feasibility_eps = 0.01;
  double fd_step = 1e-5;
  CheckThresholds thresholds;
};

struct CheckReport {
  std::string name;
  double max_residual = 0.0;
  double threshold = 0.0;
  bool passed = false;
  std::string details;
};

// "name residual threshold PASS|FAIL"
std::string format_report_line(const CheckReport& report);

// A concrete integrator applied to one randomly drawn problem.
struct CheckInstance {
  PhaseState state;  // feasible starting point
  Matrix field;      // L of the magnetic 2-form
  // steps applications of the one-step map with signed step eps.
  std::function<PhaseState(const PhaseState&, double eps, int steps)> integrate;
  std::function<double(const PhaseState&)> hamiltonian;
};

struct CheckSubject {
  std::string name;
  ManifoldPtr manifold;  // constraint_dim() == 0 for Euclidean subjects
  std::function<CheckInstance(Rng&)> draw;
};

// Worst ||Phi(Phi(z; eps); -eps) - z||_inf over random cases.
CheckReport check_reversibility(const CheckSubject& subject, const CheckOptions& options);
// Euclidean subjects: ||J^T J_mag J - J_mag||_max of the central-difference
// Jacobian. Constrained subjects: change of the 2-form u^T J_mag v between
// tangent pairs of T*M and their finite-difference images.
CheckReport check_symplectic(const CheckSubject& subject, const CheckOptions& options);
// Log-log slope of the worst energy error over a fixed horizon against the
// step-size ladder.
CheckReport check_order(const CheckSubject& subject, const CheckOptions& options);
// Worst ||g(q)||_inf and ||G(q) p||_inf along a long trajectory.
CheckReport check_feasibility(const CheckSubject& subject, const CheckOptions& options);

// Deliberate defects for exercising the checks themselves.
enum class Fault {
  kNone,
  kSkipSecondKick,  // drop the closing potential half-step
  kBrokenKinetic,   // advance q with the rotated momentum instead of M(eps) p
};

// Magnetic Strang step on R^dim with a random quadratic potential and a
// random field per instance.
CheckSubject euclidean_magnetic_subject(Index dim, Fault fault = Fault::kNone);
// Independently coded leapfrog (zero field) on R^dim.
CheckSubject canonical_leapfrog_subject(Index dim);
// Manifold-constrained magnetic integrator on the target; states are drawn
// around the target's default point and fields from skew_from_gaussian
// scaled by field_scale.
CheckSubject constrained_subject(std::string name, TargetPtr target, double field_scale = 1.0,
                                 double momentum_scale = 1.0);

enum class CheckSuite { kCore, kConstrained, kAll };

// Runs reversibility, symplecticness and feasibility on every subject of the
// suite, and the order check on the Euclidean subjects and the sphere BvMF.
// Fault applies to the Euclidean subjects.
std::vector<CheckReport> run_check_suite(CheckSuite suite, const CheckOptions& options,
                                         Fault fault = Fault::kNone);

}  // namespace magmcmc
