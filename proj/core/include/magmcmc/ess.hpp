#pragma once

#include <optional>
#include <span>
#include <vector>

#include "magmcmc/types.hpp"

namespace magmcmc {

// Effective sample size n / (1 + 2 sum_t rho_t) with Geyer's initial
// monotone positive sequence truncation. Values above n are allowed (negative
// autocorrelation) and the result is clamped to [1e-12, ceiling].
// Throws SeriesTooShort below 10 points and DegenerateSeries for a constant
// series.
double effective_sample_size(std::span<const double> series, double ceiling);

struct EssReport {
  // nullopt for coordinates that are constant (e.g. pinned by a constraint).
  std::vector<std::optional<double>> per_coordinate;
  double min = 0.0;
  double mean = 0.0;
  double min_per_second = 0.0;
  double mean_per_second = 0.0;
  double ceiling = 0.0;
  double wall_time_seconds = 0.0;
};

// Per-column ESS of a samples x dim matrix. min/mean range over the
// non-constant coordinates and are 0 when there are none.
EssReport ess_report(const Matrix& samples, double ceiling, double wall_time_seconds = 0.0);

}  // namespace magmcmc
