#include "magmcmc/ess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "magmcmc/errors.hpp"

namespace magmcmc {

namespace {

bool is_degenerate(double variance, double mean) {
  return !(variance > 1e-24 * std::max(1.0, mean * mean));
}

}  // namespace

double effective_sample_size(std::span<const double> series, double ceiling) {
  const std::size_t n = series.size();
  if (n < 10) throw SeriesTooShort(n);
  double mean = 0.0;
  for (double x : series) mean += x;
  mean /= static_cast<double>(n);
  std::vector<double> centered(n);
  for (std::size_t i = 0; i < n; ++i) centered[i] = series[i] - mean;

  auto autocov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += centered[i] * centered[i + lag];
    return s / static_cast<double>(n);
  };
  const double gamma0 = autocov(0);
  if (is_degenerate(gamma0, mean)) throw DegenerateSeries();

  // Pair sums Gamma_k = rho_{2k} + rho_{2k+1}, stopped at the first
  // non-positive pair and forced to be non-increasing.
  double pair_sum = 0.0;
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    double pair = (autocov(2 * k) + autocov(2 * k + 1)) / gamma0;
    if (pair <= 0.0) break;
    pair = std::min(pair, previous);
    previous = pair;
    pair_sum += pair;
  }
  const double tau = -1.0 + 2.0 * pair_sum;
  const double ess = tau > 0.0 ? static_cast<double>(n) / tau : ceiling;
  return std::clamp(ess, 1e-12, ceiling);
}

EssReport ess_report(const Matrix& samples, double ceiling, double wall_time_seconds) {
  EssReport report;
  report.ceiling = ceiling;
  report.wall_time_seconds = wall_time_seconds;
  double sum = 0.0;
  double lowest = std::numeric_limits<double>::infinity();
  int counted = 0;
  for (Index j = 0; j < samples.cols(); ++j) {
    const Vector column = samples.col(j);
    try {
      const double ess = effective_sample_size(std::span<const double>(column.data(), column.size()), ceiling);
      report.per_coordinate.emplace_back(ess);
      sum += ess;
      lowest = std::min(lowest, ess);
      ++counted;
    } catch (const DegenerateSeries&) {
      report.per_coordinate.emplace_back(std::nullopt);
    }
  }
  if (counted > 0) {
    report.min = lowest;
    report.mean = sum / counted;
  }
  if (wall_time_seconds > 0.0) {
    report.min_per_second = report.min / wall_time_seconds;
    report.mean_per_second = report.mean / wall_time_seconds;
  }
  return report;
}

}  // namespace magmcmc
