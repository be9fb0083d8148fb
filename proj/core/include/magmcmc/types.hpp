#pragma once

#include <Eigen/Dense>

namespace magmcmc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Position and momentum in ambient coordinates.
struct PhaseState {
  Vector q;
  Vector p;

  Index dim() const { return q.size(); }
};

inline double max_abs(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }
inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline double max_abs_diff(const PhaseState& a, const PhaseState& b) {
  return std::max(max_abs(Vector(a.q - b.q)), max_abs(Vector(a.p - b.p)));
}

}  // namespace magmcmc
