#include "magmcmc/manifold.hpp"

#include <numeric>

#include <Eigen/SVD>

#include "magmcmc/errors.hpp"

namespace magmcmc {

namespace {

class EuclideanManifold final : public Manifold {
 public:
  explicit EuclideanManifold(Index dim) : dim_(dim) {}

  Index ambient_dim() const override { return dim_; }
  Index constraint_dim() const override { return 0; }
  std::string name() const override { return "euclidean(" + std::to_string(dim_) + ")"; }
  Vector constraint(const Vector&) const override { return Vector(0); }
  Matrix jacobian(const Vector&) const override { return Matrix(0, dim_); }
  Vector project(const Vector&, const Vector& v) const override { return v; }
  Vector retract(const Vector& x) const override { return x; }

 private:
  Index dim_;
};

class AffineManifold final : public Manifold {
 public:
  AffineManifold(Matrix a, Vector b) : a_(std::move(a)), b_(std::move(b)) {
    if (a_.rows() != b_.size()) throw Error("affine constraint: A and b have mismatched rows");
    if (a_.rows() > a_.cols()) throw RankDeficient("affine constraint has more rows than columns");
    Eigen::JacobiSVD<Matrix> svd(a_);
    const double smallest = svd.singularValues().minCoeff();
    if (!(smallest > 1e-10)) throw RankDeficient("affine constraint matrix is rank deficient");
    gram_.compute(a_ * a_.transpose());
  }

  Index ambient_dim() const override { return a_.cols(); }
  Index constraint_dim() const override { return a_.rows(); }
  std::string name() const override { return "affine"; }
  Vector constraint(const Vector& q) const override { return a_ * q - b_; }
  Matrix jacobian(const Vector&) const override { return a_; }
  Vector project(const Vector&, const Vector& v) const override {
    return v - a_.transpose() * gram_.solve(a_ * v);
  }
  Vector retract(const Vector& x) const override {
    return x - a_.transpose() * gram_.solve(a_ * x - b_);
  }

 private:
  Matrix a_;
  Vector b_;
  Eigen::LLT<Matrix> gram_;
};

class SphereManifold final : public Manifold {
 public:
  explicit SphereManifold(Index dim) : dim_(dim) {}

  Index ambient_dim() const override { return dim_; }
  Index constraint_dim() const override { return 1; }
  std::string name() const override { return "sphere(" + std::to_string(dim_ - 1) + ")"; }
  Vector constraint(const Vector& q) const override {
    return Vector::Constant(1, q.squaredNorm() - 1.0);
  }
  Matrix jacobian(const Vector& q) const override { return 2.0 * q.transpose(); }
  // Divides by q^T q so the result is exactly cotangent even when q is only
  // feasible to tolerance.
  Vector project(const Vector& q, const Vector& v) const override {
    return v - (q.dot(v) / q.squaredNorm()) * q;
  }
  Vector retract(const Vector& x) const override { return x.normalized(); }

 private:
  Index dim_;
};

class StiefelManifold : public Manifold {
 public:
  StiefelManifold(Index n, Index r) : n_(n), r_(r) {}

  Index ambient_dim() const override { return n_ * r_; }
  Index constraint_dim() const override { return r_ * (r_ + 1) / 2; }
  std::string name() const override {
    return "stiefel(" + std::to_string(n_) + "," + std::to_string(r_) + ")";
  }

  Vector constraint(const Vector& q) const override {
    const Eigen::Map<const Matrix> mat(q.data(), n_, r_);
    const Matrix gram = mat.transpose() * mat;
    Vector out(constraint_dim());
    Index row = 0;
    for (Index j = 0; j < r_; ++j)
      for (Index i = 0; i <= j; ++i) out(row++) = gram(i, j) - (i == j ? 1.0 : 0.0);
    return out;
  }

  Matrix jacobian(const Vector& q) const override {
    const Eigen::Map<const Matrix> mat(q.data(), n_, r_);
    Matrix jac = Matrix::Zero(constraint_dim(), ambient_dim());
    Index row = 0;
    for (Index j = 0; j < r_; ++j) {
      for (Index i = 0; i <= j; ++i) {
        // d(q_i^T q_j) = q_i^T dq_j + q_j^T dq_i
        jac.row(row).segment(j * n_, n_) += mat.col(i).transpose();
        jac.row(row).segment(i * n_, n_) += mat.col(j).transpose();
        ++row;
      }
    }
    return jac;
  }

  Vector project(const Vector& q, const Vector& v) const override {
    const Eigen::Map<const Matrix> mat(q.data(), n_, r_);
    const Eigen::Map<const Matrix> vel(v.data(), n_, r_);
    const Matrix cross = mat.transpose() * vel;
    Matrix out = vel - mat * (0.5 * (cross + cross.transpose()));
    return Eigen::Map<const Vector>(out.data(), out.size());
  }

  Vector retract(const Vector& x) const override {
    const Eigen::Map<const Matrix> mat(x.data(), n_, r_);
    Matrix out = polar_retract(mat);
    return Eigen::Map<const Vector>(out.data(), out.size());
  }

 protected:
  Index n_;
  Index r_;
};

class SpecialOrthogonalManifold final : public StiefelManifold {
 public:
  explicit SpecialOrthogonalManifold(Index n) : StiefelManifold(n, n) {}

  std::string name() const override { return "so(" + std::to_string(n_) + ")"; }

  Vector retract(const Vector& x) const override {
    const Eigen::Map<const Matrix> mat(x.data(), n_, n_);
    Matrix out = polar_retract(mat);
    if (out.determinant() < 0.0) out.col(n_ - 1) *= -1.0;
    return Eigen::Map<const Vector>(out.data(), out.size());
  }

  void validate_initial_point(const Vector& q) const override {
    const Eigen::Map<const Matrix> mat(q.data(), n_, n_);
    if (mat.determinant() < 0.0) throw WrongComponent("initial point has negative determinant");
  }
};

}  // namespace

double Manifold::cotangent_residual(const Vector& q, const Vector& p) const {
  if (constraint_dim() == 0) return 0.0;
  return max_abs(Vector(jacobian(q) * p));
}

Vector Manifold::project(const Vector& q, const Vector& v) const {
  if (constraint_dim() == 0) return v;
  return generic_cotangent_projection(jacobian(q), v);
}

Vector generic_cotangent_projection(const Matrix& g, const Vector& v) {
  if (g.rows() == 0) return v;
  const Matrix gram = g * g.transpose();
  Eigen::LDLT<Matrix> solver(gram);
  if (solver.info() != Eigen::Success) throw RankDeficient("constraint Jacobian is rank deficient");
  return v - g.transpose() * solver.solve(g * v);
}

ManifoldPtr make_euclidean(Index dim) {
  if (dim < 1) throw Error("euclidean block needs dimension >= 1");
  return std::make_shared<EuclideanManifold>(dim);
}

ManifoldPtr make_affine(const Matrix& a, const Vector& b) {
  return std::make_shared<AffineManifold>(a, b);
}

ManifoldPtr make_sphere(Index dim) {
  if (dim < 2) throw Error("sphere needs ambient dimension >= 2");
  return std::make_shared<SphereManifold>(dim);
}

ManifoldPtr make_stiefel(Index n, Index r) {
  if (r < 1 || n < r) throw Error("stiefel manifold needs n >= r >= 1");
  return std::make_shared<StiefelManifold>(n, r);
}

ManifoldPtr make_special_orthogonal(Index n) {
  if (n < 2) throw Error("special orthogonal group needs n >= 2");
  return std::make_shared<SpecialOrthogonalManifold>(n);
}

ManifoldPtr make_product(std::vector<ManifoldPtr> blocks) {
  return std::make_shared<ProductManifold>(std::move(blocks));
}

ProductManifold::ProductManifold(std::vector<ManifoldPtr> blocks) : blocks_(std::move(blocks)) {
  if (blocks_.empty()) throw Error("product manifold needs at least one block");
  for (const auto& b : blocks_) {
    offsets_.push_back(ambient_dim_);
    constraint_offsets_.push_back(constraint_dim_);
    ambient_dim_ += b->ambient_dim();
    constraint_dim_ += b->constraint_dim();
  }
}

std::string ProductManifold::name() const {
  std::string out;
  for (const auto& b : blocks_) out += (out.empty() ? "" : " x ") + b->name();
  return out;
}

Vector ProductManifold::constraint(const Vector& q) const {
  Vector out(constraint_dim_);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const auto& b = *blocks_[i];
    if (b.constraint_dim() == 0) continue;
    out.segment(constraint_offsets_[i], b.constraint_dim()) =
        b.constraint(q.segment(offsets_[i], b.ambient_dim()));
  }
  return out;
}

Matrix ProductManifold::jacobian(const Vector& q) const {
  Matrix out = Matrix::Zero(constraint_dim_, ambient_dim_);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const auto& b = *blocks_[i];
    if (b.constraint_dim() == 0) continue;
    out.block(constraint_offsets_[i], offsets_[i], b.constraint_dim(), b.ambient_dim()) =
        b.jacobian(q.segment(offsets_[i], b.ambient_dim()));
  }
  return out;
}

Vector ProductManifold::project(const Vector& q, const Vector& v) const {
  Vector out(ambient_dim_);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const auto& b = *blocks_[i];
    out.segment(offsets_[i], b.ambient_dim()) =
        b.project(q.segment(offsets_[i], b.ambient_dim()), v.segment(offsets_[i], b.ambient_dim()));
  }
  return out;
}

Vector ProductManifold::retract(const Vector& x) const {
  Vector out(ambient_dim_);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const auto& b = *blocks_[i];
    out.segment(offsets_[i], b.ambient_dim()) = b.retract(x.segment(offsets_[i], b.ambient_dim()));
  }
  return out;
}

void ProductManifold::validate_initial_point(const Vector& q) const {
  for (std::size_t i = 0; i < blocks_.size(); ++i)
    blocks_[i]->validate_initial_point(q.segment(offsets_[i], blocks_[i]->ambient_dim()));
}

Matrix polar_retract(const Matrix& x) {
  Eigen::JacobiSVD<Matrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().transpose();
}

Vector sample_momentum(const Manifold& manifold, const Vector& q, Rng& rng) {
  return manifold.project(q, rng.normal_vector(manifold.ambient_dim()));
}

}  // namespace magmcmc
