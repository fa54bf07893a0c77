#include "l1l2/models.hpp"

#include "l1l2/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace l1l2 {

SensingMatrix::SensingMatrix(Matrix entries) : entries_(std::move(entries)) {
  const auto m = entries_.rows();
  const auto n = entries_.cols();
  if (m <= 0 || n <= 0) throw InvalidParameter("sensing matrix must be nonempty");
  if (!entries_.allFinite()) throw InvalidParameter("sensing matrix has non-finite entries");
  if (m > n) {
    throw RankDeficient("sensing matrix has more rows than columns (" + std::to_string(m) +
                        " > " + std::to_string(n) + ")");
  }

  Eigen::HouseholderQR<Matrix> qr(entries_.transpose());
  r_ = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  const Eigen::VectorXd diag = r_.diagonal().cwiseAbs();
  const double largest = diag.maxCoeff();
  rank_ratio_ = largest > 0.0 ? diag.minCoeff() / largest : 0.0;
  if (!(rank_ratio_ > kRankTolerance)) {
    throw RankDeficient("sensing matrix is not of full row rank (min/max |R_ii| = " +
                        std::to_string(rank_ratio_) + ")");
  }
  q_ = qr.householderQ() * Matrix::Identity(n, m);
}

Vector SensingMatrix::apply(const Vector& x) const { return entries_ * x; }

Vector SensingMatrix::apply_transpose(const Vector& y) const {
  return entries_.transpose() * y;
}

Vector SensingMatrix::least_norm(const Vector& b) const {
  if (b.size() != rows()) throw DimensionMismatch("least_norm: b has wrong length");
  const Vector w = r_.transpose().triangularView<Eigen::Lower>().solve(b);
  return q_ * w;
}

Vector SensingMatrix::project_affine(const Vector& v, const Vector& b) const {
  if (v.size() != cols()) throw DimensionMismatch("project_affine: v has wrong length");
  if (b.size() != rows()) throw DimensionMismatch("project_affine: b has wrong length");
  // x = v - Q (Q^T v - R^{-T} b)
  Vector w = r_.transpose().triangularView<Eigen::Lower>().solve(b);
  w = q_.transpose() * v - w;
  return v - q_ * w;
}

double lorentzian_norm(const Vector& y, double gamma) {
  if (!(gamma > 0.0)) throw InvalidParameter("lorentzian_norm: gamma must be positive");
  const double inv_g2 = 1.0 / (gamma * gamma);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) sum += std::log1p(y[i] * y[i] * inv_g2);
  return sum;
}

Vector lorentzian_grad(const Vector& y, double gamma) {
  if (!(gamma > 0.0)) throw InvalidParameter("lorentzian_grad: gamma must be positive");
  const double g2 = gamma * gamma;
  return y.unaryExpr([g2](double v) { return 2.0 * v / (g2 + v * v); });
}

namespace {

void check_sparsity(Eigen::Index m, int r) {
  if (r < 0 || r > m) {
    throw InvalidParameter("sparse projection: r = " + std::to_string(r) +
                           " outside [0, " + std::to_string(m) + "]");
  }
}

// Indices of the r largest magnitudes, ordered by (|y| desc, index asc).
std::vector<Eigen::Index> top_indices(const Vector& y, int r) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(y.size()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  auto before = [&y](Eigen::Index a, Eigen::Index b) {
    const double ma = std::abs(y[a]);
    const double mb = std::abs(y[b]);
    return ma > mb || (ma == mb && a < b);
  };
  std::partial_sort(idx.begin(), idx.begin() + r, idx.end(), before);
  idx.resize(static_cast<std::size_t>(r));
  return idx;
}

}  // namespace

Vector project_sparse(const Vector& y, int r) {
  check_sparsity(y.size(), r);
  Vector out = Vector::Zero(y.size());
  for (auto i : top_indices(y, r)) out[i] = y[i];
  return out;
}

double dist_sq_sparse(const Vector& y, int r) {
  check_sparsity(y.size(), r);
  if (r == y.size()) return 0.0;
  std::vector<bool> kept(static_cast<std::size_t>(y.size()), false);
  for (auto i : top_indices(y, r)) kept[static_cast<std::size_t>(i)] = true;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (!kept[static_cast<std::size_t>(i)]) sum += y[i] * y[i];
  }
  return sum;
}

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::least_squares: return "least_squares";
    case ModelKind::lorentzian: return "lorentzian";
    case ModelKind::robust_cs: return "robust_cs";
  }
  return "unknown";
}

ConstraintModel::ConstraintModel(SensingMatrixPtr a, Vector b, Variant v)
    : a_(std::move(a)), b_(std::move(b)), variant_(v) {
  if (!a_) throw InvalidParameter("constraint model needs a sensing matrix");
  if (b_.size() != a_->rows()) throw DimensionMismatch("b length differs from rows of A");
  if (!b_.allFinite()) throw InvalidParameter("b has non-finite entries");
  const double s = sigma();
  if (!(s > 0.0) || !std::isfinite(s)) throw InvalidParameter("sigma must be positive");
  const double q0 = q_from_residual(-b_);
  if (!(q0 > 0.0)) {
    throw InvalidParameter("constraint model requires q(0) > 0 (got " + std::to_string(q0) +
                           ")");
  }
}

ConstraintModel ConstraintModel::least_squares(SensingMatrixPtr a, Vector b, double sigma) {
  return ConstraintModel(std::move(a), std::move(b), LeastSquares{sigma});
}

ConstraintModel ConstraintModel::lorentzian(SensingMatrixPtr a, Vector b, double sigma,
                                            double gamma) {
  if (!(gamma > 0.0)) throw InvalidParameter("gamma must be positive");
  return ConstraintModel(std::move(a), std::move(b), Lorentzian{sigma, gamma});
}

ConstraintModel ConstraintModel::robust_cs(SensingMatrixPtr a, Vector b, double sigma,
                                           int outliers) {
  if (a && (outliers < 0 || outliers > a->rows())) {
    throw InvalidParameter("outlier count r must lie in [0, m]");
  }
  return ConstraintModel(std::move(a), std::move(b), RobustCS{sigma, outliers});
}

ModelKind ConstraintModel::kind() const {
  return static_cast<ModelKind>(variant_.index());
}

double ConstraintModel::sigma() const {
  return std::visit([](const auto& v) { return v.sigma; }, variant_);
}

void ConstraintModel::check_dim(const Vector& x) const {
  if (x.size() != a_->cols()) {
    throw DimensionMismatch("x has length " + std::to_string(x.size()) + ", expected " +
                            std::to_string(a_->cols()));
  }
}

Vector ConstraintModel::residual(const Vector& x) const {
  check_dim(x);
  return a_->apply(x) - b_;
}

double ConstraintModel::p1_from_residual(const Vector& y) const {
  if (const auto* lor = std::get_if<Lorentzian>(&variant_)) {
    return lorentzian_norm(y, lor->gamma);
  }
  return y.squaredNorm();
}

double ConstraintModel::p2_from_residual(const Vector& y) const {
  if (const auto* rcs = std::get_if<RobustCS>(&variant_)) {
    return y.squaredNorm() - dist_sq_sparse(y, rcs->outliers);
  }
  return 0.0;
}

double ConstraintModel::q_from_residual(const Vector& y) const {
  struct Visitor {
    const Vector& y;
    double operator()(const LeastSquares& v) const { return y.squaredNorm() - v.sigma * v.sigma; }
    double operator()(const Lorentzian& v) const { return lorentzian_norm(y, v.gamma) - v.sigma; }
    double operator()(const RobustCS& v) const {
      return dist_sq_sparse(y, v.outliers) - v.sigma * v.sigma;
    }
  };
  return std::visit(Visitor{y}, variant_);
}

Vector ConstraintModel::linearization_from_residual(const Vector& y) const {
  struct Visitor {
    const ConstraintModel& self;
    const Vector& y;
    Vector operator()(const LeastSquares&) const { return 2.0 * self.a_->apply_transpose(y); }
    Vector operator()(const Lorentzian& v) const {
      return self.a_->apply_transpose(lorentzian_grad(y, v.gamma));
    }
    Vector operator()(const RobustCS& v) const {
      return 2.0 * self.a_->apply_transpose(y - project_sparse(y, v.outliers));
    }
  };
  return std::visit(Visitor{*this, y}, variant_);
}

double q_value(const ConstraintModel& model, const Vector& x) {
  return model.q_from_residual(model.residual(x));
}

Vector grad_p1(const ConstraintModel& model, const Vector& x) {
  const Vector y = model.residual(x);
  if (const auto* lor = std::get_if<Lorentzian>(&model.variant())) {
    return model.matrix().apply_transpose(lorentzian_grad(y, lor->gamma));
  }
  return 2.0 * model.matrix().apply_transpose(y);
}

Vector subgrad_p2(const ConstraintModel& model, const Vector& x) {
  const Vector y = model.residual(x);
  if (const auto* rcs = std::get_if<RobustCS>(&model.variant())) {
    return 2.0 * model.matrix().apply_transpose(project_sparse(y, rcs->outliers));
  }
  return Vector::Zero(x.size());
}

bool is_feasible(const ConstraintModel& model, const Vector& x, double tol) {
  if (tol < 0.0) throw InvalidParameter("is_feasible: tol must be nonnegative");
  return q_value(model, x) <= tol;
}

}  // namespace l1l2
