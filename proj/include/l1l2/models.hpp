#pragma once

#include <Eigen/Dense>

#include <memory>
#include <string_view>
#include <variant>

namespace l1l2 {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Dense m x n sensing matrix with a thin QR factorization of its transpose.
///
/// Construction verifies full row rank: the smallest |R_ii| of the thin QR
/// of A^T must exceed 1e-10 times the largest. Instances are immutable after
/// construction and may be shared across threads.
class SensingMatrix {
 public:
  static constexpr double kRankTolerance = 1e-10;

  explicit SensingMatrix(Matrix entries);

  Eigen::Index rows() const { return entries_.rows(); }
  Eigen::Index cols() const { return entries_.cols(); }
  const Matrix& entries() const { return entries_; }

  /// Orthonormal n x m factor Q with A^T = Q R.
  const Matrix& q_factor() const { return q_; }
  /// Upper-triangular m x m factor R with A^T = Q R.
  const Matrix& r_factor() const { return r_; }

  /// min |R_ii| / max |R_ii|.
  double rank_ratio() const { return rank_ratio_; }

  Vector apply(const Vector& x) const;
  Vector apply_transpose(const Vector& y) const;

  /// A^+ b = Q (R^T)^{-1} b.
  Vector least_norm(const Vector& b) const;

  /// Euclidean projection of v onto {x : A x = b}.
  Vector project_affine(const Vector& v, const Vector& b) const;

 private:
  Matrix entries_;
  Matrix q_;
  Matrix r_;
  double rank_ratio_ = 0.0;
};

using SensingMatrixPtr = std::shared_ptr<const SensingMatrix>;

/// sum_i log(1 + y_i^2 / gamma^2)
double lorentzian_norm(const Vector& y, double gamma);

/// Gradient of lorentzian_norm: 2 y_i / (gamma^2 + y_i^2).
Vector lorentzian_grad(const Vector& y, double gamma);

/// Keeps the r largest-magnitude entries of y (ties: lowest index wins).
Vector project_sparse(const Vector& y, int r);

/// Squared distance from y to {z : ||z||_0 <= r}.
double dist_sq_sparse(const Vector& y, int r);

struct LeastSquares {
  double sigma;
};

struct Lorentzian {
  double sigma;
  double gamma;
};

struct RobustCS {
  double sigma;
  int outliers;
};

enum class ModelKind { least_squares, lorentzian, robust_cs };

std::string_view to_string(ModelKind kind);

/// Constraint q(x) = P1(x) - P2(x) <= 0 with shared data (A, b, sigma).
///
///   least squares: q = ||Ax - b||^2 - sigma^2
///   Lorentzian:    q = ||Ax - b||_{LL2,gamma} - sigma
///   robust CS:     q = dist^2(Ax - b, S) - sigma^2,  S = {z : ||z||_0 <= r}
///
/// For robust CS, P1 = ||Ax - b||^2 and P2 = ||Ax - b||^2 - dist^2(Ax - b, S);
/// the other two variants have P2 = 0. Every factory checks q(0) > 0.
class ConstraintModel {
 public:
  using Variant = std::variant<LeastSquares, Lorentzian, RobustCS>;

  static ConstraintModel least_squares(SensingMatrixPtr a, Vector b, double sigma);
  static ConstraintModel lorentzian(SensingMatrixPtr a, Vector b, double sigma,
                                    double gamma);
  static ConstraintModel robust_cs(SensingMatrixPtr a, Vector b, double sigma,
                                   int outliers);

  ModelKind kind() const;
  const Variant& variant() const { return variant_; }
  const SensingMatrix& matrix() const { return *a_; }
  const SensingMatrixPtr& matrix_ptr() const { return a_; }
  const Vector& b() const { return b_; }
  double sigma() const;
  Eigen::Index dim() const { return a_->cols(); }

  /// A x - b
  Vector residual(const Vector& x) const;

  /// q expressed through the residual y = A x - b.
  double q_from_residual(const Vector& y) const;
  double p1_from_residual(const Vector& y) const;
  double p2_from_residual(const Vector& y) const;

  /// grad P1(x) - zeta with zeta the selected element of dP2(x), expressed
  /// through y = A x - b.
  Vector linearization_from_residual(const Vector& y) const;

 private:
  ConstraintModel(SensingMatrixPtr a, Vector b, Variant v);
  void check_dim(const Vector& x) const;

  SensingMatrixPtr a_;
  Vector b_;
  Variant variant_;
};

double q_value(const ConstraintModel& model, const Vector& x);
Vector grad_p1(const ConstraintModel& model, const Vector& x);
Vector subgrad_p2(const ConstraintModel& model, const Vector& x);
bool is_feasible(const ConstraintModel& model, const Vector& x, double tol);

}  // namespace l1l2
