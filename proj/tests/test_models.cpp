#include "l1l2/error.hpp"
#include "l1l2/models.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace l1l2;
using namespace l1l2::testing;

namespace {

SensingMatrixPtr identity(int n) {
  return std::make_shared<const SensingMatrix>(Matrix::Identity(n, n));
}

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

// Three models on the same random 6 x 15 instance.
struct ModelZoo {
  std::mt19937_64 rng{2024};
  SensingMatrixPtr a = random_sensing(6, 15, rng);
  Vector b = random_vector(6, rng, 3.0);
  ConstraintModel ls = ConstraintModel::least_squares(a, b, 0.3);
  ConstraintModel lor = ConstraintModel::lorentzian(a, b, 0.5, 0.5);
  ConstraintModel rcs = ConstraintModel::robust_cs(a, b, 0.3, 2);
};

}  // namespace

TEST_CASE("SensingMatrix caches an orthonormal thin QR of the transpose") {
  std::mt19937_64 rng(1);
  const Matrix entries = random_matrix(7, 20, rng);
  const SensingMatrix a(entries);
  CHECK(a.rows() == 7);
  CHECK(a.cols() == 20);
  const Matrix qtq = a.q_factor().transpose() * a.q_factor();
  CHECK((qtq - Matrix::Identity(7, 7)).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((a.q_factor() * a.r_factor() - entries.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(a.rank_ratio() > SensingMatrix::kRankTolerance);
}

TEST_CASE("SensingMatrix rejects rank-deficient and tall matrices") {
  Matrix dup(3, 5);
  dup << 1, 2, 3, 4, 5,
         1, 2, 3, 4, 5,
         0, 1, 0, 1, 0;
  CHECK_THROWS_AS(SensingMatrix{dup}, RankDeficient);
  CHECK_THROWS_AS(SensingMatrix{Matrix::Ones(4, 2)}, RankDeficient);
}

TEST_CASE("lorentzian_norm") {
  CHECK(lorentzian_norm(Vector::Zero(3), 0.02) == 0.0);
  for (double gamma : {0.02, 1.0, 7.5}) {
    CHECK(lorentzian_norm(vec({gamma}), gamma) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  }
  std::mt19937_64 rng(7);
  const Vector y = random_vector(10, rng);
  double direct = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) direct += std::log(1.0 + y[i] * y[i] / (0.02 * 0.02));
  CHECK(std::abs(lorentzian_norm(y, 0.02) - direct) <= 1e-12 * std::max(1.0, direct));
  CHECK(lorentzian_norm(vec({0.0, 1e-3}), 0.02) > 0.0);
  CHECK_THROWS_AS(lorentzian_norm(y, 0.0), InvalidParameter);
  CHECK_THROWS_AS(lorentzian_norm(y, -1.0), InvalidParameter);
}

TEST_CASE("lorentzian_grad") {
  CHECK(lorentzian_grad(Vector::Zero(4), 0.02).isZero(0.0));
  CHECK(lorentzian_grad(vec({1.0}), 1.0)[0] == doctest::Approx(1.0));
  CHECK_THROWS_AS(lorentzian_grad(Vector::Zero(2), 0.0), InvalidParameter);

  std::mt19937_64 rng(11);
  for (double gamma : {0.02, 0.3}) {
    const Vector y = random_vector(10, rng, 0.05);
    const Vector g = lorentzian_grad(y, gamma);
    const Vector fd = fd_gradient([gamma](const Vector& v) { return lorentzian_norm(v, gamma); }, y,
                                  1e-7);
    CHECK((g - fd).norm() <= 1e-6 * g.norm());
  }
}

TEST_CASE("project_sparse keeps the r largest magnitudes") {
  CHECK(project_sparse(vec({3, -1, 2}), 2) == vec({3, 0, 2}));
  CHECK(project_sparse(vec({1, -1}), 1) == vec({1, 0}));
  CHECK(project_sparse(vec({-1, 1, 1}), 2) == vec({-1, 1, 0}));
  CHECK(project_sparse(vec({4, 5, 6}), 0).isZero(0.0));
  CHECK(project_sparse(vec({4, 5, 6}), 3) == vec({4, 5, 6}));
  CHECK_THROWS_AS(project_sparse(vec({1, 2}), 3), InvalidParameter);
  CHECK_THROWS_AS(project_sparse(vec({1, 2}), -1), InvalidParameter);
}

TEST_CASE("dist_sq_sparse") {
  CHECK(dist_sq_sparse(vec({3, -1, 2}), 2) == 1.0);
  CHECK(dist_sq_sparse(vec({3, -1, 2}), 3) == 0.0);
  CHECK(dist_sq_sparse(vec({3, -1, 2}), 0) == 14.0);
  CHECK_THROWS_AS(dist_sq_sparse(vec({1}), 2), InvalidParameter);

  std::mt19937_64 rng(3);
  const Vector y = random_vector(20, rng);
  const Vector xi = project_sparse(y, 5);
  CHECK(std::abs(dist_sq_sparse(y, 5) - (y.squaredNorm() - xi.squaredNorm())) <= 1e-12);
}

TEST_CASE("sparse projection identities hold on random vectors") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> size_dist(1, 40);
  for (int trial = 0; trial < 300; ++trial) {
    const int m = size_dist(rng);
    std::uniform_int_distribution<int> r_dist(0, m);
    const int r = r_dist(rng);
    const Vector y = random_vector(m, rng, 10.0);
    const Vector xi = project_sparse(y, r);
    const double d2 = dist_sq_sparse(y, r);
    CHECK(std::abs(y.squaredNorm() - xi.squaredNorm() - d2) <= 1e-10 * std::max(1.0, y.squaredNorm()));
    CHECK(std::abs(y.dot(xi) - xi.squaredNorm()) <= 1e-12 * std::max(1.0, xi.squaredNorm()));
    CHECK((xi.array() != 0.0).count() <= r);
    for (Eigen::Index i = 0; i < m; ++i) {
      if (xi[i] != 0.0) CHECK(xi[i] == y[i]);
    }
    // No dropped entry is strictly larger than a kept one.
    double smallest_kept = std::numeric_limits<double>::infinity();
    double largest_dropped = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (xi[i] != 0.0) smallest_kept = std::min(smallest_kept, std::abs(y[i]));
      else largest_dropped = std::max(largest_dropped, std::abs(y[i]));
    }
    if (r > 0) CHECK(largest_dropped <= smallest_kept);
  }
}

TEST_CASE("constraint model construction enforces q(0) > 0") {
  const auto a = identity(2);
  CHECK_NOTHROW(ConstraintModel::least_squares(a, vec({2, 0}), 1.0));
  CHECK_THROWS_AS(ConstraintModel::least_squares(a, vec({1, 0}), 1.0), InvalidParameter);
  CHECK_THROWS_AS(ConstraintModel::least_squares(a, vec({2, 0}), 0.0), InvalidParameter);
  CHECK_THROWS_AS(ConstraintModel::least_squares(a, vec({2, 0, 1}), 1.0), DimensionMismatch);
  CHECK_THROWS_AS(ConstraintModel::lorentzian(a, vec({2, 0}), 1.0, 0.0), InvalidParameter);
  CHECK_THROWS_AS(ConstraintModel::lorentzian(a, vec({0.01, 0}), 5.0, 1.0), InvalidParameter);

  const auto a3 = identity(3);
  // dist^2(-b, S) = 1 for r = 2, so sigma must be below 1.
  CHECK_NOTHROW(ConstraintModel::robust_cs(a3, vec({3, -1, 2}), 0.5, 2));
  CHECK_THROWS_AS(ConstraintModel::robust_cs(a3, vec({3, -1, 2}), 1.0, 2), InvalidParameter);
  // r = m makes q identically -sigma^2.
  CHECK_THROWS_AS(ConstraintModel::robust_cs(a3, vec({3, -1, 2}), 0.5, 3), InvalidParameter);
  CHECK_THROWS_AS(ConstraintModel::robust_cs(a3, vec({3, -1, 2}), 0.5, 4), InvalidParameter);
  CHECK_THROWS_AS(ConstraintModel::robust_cs(a3, vec({3, -1, 2}), 0.5, -1), InvalidParameter);
}

TEST_CASE("q_value") {
  const auto ls = ConstraintModel::least_squares(identity(2), vec({2, 0}), 1.0);
  CHECK(q_value(ls, Vector::Zero(2)) == 3.0);
  CHECK(q_value(ls, vec({2, 0})) == -1.0);
  CHECK_THROWS_AS(q_value(ls, Vector::Zero(3)), DimensionMismatch);

  const auto rcs = ConstraintModel::robust_cs(identity(3), vec({3, -1, 2}), 0.5, 2);
  CHECK(q_value(rcs, Vector::Zero(3)) == doctest::Approx(1.0 - 0.25));

  ModelZoo zoo;
  const Vector x = random_vector(15, zoo.rng);
  const Vector y = zoo.a->entries() * x - zoo.b;
  CHECK(std::abs(q_value(zoo.lor, x) - (lorentzian_norm(y, 0.5) - 0.5)) <= 1e-12);
  CHECK(q_value(zoo.ls, x) == doctest::Approx(y.squaredNorm() - 0.09).epsilon(1e-14));
  CHECK(q_value(zoo.rcs, x) == doctest::Approx(dist_sq_sparse(y, 2) - 0.09).epsilon(1e-14));
}

TEST_CASE("grad_p1 and subgrad_p2 on hand instances") {
  const auto ls = ConstraintModel::least_squares(identity(2), vec({2, 0}), 1.0);
  CHECK(grad_p1(ls, Vector::Zero(2)) == vec({-4, 0}));
  CHECK(subgrad_p2(ls, vec({0.3, -7})).isZero(0.0));

  const auto rcs = ConstraintModel::robust_cs(identity(3), vec({3, -1, 2}), 0.5, 2);
  CHECK(subgrad_p2(rcs, Vector::Zero(3)) == vec({-6, 0, -4}));

  ModelZoo zoo;
  CHECK(subgrad_p2(zoo.lor, Vector::Ones(15)).isZero(0.0));
  for (int i = 0; i < 5; ++i) {
    const Vector x = random_vector(15, zoo.rng);
    CHECK((grad_p1(zoo.rcs, x) - grad_p1(zoo.ls, x)).norm() == 0.0);
  }
}

TEST_CASE("with r = m the robust subgradient equals the P1 gradient") {
  // Models with r = m are rejected at construction, so check the primitive.
  std::mt19937_64 rng(5);
  const auto a = random_sensing(4, 9, rng);
  const Vector b = random_vector(4, rng);
  const Vector x = random_vector(9, rng);
  const Vector y = a->entries() * x - b;
  CHECK(project_sparse(y, 4) == y);
  const auto ls = ConstraintModel::least_squares(a, b, 0.01);
  CHECK((2.0 * a->entries().transpose() * project_sparse(y, 4) - grad_p1(ls, x)).norm() <= 1e-12);
}

TEST_CASE("grad_p1 matches central differences of P1") {
  ModelZoo zoo;
  for (const ConstraintModel* model : {&zoo.ls, &zoo.lor, &zoo.rcs}) {
    auto p1 = [model](const Vector& v) { return model->p1_from_residual(model->residual(v)); };
    for (int trial = 0; trial < 100; ++trial) {
      const Vector x = random_vector(15, zoo.rng, 0.5);
      const Vector g = grad_p1(*model, x);
      const Vector fd = fd_gradient(p1, x);
      CHECK((g - fd).norm() <= 1e-6 * std::max(1.0, g.norm()));
    }
  }
  // For the smooth models q = P1 - const, so the q-gradient check is the same.
  for (int trial = 0; trial < 20; ++trial) {
    const Vector x = random_vector(15, zoo.rng, 0.5);
    const Vector fd = fd_gradient([&](const Vector& v) { return q_value(zoo.lor, v); }, x);
    CHECK((grad_p1(zoo.lor, x) - fd).norm() <= 1e-6 * std::max(1.0, fd.norm()));
  }
}

TEST_CASE("robust P2 subgradient inequality") {
  ModelZoo zoo;
  auto p2 = [&](const Vector& v) { return zoo.rcs.p2_from_residual(zoo.rcs.residual(v)); };
  for (int trial = 0; trial < 200; ++trial) {
    const Vector x = random_vector(15, zoo.rng);
    const Vector x2 = random_vector(15, zoo.rng);
    const double lhs = p2(x2);
    const double rhs = p2(x) + subgrad_p2(zoo.rcs, x).dot(x2 - x);
    CHECK(lhs >= rhs - 1e-10 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("Lipschitz bounds of grad_p1") {
  ModelZoo zoo;
  const double op = spectral_norm(zoo.a->entries());
  const double ls_bound = 2.0 * op * op;
  const double lor_bound = 2.0 * op * op / (0.5 * 0.5);
  for (int trial = 0; trial < 200; ++trial) {
    const Vector x = random_vector(15, zoo.rng);
    const Vector x2 = random_vector(15, zoo.rng);
    const double dx = (x - x2).norm();
    CHECK((grad_p1(zoo.ls, x) - grad_p1(zoo.ls, x2)).norm() <= ls_bound * dx * (1 + 1e-9));
    CHECK((grad_p1(zoo.rcs, x) - grad_p1(zoo.rcs, x2)).norm() <= ls_bound * dx * (1 + 1e-9));
    CHECK((grad_p1(zoo.lor, x) - grad_p1(zoo.lor, x2)).norm() <= lor_bound * dx * (1 + 1e-9));
  }
}

TEST_CASE("is_feasible is boundary inclusive") {
  const auto ls = ConstraintModel::least_squares(identity(2), vec({2, 0}), 1.0);
  CHECK(is_feasible(ls, vec({2, 0}), 0.0));
  CHECK_FALSE(is_feasible(ls, Vector::Zero(2), 0.0));
  CHECK(is_feasible(ls, Vector::Zero(2), 3.0));
  CHECK(is_feasible(ls, vec({1, 0}), 0.0));  // q = 1 - 1 = 0
  CHECK_THROWS_AS(is_feasible(ls, Vector::Zero(2), -1.0), InvalidParameter);
}

TEST_CASE("every constructed model has q(0) > 0") {
  ModelZoo zoo;
  for (const ConstraintModel* model : {&zoo.ls, &zoo.lor, &zoo.rcs}) {
    CHECK(q_value(*model, Vector::Zero(15)) > 0.0);
  }
}
