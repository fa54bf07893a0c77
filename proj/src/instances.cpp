#include "l1l2/instances.hpp"

#include "l1l2/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

namespace l1l2 {

std::string_view to_string(Family family) {
  switch (family) {
    case Family::robust_cs: return "robust_cs";
    case Family::cauchy: return "cauchy";
    case Family::badly_scaled: return "badly_scaled";
  }
  return "unknown";
}

Family family_from_string(std::string_view name) {
  if (name == "robust_cs" || name == "robust-cs") return Family::robust_cs;
  if (name == "cauchy") return Family::cauchy;
  if (name == "badly_scaled" || name == "badly-scaled") return Family::badly_scaled;
  throw InvalidParameter("unknown instance family '" + std::string(name) + "'");
}

void GenSpec::validate() const {
  if (n <= 0) throw InvalidParameter("n must be positive");
  if (k <= 0 || k > n) throw InvalidParameter("k must lie in [1, n]");
  if (!(sigma_factor > 0.0) || !(noise_scale > 0.0)) {
    throw InvalidParameter("sigma_factor and noise_scale must be positive");
  }
  switch (family) {
    case Family::robust_cs:
      if (p <= 0 || iota < 0) throw InvalidParameter("robust_cs needs p > 0 and iota >= 0");
      break;
    case Family::cauchy:
      if (m <= 0) throw InvalidParameter("cauchy needs m > 0");
      if (!(gamma > 0.0)) throw InvalidParameter("gamma must be positive");
      break;
    case Family::badly_scaled:
      if (m <= 0) throw InvalidParameter("badly_scaled needs m > 0");
      if (!(F > 0.0) || !(D >= 0.0)) throw InvalidParameter("need F > 0 and D >= 0");
      break;
  }
}

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Matrix gaussian_unit_columns(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> normal;
  Matrix a(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) a(i, j) = normal(rng);
    a.col(j) /= a.col(j).norm();
  }
  return a;
}

// Uniformly random support of size k (first k of a random permutation).
std::vector<int> random_support(int n, int k, Rng& rng) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  perm.resize(static_cast<std::size_t>(k));
  return perm;
}

Vector gaussian_vector(Eigen::Index size, Rng& rng) {
  std::normal_distribution<double> normal;
  Vector v(size);
  for (Eigen::Index i = 0; i < size; ++i) v[i] = normal(rng);
  return v;
}

Vector gaussian_sparse_signal(const GenSpec& spec) {
  auto support_rng = make_stream(spec.seed, "support");
  auto value_rng = make_stream(spec.seed, "values");
  std::normal_distribution<double> normal;
  Vector x = Vector::Zero(spec.n);
  for (int j : random_support(spec.n, spec.k, support_rng)) x[j] = normal(value_rng);
  return x;
}

ProblemInstance make_robust_cs(const GenSpec& spec) {
  const int rows = spec.p + spec.iota;
  auto matrix_rng = make_stream(spec.seed, "matrix");
  auto a = std::make_shared<const SensingMatrix>(gaussian_unit_columns(rows, spec.n, matrix_rng));
  Vector x_orig = gaussian_sparse_signal(spec);

  auto outlier_rng = make_stream(spec.seed, "outliers");
  const Vector z_iota = gaussian_vector(spec.iota, outlier_rng);
  Vector z = Vector::Zero(rows);
  for (int i = 0; i < spec.iota; ++i) z[spec.p + i] = z_iota[i] >= 0.0 ? 2.0 : -2.0;

  auto noise_rng = make_stream(spec.seed, "noise");
  Vector eps = gaussian_vector(rows, noise_rng);
  const Vector noise = spec.noise_scale * eps;
  Vector b = a->apply(x_orig) - z + noise;
  const double sigma = spec.sigma_factor * noise.norm();
  auto model = ConstraintModel::robust_cs(std::move(a), std::move(b), sigma, 2 * spec.iota);
  return {std::move(model), std::move(x_orig), spec, {std::move(eps), std::move(z), {}, 1}};
}

ProblemInstance make_cauchy(const GenSpec& spec) {
  auto matrix_rng = make_stream(spec.seed, "matrix");
  auto a = std::make_shared<const SensingMatrix>(gaussian_unit_columns(spec.m, spec.n, matrix_rng));
  Vector x_orig = gaussian_sparse_signal(spec);

  auto noise_rng = make_stream(spec.seed, "noise");
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Vector eps(spec.m);
  for (int i = 0; i < spec.m; ++i) {
    double u;
    do {
      u = uniform(noise_rng);
    } while (u <= 0.0 || u >= 1.0);
    eps[i] = std::tan(std::numbers::pi * (u - 0.5));
  }
  const Vector noise = spec.noise_scale * eps;
  Vector b = a->apply(x_orig) + noise;
  const double sigma = spec.sigma_factor * lorentzian_norm(noise, spec.gamma);
  auto model = ConstraintModel::lorentzian(std::move(a), std::move(b), sigma, spec.gamma);
  return {std::move(model), std::move(x_orig), spec, {std::move(eps), {}, {}, 1}};
}

ProblemInstance make_badly_scaled(const GenSpec& spec) {
  constexpr int kRankAttempts = 10;
  std::shared_ptr<const SensingMatrix> a;
  Vector w;
  int attempt = 0;
  for (; attempt < kRankAttempts && !a; ++attempt) {
    auto w_rng = make_stream(spec.seed, "w", static_cast<std::uint64_t>(attempt));
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    w.resize(spec.m);
    for (int i = 0; i < spec.m; ++i) w[i] = uniform(w_rng);
    try {
      a = std::make_shared<const SensingMatrix>(cosine_matrix(w, spec.n, spec.F));
    } catch (const RankDeficient&) {
    }
  }
  if (!a) {
    throw RankDeficient("badly scaled generator: no full-rank matrix after " +
                        std::to_string(kRankAttempts) + " attempts");
  }

  auto support_rng = make_stream(spec.seed, "support");
  auto value_rng = make_stream(spec.seed, "values");
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Vector x_orig = Vector::Zero(spec.n);
  for (int j : random_support(spec.n, spec.k, support_rng)) {
    const double sign = normal(value_rng) >= 0.0 ? 1.0 : -1.0;
    x_orig[j] = sign * std::pow(10.0, spec.D * uniform(value_rng));
  }

  auto noise_rng = make_stream(spec.seed, "noise");
  Vector eps = gaussian_vector(spec.m, noise_rng);
  const Vector noise = spec.noise_scale * eps;
  Vector b = a->apply(x_orig) + noise;
  const double sigma = spec.sigma_factor * noise.norm();
  auto model = ConstraintModel::least_squares(std::move(a), std::move(b), sigma);
  return {std::move(model), std::move(x_orig), spec, {std::move(eps), {}, std::move(w), attempt}};
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::string_view component, std::uint64_t index) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char ch : component) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(splitmix64(seed) ^ splitmix64(h) ^ splitmix64(index + 0x51ed270b27a8e4d3ULL));
}

Rng make_stream(std::uint64_t seed, std::string_view component, std::uint64_t index) {
  return Rng(derive_seed(seed, component, index));
}

Matrix cosine_matrix(const Vector& w, int n, double F) {
  const auto m = w.size();
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  Matrix a(m, n);
  for (int j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) {
      a(i, j) = scale * std::cos(2.0 * std::numbers::pi * w[i] * (j + 1) / F);
    }
  }
  return a;
}

ProblemInstance generate(const GenSpec& spec) {
  spec.validate();
  switch (spec.family) {
    case Family::robust_cs: return make_robust_cs(spec);
    case Family::cauchy: return make_cauchy(spec);
    case Family::badly_scaled: return make_badly_scaled(spec);
  }
  throw InvalidParameter("unknown family");
}

ProblemInstance gen_robust_cs(int n, int p, int k, int iota, std::uint64_t seed) {
  GenSpec spec;
  spec.family = Family::robust_cs;
  spec.n = n;
  spec.p = p;
  spec.k = k;
  spec.iota = iota;
  spec.seed = seed;
  return generate(spec);
}

ProblemInstance gen_cauchy(int n, int m, int k, std::uint64_t seed) {
  GenSpec spec;
  spec.family = Family::cauchy;
  spec.n = n;
  spec.m = m;
  spec.k = k;
  spec.seed = seed;
  return generate(spec);
}

ProblemInstance gen_badly_scaled(int n, int m, int k, double F, double D, std::uint64_t seed) {
  GenSpec spec;
  spec.family = Family::badly_scaled;
  spec.n = n;
  spec.m = m;
  spec.k = k;
  spec.F = F;
  spec.D = D;
  spec.seed = seed;
  return generate(spec);
}

double rec_err(const Vector& x_out, const Vector& x_orig) {
  if (x_out.size() != x_orig.size()) throw DimensionMismatch("rec_err: length mismatch");
  return (x_out - x_orig).norm() / std::max(1.0, x_orig.norm());
}

double residual_metric(const ConstraintModel& model, const Vector& x) {
  return q_value(model, x);
}

}  // namespace l1l2
