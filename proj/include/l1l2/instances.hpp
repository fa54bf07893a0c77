#pragma once

#include "l1l2/models.hpp"

#include <cstdint>
#include <random>
#include <string_view>

namespace l1l2 {

enum class Family { robust_cs, cauchy, badly_scaled };

std::string_view to_string(Family family);
Family family_from_string(std::string_view name);

/// Generation parameters. Unused fields for a family stay at their defaults.
struct GenSpec {
  Family family = Family::robust_cs;
  int n = 0;
  int m = 0;      // rows, cauchy and badly_scaled
  int p = 0;      // clean rows, robust_cs
  int iota = 0;   // outlier rows, robust_cs
  int k = 0;
  double gamma = 0.02;         // cauchy
  double sigma_factor = 1.2;   // sigma = sigma_factor * ||noise||
  double noise_scale = 0.01;
  double F = 5.0;  // badly_scaled
  double D = 2.0;  // badly_scaled
  std::uint64_t seed = 0;

  int rows() const { return family == Family::robust_cs ? p + iota : m; }
  void validate() const;
};

/// Realized random quantities that are not recoverable from (A, b, x_orig).
struct NoiseRecord {
  Vector epsilon;    // unscaled noise draw
  Vector outliers;   // z (robust_cs only; A x_orig - z + 0.01 eps = b)
  Vector w;          // cosine frequencies (badly_scaled only)
  int rank_attempts = 1;
};

struct ProblemInstance {
  ConstraintModel model;
  Vector x_orig;
  GenSpec spec;
  NoiseRecord noise;
};

/// Named 64-bit seed derivation: each component draws from its own stream.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view component,
                          std::uint64_t index = 0);

using Rng = std::mt19937_64;
Rng make_stream(std::uint64_t seed, std::string_view component, std::uint64_t index = 0);

ProblemInstance gen_robust_cs(int n, int p, int k, int iota, std::uint64_t seed);
ProblemInstance gen_cauchy(int n, int m, int k, std::uint64_t seed);
ProblemInstance gen_badly_scaled(int n, int m, int k, double F, double D, std::uint64_t seed);

/// Dispatches on spec.family; honours every field of spec.
ProblemInstance generate(const GenSpec& spec);

/// Column j (1-based index in the formula) of the badly scaled matrix:
/// cos(2 pi w_i j / F) / sqrt(m).
Matrix cosine_matrix(const Vector& w, int n, double F);

/// ||x_out - x_orig|| / max(1, ||x_orig||)
double rec_err(const Vector& x_out, const Vector& x_orig);

/// Family residual reported alongside RecErr; equals q(x).
double residual_metric(const ConstraintModel& model, const Vector& x);

}  // namespace l1l2
