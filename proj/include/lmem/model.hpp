#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lmem/types.hpp"

namespace lmem {

/// Discretization of the index space (S, mu): ordered points with positive
/// quadrature weights.
struct SpaceGrid {
  Vector points;
  Vector weights;

  /// `count` equally spaced points on [lower, upper], each carrying weight
  /// (upper - lower) / count.
  static SpaceGrid uniform(double lower, double upper, Index count);

  Index size() const { return points.size(); }
  double total_measure() const { return weights.sum(); }
  /// Weighted sum of per-point values; approximates the integral over S.
  double integrate(const Vector& values) const { return weights.dot(values); }
};

enum class MemoryKind { constant, step, table };

/// The exponent field d(t), stored at grid points.
struct MemoryFunction {
  MemoryKind kind = MemoryKind::table;
  Vector values;
  // step only: d(t) = levels[#{breakpoints <= t}]
  std::vector<double> breakpoints;
  std::vector<double> levels;

  static MemoryFunction constant(const SpaceGrid& grid, double d);
  static MemoryFunction step(const SpaceGrid& grid, std::vector<double> breakpoints,
                             std::vector<double> levels);
  static MemoryFunction table(Vector values);

  double operator()(Index i) const { return values[i]; }
  double min() const { return values.minCoeff(); }
};

enum class InnovationKind { white, wiener, custom };
enum class InnovationLaw { gaussian, pareto };

std::string_view to_string(InnovationKind k);
std::string_view to_string(InnovationLaw l);

/// Lower factor F with F F^T = sigma + jitter * I.
struct PsdFactor {
  Matrix lower;
  double jitter = 0.0;
};

/// Factor a symmetric PSD matrix. Falls back to a diagonal jitter of
/// 1e-12 * trace / q when the plain Cholesky fails; throws ValidationError if
/// that is not enough.
PsdFactor psd_factor(const Matrix& sigma);

/// Spatial law of the i.i.d.-in-time innovations eps_k(t).
struct InnovationModel {
  InnovationKind kind = InnovationKind::white;
  InnovationLaw law = InnovationLaw::gaussian;
  /// Tail index of the symmetrized Pareto law; must exceed 2.
  double pareto_alpha = 3.0;
  Matrix sigma;
  Matrix factor;
  double jitter = 0.0;
  bool factor_ok = false;

  static InnovationModel white(const Vector& sigma2);
  static InnovationModel wiener(const SpaceGrid& grid);
  static InnovationModel custom(const Matrix& sigma);

  Vector sigma2() const { return sigma.diagonal(); }
  Index size() const { return sigma.rows(); }
};

inline constexpr double default_tail_tol = 1e-3;
inline constexpr std::int64_t default_hard_cap = 10'000'000;

struct ProcessSpec {
  SpaceGrid grid;
  MemoryFunction memory;
  InnovationModel innovations;
  double tail_tol = default_tail_tol;
  std::int64_t horizon = 1;
  std::uint64_t seed = 0;
  std::int64_t hard_cap = default_hard_cap;

  Index size() const { return grid.size(); }
  double d(Index i) const { return memory(i); }
  double sigma(Index i, Index j) const { return innovations.sigma(i, j); }
  /// FNV-1a digest of every numeric field; identifies the generating spec.
  std::uint64_t hash() const;
};

/// Which part of the limit theorem a process falls under.
///   part_i : 1/2 < d(t) < 1 at every point
///   part_ii: d(t) == 1 at every point
enum class CltPart { none, part_i, part_ii };

std::string_view to_string(CltPart p);

struct ValidationReport {
  std::vector<Regime> regimes;
  std::vector<std::string> fatal;
  std::vector<std::string> warnings;
  CltPart clt = CltPart::none;

  bool ok() const { return fatal.empty(); }
  /// All fatal messages joined with "; ".
  std::string summary() const;
};

ValidationReport validate(const ProcessSpec& spec);

/// Throws ValidationError carrying every fatal message.
void require_valid(const ProcessSpec& spec);

/// Throws RegimeError unless the process is uniformly long-memory or uniformly
/// boundary. Returns the applicable part.
CltPart require_clt(const ProcessSpec& spec);

/// Smallest M with M^{1-2d} / (2d - 1) <= tail_tol * sum_{j>=0} (j+1)^{-2d}.
/// The left side bounds the dropped variance sum_{j>M} (j+1)^{-2d}.
std::int64_t truncation_length(double d, double tail_tol,
                               std::int64_t hard_cap = default_hard_cap);

/// Upper bound on sum_{j>M} (j+1)^{-2d} used by truncation_length.
double truncation_tail_bound(double d, std::int64_t M);

}  // namespace lmem
