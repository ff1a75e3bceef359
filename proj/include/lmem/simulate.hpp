#pragma once

#include <cstdint>

#include "lmem/analytics.hpp"
#include "lmem/model.hpp"
#include "lmem/rng.hpp"

namespace lmem {

struct SeedRecord {
  std::uint64_t seed = 0;
  std::uint64_t replication = 0;
};

/// The innovation field eps_j(t), addressable by time index j.
///
/// Draw for (seed, replication, j) is eps_j = F eta_j with F the stored factor
/// of sigma and eta_j i.i.d. standardized (Gaussian or symmetrized Pareto).
class InnovationSource {
 public:
  InnovationSource(const InnovationModel& model, SeedRecord seed);

  Vector operator()(std::int64_t j) const;
  /// eta_j, before the spatial factor is applied.
  void standardized(std::int64_t j, Eigen::Ref<Vector> out) const;
  const InnovationModel& model() const { return *model_; }

 private:
  const InnovationModel* model_;
  rng::CounterRng rng_;
  std::uint64_t replication_;
  double pareto_scale_ = 1.0;
};

/// `count` innovation vectors eps_1..eps_count (rows) for replication 0.
Matrix sample_innovations(const InnovationModel& model, std::int64_t count, std::uint64_t seed);

/// One realization of X_1..X_n, built from innovations with index >= -window.
struct PathEnsemble {
  std::uint64_t spec_hash = 0;
  std::int64_t n = 0;
  Matrix values;  // n x q, row k-1 holds X_k
  std::int64_t window = 0;
  SeedRecord seed;
  /// Per point bound on the variance dropped by the window.
  Vector truncation_bias;
};

/// Window used by generate_paths: truncation_length at the smallest exponent.
std::int64_t path_window(const ProcessSpec& spec);

PathEnsemble generate_paths(const ProcessSpec& spec, std::int64_t n, SeedRecord seed);
PathEnsemble generate_paths(const ProcessSpec& spec, std::int64_t n, std::int64_t window, SeedRecord seed);

Vector partial_sums_direct(const PathEnsemble& paths);

/// sum_j z_{n,j}(t) eps_j(t) over the table's window, same innovations as the
/// direct route for the same seed record.
Vector partial_sums_via_z(const ProcessSpec& spec, const CoefficientTable& table, SeedRecord seed);
/// Throws std::invalid_argument when the table window or horizon differs from the paths'.
Vector partial_sums_via_z(const ProcessSpec& spec, const CoefficientTable& table, const PathEnsemble& paths);
/// Builds the table at path_window(spec).
Vector partial_sums_via_z(const ProcessSpec& spec, std::int64_t n, SeedRecord seed);

Vector normalize_partial_sums(const Vector& sums, const NormalizationPlan& plan);

/// Draws S_n for independent replications without materializing paths.
///
/// Innovations with index in [-past_cut, n] are drawn explicitly. The omitted
/// far past is added as one Gaussian vector with covariance table().tail_cov,
/// which is exact in law for Gaussian innovations.
class PartialSumSampler {
 public:
  PartialSumSampler(const ProcessSpec& spec, std::int64_t n, std::int64_t past_cut,
                    bool include_remainder = true);

  Vector operator()(SeedRecord seed) const;
  const CoefficientTable& table() const { return table_; }

 private:
  InnovationModel model_;
  CoefficientTable table_;
  Matrix remainder_factor_;
  bool remainder_ = false;
};

}  // namespace lmem
