#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lmem/analytics.hpp"
#include "lmem/simulate.hpp"

namespace lmem {

/// Running sums for second moments about zero; merge is associative.
class MomentAccumulator {
 public:
  explicit MomentAccumulator(Index q) : outer_(Matrix::Zero(q, q)), sum_(Vector::Zero(q)) {}

  void add(const Vector& x) {
    outer_.selfadjointView<Eigen::Lower>().rankUpdate(x);
    sum_ += x;
    ++count_;
  }
  void merge(const MomentAccumulator& other) {
    outer_ += other.outer_;
    sum_ += other.sum_;
    count_ += other.count_;
  }

  std::int64_t count() const { return count_; }
  Matrix second_moment() const {
    Matrix m = outer_.selfadjointView<Eigen::Lower>();
    return m / double(count_);
  }
  Vector mean() const { return sum_ / double(count_); }

 private:
  std::int64_t count_ = 0;
  Matrix outer_;
  Vector sum_;
};

/// Moments of the rows of `samples`, accumulated shard by shard in order.
MomentAccumulator accumulate_rows(const Matrix& samples, std::int64_t shard_size);

struct CltOptions {
  std::int64_t n = 4096;
  std::int64_t replications = 2000;
  std::uint64_t seed = 0;
  double z_star = 4.0;
  /// Explicit innovations cover j >= -past_window_factor * n.
  std::int64_t past_window_factor = 4;
  std::int64_t shard_size = 50;
  int threads = 1;
  /// Batches for the jackknife standard errors (non-Gaussian innovations).
  std::int64_t jackknife_batches = 20;
};

struct CovarianceReport {
  std::int64_t n = 0;
  std::int64_t replications = 0;
  Regime regime = Regime::long_memory;
  std::int64_t past_cut = 0;
  double z_star = 4.0;
  std::string se_method;
  Vector mean;
  Matrix empirical;       // second moments of the normalized sums
  Matrix finite_n_exact;  // E[S_n(s)S_n(t)] / (b_n(s) b_n(t))
  Matrix limit;           // limit kernel
  Matrix se;
  Matrix z_scores;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> verdict;
  /// |finite_n_exact - limit| relative to |limit| (absolute where limit is 0).
  Matrix gap;

  bool all_pass() const { return verdict.all(); }
  double max_gap() const { return gap.maxCoeff(); }
};

struct CltExperiment {
  CovarianceReport report;
  Matrix samples;  // replications x q normalized partial sums
};

/// Simulates normalized partial sums and compares their covariance with the
/// exact finite-n covariance. Throws RegimeError for specs outside the limit theorem.
CltExperiment run_clt_experiment(const ProcessSpec& spec, const CltOptions& options);

struct NormalityOptions {
  double skew_band = 4.0;  // multiples of sqrt(6/N)
  double kurt_band = 4.0;  // multiples of sqrt(24/N)
};

struct NormalityPoint {
  double skewness;
  double excess_kurtosis;
  /// sup |F_N - Phi(./sd)| with sd from `variances` (sample variance if none given).
  double ks_distance;
  bool skew_ok;
  bool kurt_ok;
};

std::vector<NormalityPoint> normality_diagnostics(const Matrix& samples, const Vector& variances = {},
                                                  const NormalityOptions& options = {});

struct ExponentFitPoint {
  Index index = 0;
  double d = 0;
  Regime regime = Regime::long_memory;
  /// Least-squares slope of log Var(S_n) on log n; for d = 1 the fitted
  /// quantity is log(Var(S_n) / ln^2 n).
  double slope = 0;
  double theoretical = 0;
  double abs_error = 0;
  double rms_residual = 0;
  /// Var(S_n) / (n ln^2 n sigma^2) along n_list, boundary points only.
  std::vector<double> corrected_ratio;
};

struct ExponentFit {
  std::vector<std::int64_t> n_list;
  std::vector<ExponentFitPoint> points;
};

/// Requires at least 5 dyadic horizons.
ExponentFit fit_variance_exponent(const ProcessSpec& spec, const std::vector<std::int64_t>& n_list);

}  // namespace lmem
