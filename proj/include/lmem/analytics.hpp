#pragma once

// Deterministic covariance numerics for X_k(t) = sum_{j>=0} (j+1)^{-d(t)} eps_{k-j}(t).

#include <cstdint>
#include <limits>
#include <vector>

#include "lmem/model.hpp"
#include "lmem/numerics.hpp"

namespace lmem {

using Estimate = numerics::Estimate<double>;

// ---------------------------------------------------------------------------
// The integral c(s,t) = int_0^inf x^{-d_s} (x+1)^{-d_t} dx

/// Adaptive quadrature of c(d_s, d_t). Requires d_s < 1 and d_s + d_t > 1
/// (integrability at 0 and at infinity); throws RegimeError otherwise.
Estimate c_integral_estimate(double d_s, double d_t);
inline double c_integral(double d_s, double d_t) { return c_integral_estimate(d_s, d_t).value; }

/// Beta-function form B(1 - d_s, d_s + d_t - 1), for reporting deltas.
double c_integral_closed_form(double d_s, double d_t);

/// 1/(1-d) + 1/(2d-1), an upper bound of c(d, d) for 1/2 < d < 1.
double c_upper_bound(double d);

/// int_y^inf v^{-a} (1+v)^{-b} dv for y > 0, a + b > 1.
Estimate incomplete_c(double a, double b, double y);

// ---------------------------------------------------------------------------
// Lag covariances

/// gamma(h) = sum_{j>=0} (j+1)^{-a} (j+h+1)^{-b}, i.e. E[X_0(s) X_h(t)] / sigma(s,t)
/// with a = d(s), b = d(t). Direct summation of the head, Euler-Maclaurin
/// tail; the error field is a remainder bound plus quadrature error.
class LagSeries {
 public:
  LagSeries(double a, double b);
  Estimate operator()(std::int64_t h) const;

 private:
  double a_, b_, c_;
  std::int64_t head_;
};

/// E[X_0(s) X_h(t)] at grid indices s, t.
Estimate cross_covariance_exact(const ProcessSpec& spec, Index s, Index t, std::int64_t h);

/// E[X_k(s) X_l(t)] when only innovations with index >= -window enter the
/// moving average (the truncation shared by the simulators).
double cross_covariance_windowed(double d_s, double d_t, double sigma_st, std::int64_t k,
                                 std::int64_t l, std::int64_t window);

struct AsymptoticValue {
  double value;
  Regime regime;
};

/// Large-lag law: c(d_s,d_t) sigma h^{1-d_s-d_t} for 1/2 < d_s < 1, d_t > 1/2;
/// sigma ln(h)/h for d_s = d_t = 1. Other pairs throw RegimeError.
AsymptoticValue cross_covariance_asymptotic(double d_s, double d_t, double sigma_st, double h);

enum class Summability { convergent, divergent };
std::string_view to_string(Summability s);

/// Whether sum_{h>=1} E[X_0(s) X_h(t)] converges: iff d_t > 1 and d_s + d_t > 2.
Summability classify_summability(double d_s, double d_t);

struct L2Membership {
  double sigma2_integral;
  double weighted_integral;  // int sigma^2 / (2d - 1)
  bool member;
};

/// Grid quadrature of int sigma^2 dmu and int sigma^2/(2d-1) dmu. On a finite
/// grid "infinite" means above `finite_threshold`.
L2Membership l2_membership(const ProcessSpec& spec, double finite_threshold = 1e12);

// ---------------------------------------------------------------------------
// Partial sums S_n(t) = sum_{k=1}^n X_k(t) = sum_{j<=n} z_{n,j}(t) eps_j(t)

inline constexpr std::int64_t unbounded_window = -1;

/// z_{n,j}(t_i) for j in [-past_cut, n].
struct CoefficientTable {
  std::int64_t n = 0;
  std::int64_t past_cut = 0;
  Matrix z;          // row r holds j = r - past_cut
  Vector tail_var;   // bound on sigma^2(t) sum_{j < -past_cut} z_{n,j}(t)^2
  Matrix tail_cov;   // sigma(s,t) sum_{j < -past_cut} z_{n,j}(s) z_{n,j}(t), evaluated

  std::int64_t first_j() const { return -past_cut; }
  double operator()(std::int64_t j, Index i) const { return z(j + past_cut, i); }
};

CoefficientTable z_coefficients(const ProcessSpec& spec, std::int64_t n, std::int64_t past_cut);

/// Smallest past_cut whose certified tail bound stays within
/// tail_tol * Var(S_n(t)) at every grid point. Throws BudgetError above the cap.
std::int64_t choose_past_cut(const ProcessSpec& spec, std::int64_t n);

/// sum_{m >= m_begin} w_s(m) w_t(m), where w(m) = sum_{k=1}^n (k+m)^{-d} = z_{n,1-m}.
Estimate past_gram(double d_s, double d_t, std::int64_t n, std::int64_t m_begin);

/// sum_{j=-window}^{n} z_{n,j}(s) z_{n,j}(t); unbounded_window for the full series.
Estimate z_gram(double d_s, double d_t, std::int64_t n, std::int64_t window = unbounded_window);

/// The same quantity through lag covariances:
/// n E[X_0(s)X_0(t)] + sum_{k<l} E[X_k(s)X_l(t)] + sum_{k<l} E[X_k(t)X_l(s)],
/// with unit sigma.
double lag_form_gram(double d_s, double d_t, std::int64_t n, std::int64_t window = unbounded_window);

enum class CrossCheck { automatic, always, never };

struct PartialSumCovariance {
  double value = 0;
  double error = 0;
  double cross_check = std::numeric_limits<double>::quiet_NaN();
  double relative_gap = std::numeric_limits<double>::quiet_NaN();
};

/// E[S_n(s) S_n(t)] from the z representation, confirmed against the lag form.
/// A disagreement beyond 1e-10 (finite window) or 1e-9 (full series) relative
/// throws std::logic_error.
PartialSumCovariance partial_sum_covariance_exact(const ProcessSpec& spec, std::int64_t n, Index s,
                                                  Index t, std::int64_t window = unbounded_window,
                                                  CrossCheck check = CrossCheck::automatic);

/// q x q matrix of E[S_n(s) S_n(t)] (z route, no cross-check).
Matrix partial_sum_covariance_matrix(const ProcessSpec& spec, std::int64_t n,
                                     std::int64_t window = unbounded_window);

/// Growth law of E[S_n(s) S_n(t)]. Both exponents in (1/2, 1), or both equal 1.
AsymptoticValue partial_sum_covariance_asymptotic(double d_s, double d_t, double sigma_st, double n);

/// Var(S_n) / sigma^2 for n = 1..n_max (element n-1) at a single exponent.
std::vector<double> variance_sequence(double d, std::int64_t n_max);

// ---------------------------------------------------------------------------
// Limit theorem objects

struct LimitKernel {
  Regime regime;
  Matrix K;
};

/// Covariance of the Gaussian limit at grid points. Throws RegimeError for
/// mixed or short-memory specs.
LimitKernel limit_kernel(const ProcessSpec& spec);

/// Per-point normalizer b_n(t): n^{3/2 - d(t)} for long memory, sqrt(n) ln n at d = 1.
struct NormalizationPlan {
  Regime regime;
  std::int64_t n;
  Vector b;

  Vector apply(const Vector& sums) const;
};

double normalizer(double d, std::int64_t n);
NormalizationPlan normalization_plan(const ProcessSpec& spec, std::int64_t n);

/// sup_n Var(S_n)/(n ln^2 n) over 2 <= n <= n_max at d = 1, times 1.05.
double boundary_constant(std::int64_t n_max = std::int64_t{1} << 20);

/// Dominating function for the normalized partial-sum variance:
/// sigma^2 [1 + 1/(2d-1)] + sigma^2 c(d,d) / ((1-d)(3-2d)) for 1/2 < d < 1,
/// boundary_constant() * sigma^2 at d = 1.
double dominating_bound(double d, double sigma2);

}  // namespace lmem
