#pragma once

// Series and quadrature primitives shared by the covariance code.
//
// Every power-type series in this library has completely monotone terms
// (products of (x + c)^{-a} with a > 0), so the Euler-Maclaurin remainder after
// P correction terms is bounded by |B_{2P}|/(2P)! * |f^{(2P-1)}| at the lower
// end of the tail. That bound is what the `error` fields report.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <queue>
#include <vector>

namespace lmem::numerics {

template <typename Real>
struct Estimate {
  Real value{};
  Real error{};
};

namespace detail {

// B_{2p} / (2p)!, p = 1..8
template <typename Real>
inline constexpr std::array<Real, 8> bernoulli_ratio = {
    Real(1) / Real(12),
    Real(-1) / Real(720),
    Real(1) / Real(30240),
    Real(-1) / Real(1209600),
    Real(1) / Real(47900160),
    Real(-691) / Real(1307674368000.0),
    Real(1) / Real(74724249600.0),
    Real(-3617) / Real(10670622842880000.0),
};

// |B_{2P}| / (2P)! = 2 zeta(2P) / (2 pi)^{2P}, with zeta(2P) <= 1 + 2^{1-2P}.
template <typename Real>
Real remainder_constant(int P) {
  const Real two_pi = 2 * std::numbers::pi_v<Real>;
  return 2 * (1 + std::pow(Real(2), Real(1 - 2 * P))) / std::pow(two_pi, Real(2 * P));
}

}  // namespace detail

/// Rising factorial (d)_k = d (d+1) ... (d+k-1).
template <typename Real>
Real rising(Real d, int k) {
  Real r = 1;
  for (int i = 0; i < k; ++i) r *= d + Real(i);
  return r;
}

/// expm1(x) / x, continuous at 0.
template <typename Real>
Real exprel(Real x) {
  return x == 0 ? Real(1) : std::expm1(x) / x;
}

/// Integral of x^{-d} over [a, b], 0 < a <= b. Stable for d near 1 and b near a.
template <typename Real>
Real power_integral(Real d, Real a, Real b) {
  const Real L = std::log1p((b - a) / a);
  return std::pow(a, 1 - d) * L * exprel((1 - d) * L);
}

/// sum_{i=0}^{count-1} (a + i)^{-d} for a > 0, d > 0.
///
/// Leading terms are summed directly until the start point exceeds 16 + 2d;
/// the rest goes through Euler-Maclaurin with 8 correction terms.
template <typename Real>
Estimate<Real> power_sum(Real d, Real a, std::uint64_t count) {
  constexpr int P = 8;
  const auto& B = detail::bernoulli_ratio<Real>;
  const Real start = 16 + 2 * d;
  std::uint64_t direct = a >= start ? 0 : static_cast<std::uint64_t>(std::ceil(start - a));
  direct = std::min(direct, count);
  Real head = 0;
  for (std::uint64_t i = direct; i-- > 0;) head += std::pow(a + Real(i), -d);
  if (direct == count) return {head, 0};

  const Real lo = a + Real(direct);
  const Real hi = a + Real(count - 1);
  Real em = power_integral(d, lo, hi) + (std::pow(lo, -d) + std::pow(hi, -d)) / 2;
  // f^{(2p-1)}(x) = -(d)_{2p-1} x^{-d-2p+1}
  for (int p = 1; p <= P; ++p) {
    const Real k = Real(2 * p - 1);
    const Real c = rising(d, 2 * p - 1);
    em += B[p - 1] * (-c * std::pow(hi, -d - k) + c * std::pow(lo, -d - k));
  }
  const Real k = Real(2 * P - 1);
  const Real err = detail::remainder_constant<Real>(P) * rising(d, 2 * P - 1) *
                   (std::pow(lo, -d - k) - std::pow(hi, -d - k));
  return {head + em, err + std::numeric_limits<Real>::epsilon() * std::abs(head + em)};
}

/// Hurwitz zeta sum_{i>=0} (a + i)^{-d} for d > 1, a > 0.
template <typename Real>
Estimate<Real> hurwitz_zeta(Real d, Real a) {
  constexpr int P = 8;
  const auto& B = detail::bernoulli_ratio<Real>;
  const Real start = 16 + 2 * d;
  const std::uint64_t direct = a >= start ? 0 : static_cast<std::uint64_t>(std::ceil(start - a));
  Real head = 0;
  for (std::uint64_t i = direct; i-- > 0;) head += std::pow(a + Real(i), -d);
  const Real lo = a + Real(direct);
  Real em = std::pow(lo, 1 - d) / (d - 1) + std::pow(lo, -d) / 2;
  for (int p = 1; p <= P; ++p) {
    const Real k = Real(2 * p - 1);
    em += B[p - 1] * rising(d, 2 * p - 1) * std::pow(lo, -d - k);
  }
  const Real err = detail::remainder_constant<Real>(P) * rising(d, 2 * P - 1) *
                   std::pow(lo, -d - Real(2 * P - 1));
  return {head + em, err + std::numeric_limits<Real>::epsilon() * std::abs(head + em)};
}

template <typename Real>
struct QuadratureResult {
  Real value{};
  Real error{};
  int evaluations = 0;
  bool converged = false;
};

namespace detail {

template <typename Real>
struct Kronrod15 {
  static constexpr std::array<Real, 8> xgk = {
      Real(0.991455371120812639206854697526329L), Real(0.949107912342758524526189684047851L),
      Real(0.864864423359769072789712788640926L), Real(0.741531185599394439863864773280788L),
      Real(0.586087235467691130294144845693013L), Real(0.405845151377397166906606412076961L),
      Real(0.207784955007898467600689403773245L), Real(0)};
  static constexpr std::array<Real, 8> wgk = {
      Real(0.022935322010529224963732008058970L), Real(0.063092092629978553290700663189204L),
      Real(0.104790010322250183839876322541518L), Real(0.140653259715525918745189590510238L),
      Real(0.169004726639267902826583426598550L), Real(0.190350578064785409913256402421014L),
      Real(0.204432940075298892414161999234649L), Real(0.209482141084727828012999174891714L)};
  // Gauss weights for xgk[1], xgk[3], xgk[5], xgk[7]
  static constexpr std::array<Real, 4> wg = {
      Real(0.129484966168869693270611432679082L), Real(0.279705391489276667901467771423780L),
      Real(0.381830050505118944950369775488975L), Real(0.417959183673469387755102040816327L)};
};

template <typename Real>
struct Segment {
  Real a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <typename Real, typename F>
Segment<Real> gk15(F& f, Real a, Real b) {
  using K = Kronrod15<Real>;
  const Real c = (a + b) / 2;
  const Real h = (b - a) / 2;
  const Real fc = f(c);
  Real kron = fc * K::wgk[7];
  Real gauss = fc * K::wg[3];
  for (int i = 0; i < 7; ++i) {
    const Real dx = h * K::xgk[i];
    const Real s = f(c - dx) + f(c + dx);
    kron += K::wgk[i] * s;
    if (i % 2 == 1) gauss += K::wg[i / 2] * s;
  }
  return {a, b, kron * h, std::abs((kron - gauss) * h)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) quadrature on a finite interval.
/// The error estimate is the raw |K15 - G7| difference, which is conservative
/// for smooth integrands.
template <typename Real, typename F>
QuadratureResult<Real> integrate(F&& f, Real a, Real b, Real abs_tol, Real rel_tol,
                                 int max_segments = 2000) {
  std::priority_queue<detail::Segment<Real>> heap;
  auto first = detail::gk15(f, a, b);
  Real value = first.value;
  Real error = first.error;
  heap.push(first);
  int evals = 15;
  while (error > std::max(abs_tol, rel_tol * std::abs(value)) &&
         static_cast<int>(heap.size()) < max_segments) {
    auto worst = heap.top();
    heap.pop();
    const Real mid = (worst.a + worst.b) / 2;
    if (!(mid > worst.a && mid < worst.b)) {
      heap.push(worst);
      break;
    }
    auto left = detail::gk15(f, worst.a, mid);
    auto right = detail::gk15(f, mid, worst.b);
    evals += 30;
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum to shed the drift from incremental updates.
  Real v = 0, e = 0;
  const bool ok = error <= std::max(abs_tol, rel_tol * std::abs(value));
  while (!heap.empty()) {
    v += heap.top().value;
    e += heap.top().error;
    heap.pop();
  }
  return {v, e, evals, ok};
}

}  // namespace lmem::numerics
