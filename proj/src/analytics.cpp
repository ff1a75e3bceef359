#include "lmem/analytics.hpp"

#include <cmath>
#include <sstream>

namespace lmem {

namespace {

constexpr double quad_rel = 1e-14;
constexpr double quad_abs = 1e-300;

template <typename F>
Estimate unit_integral(F&& f) {
  auto r = numerics::integrate<double>(f, 0.0, 1.0, quad_abs, quad_rel);
  return {r.value, r.error};
}

// int_0^y v^{-a} (1+v)^{-b} dv, a < 1, via v = y u^{1/(1-a)}.
Estimate head_form(double a, double b, double y) {
  const double p = 1 / (1 - a);
  auto r = unit_integral([&](double u) { return std::pow(1 + y * std::pow(u, p), -b); });
  const double scale = std::pow(y, 1 - a) * p;
  return {scale * r.value, scale * r.error};
}

// int_y^inf v^{-a} (1+v)^{-b} dv, a + b > 1, via v = y w^{-1/c}.
Estimate tail_form(double a, double b, double y) {
  const double c = a + b - 1;
  const double p = 1 / c;
  auto r = unit_integral([&](double w) { return std::pow(1 + std::pow(w, p) / y, -b); });
  const double scale = std::pow(y, -c) / c;
  return {scale * r.value, scale * r.error};
}

// int_y^1 v^{-a} (1+v)^{-b} dv on a log scale.
Estimate log_form(double a, double b, double y) {
  const double lo = std::log(y);
  auto r = numerics::integrate<double>(
      [&](double s) { return std::exp((1 - a) * s) * std::pow(1 + std::exp(s), -b); }, lo, 0.0,
      quad_abs, quad_rel);
  return {r.value, r.error};
}

void require_c_region(double a, double b) {
  if (!(a < 1) || !(a + b > 1)) {
    std::ostringstream os;
    os << "c(d_s, d_t) diverges for d_s=" << a << ", d_t=" << b << ": needs "
       << (!(a < 1) ? "d_s < 1 (integrability at 0)" : "d_s + d_t > 1 (integrability at infinity)");
    throw RegimeError(os.str());
  }
}

}  // namespace

Estimate c_integral_estimate(double d_s, double d_t) {
  require_c_region(d_s, d_t);
  const auto h = head_form(d_s, d_t, 1.0);
  const auto t = tail_form(d_s, d_t, 1.0);
  return {h.value + t.value, h.error + t.error};
}

double c_integral_closed_form(double d_s, double d_t) {
  require_c_region(d_s, d_t);
  const double x = 1 - d_s, y = d_s + d_t - 1;
  return std::exp(std::lgamma(x) + std::lgamma(y) - std::lgamma(x + y));
}

double c_upper_bound(double d) {
  if (!(d > 0.5 && d < 1)) throw RegimeError("c upper bound needs 1/2 < d < 1");
  return 1 / (1 - d) + 1 / (2 * d - 1);
}

Estimate incomplete_c(double a, double b, double y) {
  if (!(a + b > 1) || !(y > 0)) throw RegimeError("incomplete c integral needs a + b > 1 and y > 0");
  if (y >= 1) return tail_form(a, b, y);
  const auto t = tail_form(a, b, 1.0);
  Estimate mid;
  if (a < 1) {
    const auto h1 = head_form(a, b, 1.0);
    const auto hy = head_form(a, b, y);
    mid = {h1.value - hy.value, h1.error + hy.error};
  } else {
    mid = log_form(a, b, y);
  }
  return {t.value + mid.value, t.error + mid.error};
}

// ---------------------------------------------------------------------------

LagSeries::LagSeries(double a, double b)
    : a_(a), b_(b), c_(a + b - 1), head_(32 + static_cast<std::int64_t>(std::ceil(2 * (a + b)))) {
  if (!(a > 0 && b > 0 && c_ > 0)) throw RegimeError("lag series needs a, b > 0 and a + b > 1");
}

Estimate LagSeries::operator()(std::int64_t h) const {
  constexpr int P = 6;
  const auto& B = numerics::detail::bernoulli_ratio<double>;
  const double hd = double(h);
  double sum = 0;
  for (std::int64_t j = head_ - 1; j >= 0; --j)
    sum += std::pow(double(j + 1), -a_) * std::pow(double(j) + hd + 1, -b_);

  const double u1 = double(head_ + 1);
  const double u2 = double(head_) + hd + 1;
  Estimate integral;
  if (h == 0) {
    integral = {std::pow(u1, -c_) / c_, 0.0};
  } else {
    const auto r = incomplete_c(a_, b_, u1 / hd);
    const double scale = std::pow(hd, -c_);
    integral = {scale * r.value, scale * r.error};
  }
  // |f^{(k)}(x)| = sum_i C(k,i) (a)_i (b)_{k-i} u1^{-a-i} u2^{-b-k+i}
  auto deriv = [&](int k) {
    double s = 0, binom = 1;
    for (int i = 0; i <= k; ++i) {
      s += binom * numerics::rising(a_, i) * numerics::rising(b_, k - i) * std::pow(u1, -a_ - i) *
           std::pow(u2, -b_ - (k - i));
      binom = binom * (k - i) / (i + 1);
    }
    return s;
  };
  double em = std::pow(u1, -a_) * std::pow(u2, -b_) / 2;
  for (int p = 1; p <= P; ++p) em += B[p - 1] * deriv(2 * p - 1);
  const double rem = numerics::detail::remainder_constant<double>(P) * deriv(2 * P - 1);
  const double value = sum + integral.value + em;
  return {value, rem + integral.error + 4 * std::numeric_limits<double>::epsilon() * value};
}

Estimate cross_covariance_exact(const ProcessSpec& spec, Index s, Index t, std::int64_t h) {
  if (h < 0) throw std::invalid_argument("lag must be non-negative");
  const double sig = spec.sigma(s, t);
  if (sig == 0) return {0.0, 0.0};
  const auto g = LagSeries(spec.d(s), spec.d(t))(h);
  return {sig * g.value, std::abs(sig) * g.error};
}

double cross_covariance_windowed(double d_s, double d_t, double sigma_st, std::int64_t k,
                                 std::int64_t l, std::int64_t window) {
  double sum = 0;
  for (std::int64_t i = std::min(k, l); i >= -window; --i)
    sum += std::pow(double(k - i + 1), -d_s) * std::pow(double(l - i + 1), -d_t);
  return sigma_st * sum;
}

AsymptoticValue cross_covariance_asymptotic(double d_s, double d_t, double sigma_st, double h) {
  if (!(h >= 2)) throw std::invalid_argument("asymptotic lag law needs h >= 2");
  if (d_s > 0.5 && d_s < 1 && !is_boundary(d_s) && d_t > 0.5)
    return {c_integral(d_s, d_t) * sigma_st * std::pow(h, 1 - d_s - d_t), Regime::long_memory};
  if (is_boundary(d_s) && is_boundary(d_t)) return {sigma_st * std::log(h) / h, Regime::boundary};
  std::ostringstream os;
  os << "asymptotic lag law not covered for d_s=" << d_s << ", d_t=" << d_t;
  throw RegimeError(os.str());
}

std::string_view to_string(Summability s) {
  return s == Summability::convergent ? "convergent" : "divergent";
}

Summability classify_summability(double d_s, double d_t) {
  return (d_t > 1 && !is_boundary(d_t) && d_s + d_t > 2) ? Summability::convergent
                                                          : Summability::divergent;
}

L2Membership l2_membership(const ProcessSpec& spec, double finite_threshold) {
  const Vector s2 = spec.innovations.sigma2();
  const Vector denom = (2 * spec.memory.values.array() - 1).matrix();
  Vector weighted(s2.size());
  for (Index i = 0; i < s2.size(); ++i) weighted[i] = s2[i] == 0 ? 0.0 : s2[i] / denom[i];
  const double i1 = spec.grid.integrate(s2);
  const double i2 = spec.grid.integrate(weighted);
  const bool ok = std::isfinite(i1) && std::isfinite(i2) && std::abs(i1) < finite_threshold &&
                  std::abs(i2) < finite_threshold;
  return {i1, i2, ok};
}

AsymptoticValue partial_sum_covariance_asymptotic(double d_s, double d_t, double sigma_st, double n) {
  const auto long_mem = [](double d) { return d > 0.5 && d < 1 && !is_boundary(d); };
  if (long_mem(d_s) && long_mem(d_t)) {
    const double sum = d_s + d_t;
    const double k = (c_integral(d_s, d_t) + c_integral(d_t, d_s)) * sigma_st / ((2 - sum) * (3 - sum));
    return {k * std::pow(n, 3 - sum), Regime::long_memory};
  }
  if (is_boundary(d_s) && is_boundary(d_t)) {
    const double ln = std::log(n);
    return {sigma_st * n * ln * ln, Regime::boundary};
  }
  std::ostringstream os;
  os << "partial-sum growth law not covered for d_s=" << d_s << ", d_t=" << d_t;
  throw RegimeError(os.str());
}

// ---------------------------------------------------------------------------

LimitKernel limit_kernel(const ProcessSpec& spec) {
  const auto part = require_clt(spec);
  const Index q = spec.size();
  LimitKernel lk{part == CltPart::part_i ? Regime::long_memory : Regime::boundary, Matrix(q, q)};
  if (lk.regime == Regime::boundary) {
    lk.K = spec.innovations.sigma;
  } else {
    for (Index i = 0; i < q; ++i)
      for (Index j = 0; j < q; ++j) {
        const double sig = spec.sigma(i, j);
        if (sig == 0) {
          lk.K(i, j) = 0;
          continue;
        }
        const double ds = spec.d(i), dt = spec.d(j), sum = ds + dt;
        lk.K(i, j) = (c_integral(ds, dt) + c_integral(dt, ds)) * sig / ((2 - sum) * (3 - sum));
      }
  }
  lk.K = ((lk.K + lk.K.transpose()) / 2).eval();
  return lk;
}

double normalizer(double d, std::int64_t n) {
  switch (classify_regime(d)) {
    case Regime::long_memory:
      if (!(d > 0.5)) break;
      if (n < 1) throw std::invalid_argument("normalization needs n >= 1");
      return std::pow(double(n), 1.5 - d);
    case Regime::boundary:
      if (n < 2) throw std::invalid_argument("boundary normalization sqrt(n) ln(n) needs n >= 2");
      return std::sqrt(double(n)) * std::log(double(n));
    case Regime::short_memory:
      break;
  }
  throw RegimeError("no normalization defined for d outside (1/2, 1]");
}

Vector NormalizationPlan::apply(const Vector& sums) const {
  if (sums.size() != b.size()) throw std::invalid_argument("normalization plan and sums differ in size");
  return sums.cwiseQuotient(b);
}

NormalizationPlan normalization_plan(const ProcessSpec& spec, std::int64_t n) {
  const auto part = require_clt(spec);
  NormalizationPlan plan{part == CltPart::part_i ? Regime::long_memory : Regime::boundary, n,
                         Vector(spec.size())};
  for (Index i = 0; i < spec.size(); ++i) plan.b[i] = normalizer(spec.d(i), n);
  return plan;
}

double boundary_constant(std::int64_t n_max) {
  static const std::int64_t cached_n = std::int64_t{1} << 20;
  auto compute = [](std::int64_t nm) {
    const auto v = variance_sequence(1.0, nm);
    double best = 0;
    for (std::int64_t n = 2; n <= nm; ++n) {
      const double ln = std::log(double(n));
      best = std::max(best, v[static_cast<std::size_t>(n - 1)] / (double(n) * ln * ln));
    }
    return 1.05 * best;
  };
  if (n_max == cached_n) {
    static const double value = compute(cached_n);
    return value;
  }
  return compute(n_max);
}

double dominating_bound(double d, double sigma2) {
  if (sigma2 == 0) return 0.0;
  switch (classify_regime(d)) {
    case Regime::long_memory:
      if (!(d > 0.5)) break;
      return sigma2 * (1 + 1 / (2 * d - 1)) + sigma2 * c_integral(d, d) / ((1 - d) * (3 - 2 * d));
    case Regime::boundary:
      return boundary_constant() * sigma2;
    case Regime::short_memory:
      break;
  }
  throw RegimeError("dominating bound covers 1/2 < d <= 1 only");
}

}  // namespace lmem
