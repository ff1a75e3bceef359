#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "lmem/analytics.hpp"

namespace lmem {

namespace {

struct Kahan {
  double sum = 0, comp = 0;
  void add(double x) {
    const double y = x - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

// w(m) = sum_{k=1}^n (k+m)^{-d}
double past_weight(double d, std::int64_t n, std::int64_t m) {
  return numerics::power_sum(d, double(m + 1), static_cast<std::uint64_t>(n)).value;
}

// w(m) * m^d, continuous in real m and finite as m -> inf.
double scaled_past_weight(double d, std::int64_t n, double m) {
  const double nd = double(n);
  if (!std::isfinite(m)) return nd;
  if (m > 1e6 * nd) {
    const double s1 = nd * (nd + 1) / 2, s2 = nd * (nd + 1) * (2 * nd + 1) / 6;
    return nd - d * s1 / m + d * (d + 1) / 2 * s2 / (m * m);
  }
  return numerics::power_sum(d, m + 1, static_cast<std::uint64_t>(n)).value * std::pow(m, d);
}

// sum_{L=1}^{n-1} H_s(L) H_t(L) with H(L) = sum_{k=1}^L k^{-d}
double recent_gram(double d_s, double d_t, std::int64_t n) {
  Kahan hs, ht, acc;
  for (std::int64_t L = 1; L < n; ++L) {
    hs.add(std::pow(double(L), -d_s));
    ht.add(std::pow(double(L), -d_t));
    acc.add(hs.sum * ht.sum);
  }
  return acc.sum;
}

constexpr std::int64_t explicit_window_limit = 100000;

}  // namespace

Estimate past_gram(double d_s, double d_t, std::int64_t n, std::int64_t m_begin) {
  if (n < 1 || m_begin < 0) throw std::invalid_argument("past_gram needs n >= 1 and m_begin >= 0");
  const double c = d_s + d_t - 1;
  if (!(c > 0)) throw RegimeError("past weights are square-summable only for d_s + d_t > 1");
  constexpr int P = 5;
  const std::int64_t m0 = std::max<std::int64_t>(m_begin, 64);

  Kahan head;
  for (std::int64_t m = m0 - 1; m >= m_begin; --m)
    head.add(past_weight(d_s, n, m) * (d_s == d_t ? past_weight(d_s, n, m) : past_weight(d_t, n, m)));

  const double md = double(m0);
  const double inv_c = 1 / c;
  auto integrand = [&](double u) {
    const double m = md * std::pow(u, -inv_c);
    const double ws = scaled_past_weight(d_s, n, m);
    return ws * (d_s == d_t ? ws : scaled_past_weight(d_t, n, m));
  };
  const auto quad = numerics::integrate<double>(integrand, 0.0, 1.0, 1e-300, 1e-13);
  const double scale = 1 / (c * std::pow(md, c));

  // Derivatives of g(m) = w_s(m) w_t(m) at m0: |g^{(k)}| = sum_i C(k,i) (d_s)_i (d_t)_{k-i} PS_s[i] PS_t[k-i]
  std::array<double, 2 * P> ps_s{}, ps_t{};
  for (int r = 0; r < 2 * P; ++r) {
    ps_s[r] = numerics::power_sum(d_s + r, md + 1, static_cast<std::uint64_t>(n)).value;
    ps_t[r] = numerics::power_sum(d_t + r, md + 1, static_cast<std::uint64_t>(n)).value;
  }
  auto deriv = [&](int k) {
    double s = 0, binom = 1;
    for (int i = 0; i <= k; ++i) {
      s += binom * numerics::rising(d_s, i) * numerics::rising(d_t, k - i) * ps_s[i] * ps_t[k - i];
      binom = binom * (k - i) / (i + 1);
    }
    return s;
  };
  const auto& B = numerics::detail::bernoulli_ratio<double>;
  double em = ps_s[0] * ps_t[0] / 2;
  for (int p = 1; p <= P; ++p) em += B[p - 1] * deriv(2 * p - 1);
  const double rem = numerics::detail::remainder_constant<double>(P) * deriv(2 * P - 1);

  const double value = head.sum + scale * quad.value + em;
  return {value, rem + scale * quad.error + 8 * std::numeric_limits<double>::epsilon() * value};
}

Estimate z_gram(double d_s, double d_t, std::int64_t n, std::int64_t window) {
  if (n < 1) throw std::invalid_argument("z_gram needs n >= 1");
  const double recent = recent_gram(d_s, d_t, n);
  Estimate past;
  if (window < 0) {
    past = past_gram(d_s, d_t, n, 0);
  } else if (window <= explicit_window_limit) {
    Kahan acc;
    for (std::int64_t m = window + 1; m >= 0; --m)
      acc.add(past_weight(d_s, n, m) * (d_s == d_t ? past_weight(d_s, n, m) : past_weight(d_t, n, m)));
    past = {acc.sum, 8 * std::numeric_limits<double>::epsilon() * acc.sum};
  } else {
    const auto all = past_gram(d_s, d_t, n, 0);
    const auto tail = past_gram(d_s, d_t, n, window + 2);
    past = {all.value - tail.value, all.error + tail.error};
  }
  const double value = recent + past.value;
  return {value, past.error + 8 * std::numeric_limits<double>::epsilon() * value};
}

double lag_form_gram(double d_s, double d_t, std::int64_t n, std::int64_t window) {
  if (n < 1) throw std::invalid_argument("lag_form_gram needs n >= 1");
  if (window < 0) {
    const LagSeries st(d_s, d_t), ts(d_t, d_s);
    Kahan acc;
    acc.add(double(n) * st(0).value);
    for (std::int64_t h = 1; h < n; ++h) {
      const double g_st = st(h).value;
      const double g_ts = d_s == d_t ? g_st : ts(h).value;
      acc.add(double(n - h) * (g_st + g_ts));
    }
    return acc.sum;
  }
  // n E[X_0(s)X_0(t)] generalizes to the diagonal sum once the window breaks stationarity.
  Kahan diag, upper, lower;
  for (std::int64_t k = 1; k <= n; ++k) {
    diag.add(cross_covariance_windowed(d_s, d_t, 1.0, k, k, window));
    for (std::int64_t l = k + 1; l <= n; ++l) {
      upper.add(cross_covariance_windowed(d_s, d_t, 1.0, k, l, window));
      lower.add(cross_covariance_windowed(d_t, d_s, 1.0, k, l, window));
    }
  }
  return diag.sum + upper.sum + lower.sum;
}

PartialSumCovariance partial_sum_covariance_exact(const ProcessSpec& spec, std::int64_t n, Index s,
                                                  Index t, std::int64_t window, CrossCheck check) {
  if (n < 1) throw std::invalid_argument("partial sums need n >= 1");
  const double sig = spec.sigma(s, t);
  const double ds = spec.d(s), dt = spec.d(t);
  const auto z = z_gram(ds, dt, n, window);
  PartialSumCovariance out{sig * z.value, std::abs(sig) * z.error};

  bool run = check == CrossCheck::always;
  if (check == CrossCheck::automatic) {
    run = window < 0 ? n <= 4096
                     : double(n) * double(n) * double(n + window) <= 2e8;
  }
  if (run) {
    const double lag = lag_form_gram(ds, dt, n, window);
    out.cross_check = sig * lag;
    out.relative_gap = std::abs(lag - z.value) / std::abs(z.value);
    const double tol = window < 0 ? 1e-9 : 1e-10;
    if (!(out.relative_gap <= tol)) {
      std::ostringstream os;
      os << "partial-sum covariance routes disagree: z form " << z.value << " vs lag form " << lag
         << " (relative gap " << out.relative_gap << ", n=" << n << ", d_s=" << ds << ", d_t=" << dt
         << ")";
      throw std::logic_error(os.str());
    }
  }
  return out;
}

Matrix partial_sum_covariance_matrix(const ProcessSpec& spec, std::int64_t n, std::int64_t window) {
  const Index q = spec.size();
  Matrix out(q, q);
  std::map<std::pair<double, double>, double> cache;
  for (Index i = 0; i < q; ++i)
    for (Index j = 0; j <= i; ++j) {
      const double sig = spec.sigma(i, j);
      double v = 0;
      if (sig != 0) {
        const std::pair<double, double> key = std::minmax(spec.d(i), spec.d(j));
        auto it = cache.find(key);
        if (it == cache.end()) it = cache.emplace(key, z_gram(key.first, key.second, n, window).value).first;
        v = sig * it->second;
      }
      out(i, j) = out(j, i) = v;
    }
  return out;
}

std::vector<double> variance_sequence(double d, std::int64_t n_max) {
  if (n_max < 1) return {};
  const LagSeries lag(d, d);
  const double g0 = lag(0).value;
  std::vector<double> v(static_cast<std::size_t>(n_max));
  v[0] = g0;
  Kahan prefix, harmonic;
  const bool boundary = is_boundary(d);
  for (std::int64_t n = 2; n <= n_max; ++n) {
    if (boundary) {
      // gamma(h) = H_h / h at d = 1
      harmonic.add(1.0 / double(n - 1));
      prefix.add(harmonic.sum / double(n - 1));
    } else {
      prefix.add(lag(n - 1).value);
    }
    v[static_cast<std::size_t>(n - 1)] = v[static_cast<std::size_t>(n - 2)] + g0 + 2 * prefix.sum;
  }
  return v;
}

std::int64_t choose_past_cut(const ProcessSpec& spec, std::int64_t n) {
  std::map<double, std::int64_t> per_d;
  std::int64_t cut = 0;
  for (Index i = 0; i < spec.size(); ++i) {
    if (spec.sigma(i, i) == 0) continue;
    const double d = spec.d(i);
    auto it = per_d.find(d);
    if (it == per_d.end()) {
      const double var = z_gram(d, d, n).value;
      const double r = spec.tail_tol * var * (2 * d - 1) / (double(n) * double(n));
      const double need = std::ceil(std::pow(r, -1 / (2 * d - 1))) - 2;
      if (!(need <= double(spec.hard_cap))) {
        std::ostringstream os;
        os << "tail budget unreachable: past cut " << need << " exceeds cap " << spec.hard_cap
           << " at d=" << d << ", n=" << n << ", tail_tol=" << spec.tail_tol;
        throw BudgetError(os.str());
      }
      it = per_d.emplace(d, std::max<std::int64_t>(0, static_cast<std::int64_t>(need))).first;
    }
    cut = std::max(cut, it->second);
  }
  return cut;
}

CoefficientTable z_coefficients(const ProcessSpec& spec, std::int64_t n, std::int64_t past_cut) {
  if (n < 2) throw std::invalid_argument("z coefficients need n >= 2");
  if (past_cut < 0) throw std::invalid_argument("past_cut must be non-negative");
  if (past_cut > spec.hard_cap) throw BudgetError("tail budget unreachable: past_cut above hard cap");
  const Index q = spec.size();
  const Index rows = static_cast<Index>(n + past_cut + 1);
  CoefficientTable table{n, past_cut, Matrix(rows, q), Vector(q), Matrix(q, q)};

  std::map<double, Vector> columns;
  for (Index i = 0; i < q; ++i) {
    const double d = spec.d(i);
    auto it = columns.find(d);
    if (it == columns.end()) {
      Vector col(rows);
      // 2 <= j <= n: H(n - j + 1)
      Kahan h;
      for (std::int64_t L = 1; L < n; ++L) {
        h.add(std::pow(double(L), -d));
        col[static_cast<Index>(n - L + 1 + past_cut)] = h.sum;
      }
      // j <= 1: sum_{k=1}^n (k - j + 1)^{-d}
      for (std::int64_t j = 1; j >= -past_cut; --j) col[static_cast<Index>(j + past_cut)] = past_weight(d, n, 1 - j);
      it = columns.emplace(d, std::move(col)).first;
    }
    table.z.col(i) = it->second;
    table.tail_var[i] = spec.sigma(i, i) * double(n) * double(n) *
                        std::pow(double(past_cut + 2), 1 - 2 * d) / (2 * d - 1);
  }
  std::map<std::pair<double, double>, double> cache;
  for (Index i = 0; i < q; ++i)
    for (Index j = 0; j <= i; ++j) {
      const double sig = spec.sigma(i, j);
      double v = 0;
      if (sig != 0) {
        const std::pair<double, double> key = std::minmax(spec.d(i), spec.d(j));
        auto it = cache.find(key);
        if (it == cache.end())
          it = cache.emplace(key, past_gram(key.first, key.second, n, past_cut + 2).value).first;
        v = sig * it->second;
      }
      table.tail_cov(i, j) = table.tail_cov(j, i) = v;
    }
  return table;
}

}  // namespace lmem
