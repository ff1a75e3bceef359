#include <doctest.h>

#include <cmath>
#include <random>

#include "lmem/mcverify.hpp"

using namespace lmem;

namespace {

ProcessSpec spec_with(double d, Index q, bool wiener = true) {
  ProcessSpec s;
  s.grid.points = Vector::LinSpaced(q, 1.0 / double(q), 1.0);
  s.grid.weights = Vector::Constant(q, 1.0 / double(q));
  s.memory = MemoryFunction::constant(s.grid, d);
  s.innovations = wiener ? InnovationModel::wiener(s.grid) : InnovationModel::white(Vector::Ones(q));
  s.seed = 5;
  return s;
}

Matrix normal_samples(Index rows, Index cols, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = nd(gen);
  return m;
}

double local_slope_oracle(double d, const std::vector<std::int64_t>& ns) {
  // Var(S_n) ~ A n^{3-2d} + B n^{2-d} with A = c(d,d)/((1-d)(3-2d)), B = 2 zeta(d)/((1-d)(2-d))
  const double A = std::beta(1 - d, 2 * d - 1) / ((1 - d) * (3 - 2 * d));
  const double B = 2 * std::riemann_zeta(d) / ((1 - d) * (2 - d));
  double mx = 0, my = 0;
  std::vector<double> x, y;
  for (auto n : ns) {
    x.push_back(std::log(double(n)));
    y.push_back(std::log(A * std::pow(double(n), 3 - 2 * d) + B * std::pow(double(n), 2 - d)));
    mx += x.back();
    my += y.back();
  }
  mx /= double(ns.size());
  my /= double(ns.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

std::vector<std::int64_t> dyadic(int lo, int hi) {
  std::vector<std::int64_t> v;
  for (int k = lo; k <= hi; ++k) v.push_back(std::int64_t{1} << k);
  return v;
}

}  // namespace

TEST_CASE("moment accumulation is merge invariant") {
  const Matrix x = normal_samples(1000, 5, 1);
  const auto whole = accumulate_rows(x, 1000);
  for (std::int64_t shard : {1, 7, 50, 999}) {
    const auto parts = accumulate_rows(x, shard);
    CHECK(parts.count() == 1000);
    const double scale = whole.second_moment().cwiseAbs().maxCoeff();
    CHECK((parts.second_moment() - whole.second_moment()).cwiseAbs().maxCoeff() <= 1e-12 * scale);
  }
  const Matrix direct = x.transpose() * x / 1000.0;
  CHECK((whole.second_moment() - direct).cwiseAbs().maxCoeff() <= 1e-12 * direct.cwiseAbs().maxCoeff());
}

TEST_CASE("normality diagnostics on exactly normal samples") {
  const Matrix x = normal_samples(4000, 3, 2);
  const auto r = normality_diagnostics(x, Vector::Ones(3));
  for (const auto& p : r) {
    CHECK(p.skew_ok);
    CHECK(p.kurt_ok);
    CHECK(p.ks_distance < 1.63 / std::sqrt(4000.0));  // 1% Kolmogorov critical value
  }
  CHECK_THROWS_AS(normality_diagnostics(x.topRows(100)), std::invalid_argument);
}

TEST_CASE("normality diagnostics flag skewed samples") {
  std::mt19937_64 gen(3);
  std::exponential_distribution<double> ex;
  Matrix x(4000, 1);
  for (Index i = 0; i < 4000; ++i) x(i, 0) = ex(gen) - 1;
  const auto r = normality_diagnostics(x);
  CHECK_FALSE(r[0].skew_ok);
  CHECK(r[0].skewness == doctest::Approx(2).epsilon(0.15));
  CHECK_FALSE(r[0].kurt_ok);
}

TEST_CASE("CLT experiment is deterministic across thread counts") {
  const auto spec = spec_with(0.75, 4);
  CltOptions o;
  o.n = 64;
  o.replications = 300;
  o.seed = 42;
  o.shard_size = 7;
  const auto one = run_clt_experiment(spec, o);
  o.threads = 3;
  const auto three = run_clt_experiment(spec, o);
  CHECK(one.samples == three.samples);
  CHECK(one.report.empirical == three.report.empirical);
  CHECK(one.report.se_method == "gaussian-fourth-moment");
  CHECK(one.report.regime == Regime::long_memory);
  CHECK(one.report.past_cut == 4 * 64);
  const Matrix expect = partial_sum_covariance_matrix(spec, 64) / std::pow(64.0, 2 * (1.5 - 0.75));
  CHECK((one.report.finite_n_exact - expect).cwiseAbs().maxCoeff() <= 1e-12 * expect.maxCoeff());
  CHECK(one.report.all_pass());
}

TEST_CASE("uncorrelated points give empirical covariance near zero") {
  const auto spec = spec_with(1.0, 3, false);
  CltOptions o;
  o.n = 128;
  o.replications = 1000;
  o.seed = 9;
  const auto r = run_clt_experiment(spec, o).report;
  CHECK(r.regime == Regime::boundary);
  CHECK(r.limit == Matrix::Identity(3, 3));
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 3; ++j)
      if (i != j) CHECK(std::abs(r.empirical(i, j)) <= 4 * r.se(i, j));
}

TEST_CASE("heavy-tailed innovations use jackknife standard errors") {
  auto spec = spec_with(0.7, 2);
  spec.innovations.law = InnovationLaw::pareto;
  spec.innovations.pareto_alpha = 4;
  CltOptions o;
  o.n = 64;
  o.replications = 400;
  const auto r = run_clt_experiment(spec, o).report;
  CHECK(r.se_method == "jackknife");
  CHECK((r.se.array() > 0).all());
}

TEST_CASE("CLT experiment refuses mixed regimes") {
  auto spec = spec_with(0.7, 3);
  spec.memory = MemoryFunction::table((Vector(3) << 0.7, 0.7, 2.0).finished());
  CHECK_THROWS_WITH_AS(run_clt_experiment(spec, CltOptions{}), doctest::Contains("mixed regimes"), RegimeError);
}

TEST_CASE("variance exponent fit follows the two-term expansion") {
  for (double d : {0.6, 0.7}) {
    ProcessSpec s = spec_with(d, 1, false);
    for (auto [lo, hi, tol] : {std::tuple{10, 16, 5e-3}, std::tuple{14, 20, 1e-3}}) {
      const auto ns = dyadic(lo, hi);
      const auto f = fit_variance_exponent(s, ns);
      CAPTURE(d);
      CAPTURE(lo);
      CHECK(std::abs(f.points[0].slope - local_slope_oracle(d, ns)) <= tol);
      CHECK(f.points[0].theoretical == doctest::Approx(3 - 2 * d));
    }
  }
}

TEST_CASE("variance exponent error shrinks as the horizons grow") {
  for (double d : {0.6, 0.7, 0.8, 0.9}) {
    const ProcessSpec s = spec_with(d, 1, false);
    double prev = INFINITY;
    for (int lo : {6, 10, 14}) {
      const auto f = fit_variance_exponent(s, dyadic(lo, lo + 6));
      CHECK(f.points[0].abs_error < prev);
      prev = f.points[0].abs_error;
    }
  }
}

TEST_CASE("boundary exponent fit uses the log-corrected model") {
  const ProcessSpec s = spec_with(1.0, 1, false);
  const auto f = fit_variance_exponent(s, dyadic(10, 20));
  const auto& p = f.points[0];
  CHECK(p.regime == Regime::boundary);
  CHECK(p.theoretical == 1.0);
  CHECK(p.abs_error < 0.01);
  REQUIRE(p.corrected_ratio.size() == 11);
  CHECK(std::abs(p.corrected_ratio.back() - 1) <= 0.25);
}

TEST_CASE("exponent fit input checks") {
  const ProcessSpec s = spec_with(0.7, 1);
  CHECK_THROWS_AS(fit_variance_exponent(s, dyadic(10, 13)), std::invalid_argument);
  CHECK_THROWS_AS(fit_variance_exponent(s, {1024, 2048, 3000, 8192, 16384}), std::invalid_argument);
}
