#include <doctest.h>

#include <cmath>
#include <set>

#include "lmem/simulate.hpp"
#include "oracles.hpp"

using namespace lmem;

namespace {

ProcessSpec wiener_spec(const Vector& d, std::int64_t horizon = 8) {
  ProcessSpec s;
  s.grid.points = Vector::LinSpaced(d.size(), 0.2, 1.0);
  s.grid.weights = Vector::Constant(d.size(), 1.0 / double(d.size()));
  s.memory = MemoryFunction::table(d);
  s.innovations = InnovationModel::wiener(s.grid);
  s.horizon = horizon;
  s.seed = 1234;
  return s;
}

}  // namespace

TEST_CASE("Philox4x32-10 known-answer vectors") {
  using rng::Philox4x32;
  CHECK(Philox4x32::generate({0, 0, 0, 0}, {0, 0}) ==
        Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(Philox4x32::generate({~0u, ~0u, ~0u, ~0u}, {~0u, ~0u}) ==
        Philox4x32::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(Philox4x32::generate({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
        Philox4x32::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("counter streams are distinct and uniform draws stay inside (0,1)") {
  const rng::CounterRng a(1, 1), b(1, 2), c(2, 1);
  CHECK(a.block(0, 0) != b.block(0, 0));
  CHECK(a.block(0, 0) != c.block(0, 0));
  CHECK(rng::CounterRng::to_open_unit(0, 0) > 0);
  CHECK(rng::CounterRng::to_open_unit(~0u, ~0u) < 1);

  // moments of 2e5 normals within 5 standard errors
  const int N = 100000;
  double s1 = 0, s2 = 0, s4 = 0;
  for (int i = 0; i < N; ++i)
    for (double x : a.normals(std::uint64_t(i), 7)) {
      s1 += x;
      s2 += x * x;
      s4 += x * x * x * x;
    }
  const double M = 2.0 * N;
  CHECK(std::abs(s1 / M) < 5 / std::sqrt(M));
  CHECK(std::abs(s2 / M - 1) < 5 * std::sqrt(2 / M));
  CHECK(std::abs(s4 / M - 3) < 5 * std::sqrt(96 / M));
}

TEST_CASE("innovations reproduce the Wiener covariance") {
  const auto grid = SpaceGrid::uniform(0.25, 1, 4);
  const auto model = InnovationModel::wiener(grid);
  const std::int64_t N = 40000;
  const Matrix eps = sample_innovations(model, N, 5);
  const Matrix cov = eps.transpose() * eps / double(N);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 4; ++j) {
      const double se = std::sqrt((model.sigma(i, i) * model.sigma(j, j) + model.sigma(i, j) * model.sigma(i, j)) / N);
      CHECK(std::abs(cov(i, j) - model.sigma(i, j)) < 5 * se);
    }
  CHECK(sample_innovations(model, 10, 5) == eps.topRows(10));
}

TEST_CASE("innovation draws depend only on (seed, replication, time)") {
  const auto spec = wiener_spec(Vector::Constant(5, 0.7));
  const InnovationSource a(spec.innovations, {9, 3}), b(spec.innovations, {9, 3}), c(spec.innovations, {9, 4});
  const Vector late = a(1000);
  (void)a(-7);
  CHECK(a(1000) == late);
  CHECK(b(1000) == late);
  CHECK(c(1000) != late);
  CHECK(a(-5) != a(5));
}

TEST_CASE("standardized Pareto innovations have unit variance") {
  const auto grid = SpaceGrid::uniform(0, 1, 2);
  auto model = InnovationModel::white(Vector::Ones(2));
  model.law = InnovationLaw::pareto;
  model.pareto_alpha = 6;  // finite fourth moment: E x^4 = alpha/(alpha-4) / scale^4
  const std::int64_t N = 200000;
  const Matrix eps = sample_innovations(model, N, 17);
  const double a = model.pareto_alpha;
  const double m4 = (a / (a - 4)) / std::pow(a / (a - 2), 2);
  const double var = eps.array().square().mean();
  CHECK(std::abs(var - 1) < 5 * std::sqrt((m4 - 1) / (2.0 * N)));
  CHECK(std::abs(eps.mean()) < 5 / std::sqrt(2.0 * N));
  model.pareto_alpha = 2;
  CHECK_THROWS_AS(InnovationSource(model, {1, 0}), ValidationError);
}

TEST_CASE("paths follow the moving-average definition") {
  const Vector d = (Vector(3) << 0.6, 1.0, 2.0).finished();
  const auto spec = wiener_spec(d, 6);
  const std::int64_t W = 40;
  const auto p = generate_paths(spec, 6, W, {spec.seed, 0});
  const InnovationSource src(spec.innovations, {spec.seed, 0});
  for (std::int64_t k = 1; k <= 6; ++k)
    for (Index i = 0; i < 3; ++i) {
      long double x = 0;
      for (std::int64_t j = k; j >= -W; --j) x += std::pow((long double)(k - j + 1), -(long double)d[i]) * src(j)[i];
      CHECK(std::abs(p.values(k - 1, i) - double(x)) <= 1e-13 * (1 + std::abs(double(x))));
    }
  CHECK(p.truncation_bias[0] == doctest::Approx(spec.sigma(0, 0) * truncation_tail_bound(0.6, W)));
}

TEST_CASE("direct and z-representation partial sums coincide") {
  const Vector d = (Vector(4) << 0.55, 0.8, 1.0, 2.5).finished();
  for (std::int64_t n : {2, 3, 17, 128}) {
    const auto spec = wiener_spec(d, n);
    const auto paths = generate_paths(spec, n, 3 * n, {77, 2});
    const auto table = z_coefficients(spec, n, 3 * n);
    const Vector a = partial_sums_direct(paths);
    const Vector b = partial_sums_via_z(spec, table, paths);
    CHECK(((a - b).cwiseAbs().array() <= 1e-12 * a.cwiseAbs().array().max(1e-300)).all());
  }
}

TEST_CASE("z route refuses a table built for another window") {
  const auto spec = wiener_spec(Vector::Constant(3, 0.7), 10);
  const auto paths = generate_paths(spec, 10, 20, {1, 0});
  CHECK_THROWS_WITH_AS(partial_sums_via_z(spec, z_coefficients(spec, 10, 21), paths),
                       doctest::Contains("window mismatch"), std::invalid_argument);
  auto other = spec;
  other.seed = 99;
  CHECK_THROWS_AS(partial_sums_via_z(other, z_coefficients(other, 10, 20), paths), std::invalid_argument);
}

TEST_CASE("path window follows the truncation rule at the smallest exponent") {
  auto spec = wiener_spec((Vector(3) << 0.9, 0.75, 2.0).finished());
  spec.tail_tol = 1e-2;
  CHECK(path_window(spec) == truncation_length(0.75, 1e-2));
  spec.memory.values[1] = 0.51;
  spec.tail_tol = 1e-6;
  CHECK_THROWS_AS(path_window(spec), BudgetError);
}

TEST_CASE("partial-sum sampler without remainder equals the z route") {
  const auto spec = wiener_spec(Vector::Constant(4, 0.7), 32);
  const PartialSumSampler sampler(spec, 32, 64, false);
  const SeedRecord rec{3, 11};
  const Vector a = sampler(rec);
  const Vector b = partial_sums_via_z(spec, sampler.table(), rec);
  CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12 * b.cwiseAbs().maxCoeff());
}

TEST_CASE("partial-sum sampler has the exact finite-n covariance") {
  const Vector d = (Vector(3) << 0.7, 0.7, 0.7).finished();
  const auto spec = wiener_spec(d, 16);
  const PartialSumSampler sampler(spec, 16, 8);
  const std::int64_t N = 20000;
  Matrix acc = Matrix::Zero(3, 3);
  for (std::int64_t r = 0; r < N; ++r) {
    const Vector x = sampler({21, std::uint64_t(r)});
    acc.noalias() += x * x.transpose();
  }
  acc /= double(N);
  const Matrix K = partial_sum_covariance_matrix(spec, 16);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 3; ++j) {
      const double se = std::sqrt((K(i, i) * K(j, j) + K(i, j) * K(i, j)) / double(N));
      CAPTURE(i);
      CAPTURE(j);
      CHECK(std::abs(acc(i, j) - K(i, j)) < 5 * se);
    }
  // dropping the far past loses variance that the exact matrix keeps
  const double kept = z_gram(0.7, 0.7, 16, 8).value;
  CHECK(kept < K(0, 0) / spec.sigma(0, 0));
}
