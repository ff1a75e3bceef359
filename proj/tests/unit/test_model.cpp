#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "lmem/config.hpp"
#include "lmem/model.hpp"
#include "oracles.hpp"

using namespace lmem;

namespace {

ProcessSpec constant_spec(double d, Index q = 4) {
  ProcessSpec s;
  s.grid = SpaceGrid::uniform(0, 1, q);
  s.memory = MemoryFunction::constant(s.grid, d);
  s.innovations = InnovationModel::white(Vector::Ones(q));
  return s;
}

bool mentions(const ValidationReport& r, const std::string& needle) {
  return r.summary().find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("uniform grid carries equal weights summing to the interval length") {
  const auto g = SpaceGrid::uniform(0, 2, 5);
  CHECK(g.size() == 5);
  CHECK(g.points[0] == 0.0);
  CHECK(g.points[4] == 2.0);
  CHECK(g.total_measure() == doctest::Approx(2.0));
  CHECK(g.integrate(Vector::Ones(5)) == doctest::Approx(2.0));
}

TEST_CASE("step memory function switches level at the breakpoint") {
  const auto g = SpaceGrid::uniform(0, 1, 101);
  const auto m = MemoryFunction::step(g, {0.5}, {0.6, 2.0});
  CHECK(m(0) == 0.6);
  CHECK(m(49) == 0.6);
  CHECK(m(50) == 2.0);  // t = 1/2 belongs to the upper piece
  CHECK(m(100) == 2.0);
  CHECK_THROWS_AS(MemoryFunction::step(g, {0.5}, {0.6}), ValidationError);
}

TEST_CASE("regime classification") {
  CHECK(classify_regime(0.75) == Regime::long_memory);
  CHECK(classify_regime(1.0) == Regime::boundary);
  CHECK(classify_regime(1.0 + 1e-13) == Regime::boundary);
  CHECK(classify_regime(1.0 + 1e-9) == Regime::short_memory);
  CHECK(classify_regime(2.0) == Regime::short_memory);
}

TEST_CASE("validation rejects d <= 1/2 and names the location") {
  auto s = constant_spec(0.5);
  const auto r = validate(s);
  CHECK_FALSE(r.ok());
  CHECK(mentions(r, "d > 1/2"));
  CHECK(mentions(r, "t=0"));
  CHECK_THROWS_AS(require_valid(s), ValidationError);
}

TEST_CASE("validation of the innovation covariance") {
  auto s = constant_spec(0.7, 3);
  Matrix bad(3, 3);
  bad << 1, 2, 0, 2, 1, 0, 0, 0, 1;  // eigenvalue -1
  s.innovations = InnovationModel::custom(bad);
  CHECK(mentions(validate(s), "positive semidefinite"));

  Matrix asym = Matrix::Identity(3, 3);
  asym(0, 1) = 0.5;
  s.innovations = InnovationModel::custom(asym);
  CHECK(mentions(validate(s), "not symmetric"));

  s.innovations = InnovationModel::white(Vector::Ones(3));
  s.innovations.law = InnovationLaw::pareto;
  s.innovations.pareto_alpha = 2.0;
  CHECK(mentions(validate(s), "alpha > 2"));
}

TEST_CASE("loose truncation tolerance warns, invalid tolerance fails") {
  auto s = constant_spec(0.7);
  s.tail_tol = 0.05;
  auto r = validate(s);
  CHECK(r.ok());
  CHECK(r.warnings.size() == 1);
  s.tail_tol = 1.5;
  CHECK_FALSE(validate(s).ok());
}

TEST_CASE("CLT applicability by regime") {
  CHECK(require_clt(constant_spec(0.7)) == CltPart::part_i);
  CHECK(require_clt(constant_spec(1.0)) == CltPart::part_ii);
  auto s = constant_spec(0.7, 4);
  s.memory = MemoryFunction::table((Vector(4) << 0.6, 0.6, 2.0, 2.0).finished());
  CHECK(validate(s).ok());
  CHECK_THROWS_WITH_AS(require_clt(s), doctest::Contains("CLT not stated for mixed regimes"), RegimeError);
  s.memory = MemoryFunction::table((Vector(4) << 0.6, 0.6, 1.0, 1.0).finished());
  CHECK_THROWS_AS(require_clt(s), RegimeError);
}

TEST_CASE("psd_factor reproduces the covariance and jitters singular inputs") {
  Matrix a(3, 3);
  a << 4, 2, 0.6, 2, 2, 0.5, 0.6, 0.5, 3;
  auto f = psd_factor(a);
  CHECK(f.jitter == 0.0);
  CHECK((f.lower * f.lower.transpose() - a).cwiseAbs().maxCoeff() < 1e-14);

  // Wiener covariance with a point at t = 0 is singular
  const auto m = InnovationModel::wiener(SpaceGrid::uniform(0, 1, 5));
  CHECK(m.factor_ok);
  CHECK(m.jitter > 0);
  CHECK((m.factor * m.factor.transpose() - m.sigma).cwiseAbs().maxCoeff() < 1e-10);

  Matrix neg = -Matrix::Identity(2, 2);
  CHECK_THROWS_AS(psd_factor(neg), ValidationError);
}

TEST_CASE("truncation_length is the smallest admissible window") {
  for (double d : {0.55, 0.7, 0.9, 1.0, 1.5}) {
    for (double tol : {1e-2, 1e-3, 1e-4}) {
      const double total = std::riemann_zeta(2 * d);
      auto ok = [&](double M) { return std::pow(M, 1 - 2 * d) / (2 * d - 1) <= tol * total; };
      // bisection oracle on integers
      double lo = 0, hi = 1;
      while (!ok(hi) && hi <= 2.0 * double(default_hard_cap)) hi *= 2;
      while (ok(hi) && hi - lo > 1) {
        const double mid = std::floor((lo + hi) / 2);
        (ok(mid) ? hi : lo) = mid;
      }
      if (!ok(hi) || hi > double(default_hard_cap)) {
        CHECK_THROWS_AS(truncation_length(d, tol), BudgetError);
        continue;
      }
      CAPTURE(d);
      CAPTURE(tol);
      CHECK(truncation_length(d, tol) == std::int64_t(hi));
    }
  }
  CHECK(truncation_length(0.7, 1.0) == 0);
  CHECK_THROWS_WITH_AS(truncation_length(0.51, 1e-6), doctest::Contains("tail budget unreachable"), BudgetError);
}

TEST_CASE("truncation_tail_bound bounds the dropped variance") {
  for (double d : {0.6, 0.8, 1.0}) {
    for (std::int64_t M : {1, 10, 1000}) {
      // sum_{j>M} (j+1)^{-2d} = zeta(2d) - sum_{i=1}^{M+1} i^{-2d}
      const double dropped = std::riemann_zeta(2 * d) - double(oracle::power_sum(2 * d, 1, M + 1));
      CHECK(dropped <= truncation_tail_bound(d, M));
      CHECK(dropped >= std::pow(double(M + 2), 1 - 2 * d) / (2 * d - 1));
    }
  }
}

TEST_CASE("process hash tracks every field") {
  auto a = constant_spec(0.7);
  auto b = a;
  CHECK(a.hash() == b.hash());
  b.seed = 1;
  CHECK(a.hash() != b.hash());
  b = a;
  b.memory.values[2] = 0.71;
  CHECK(a.hash() != b.hash());
}

TEST_CASE("spec_from_json reads every memory and innovation kind") {
  using nlohmann::json;
  auto j = json::parse(R"({
    "grid": {"uniform": {"lower": 0, "upper": 1, "count": 11}},
    "memory": {"kind": "step", "breakpoints": [0.5], "levels": [0.6, 0.7]},
    "innovations": {"kind": "wiener", "law": "pareto", "pareto_alpha": 4.5},
    "tail_tol": 0.002, "horizon": 5, "seed": 99})");
  auto s = spec_from_json(j);
  CHECK(s.size() == 11);
  CHECK(s.d(4) == 0.6);
  CHECK(s.d(5) == 0.7);
  CHECK(s.sigma(3, 7) == doctest::Approx(0.3));
  CHECK(s.innovations.law == InnovationLaw::pareto);
  CHECK(s.innovations.pareto_alpha == 4.5);
  CHECK(s.tail_tol == 0.002);
  CHECK(s.horizon == 5);
  CHECK(s.seed == 99);

  const auto dir = std::filesystem::temp_directory_path() / "lmem_unit_cfg";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "sigma.csv") << "# covariance\n2,0.5\n0.5,1\n";
  j = json::parse(R"({"grid": {"points": [0.2, 0.8]}, "memory": {"kind": "table", "values": [0.6, 0.9]},
                      "innovations": {"kind": "custom", "sigma_file": "sigma.csv"}})");
  s = spec_from_json(j, dir);
  CHECK(s.sigma(0, 0) == 2.0);
  CHECK(s.sigma(0, 1) == 0.5);
  CHECK(s.grid.weights[0] == 0.5);
  CHECK(validate(s).ok());

  j["memory"]["kind"] = "spline";
  CHECK_THROWS_AS(spec_from_json(j, dir), ValidationError);
  CHECK_THROWS_AS(spec_from_json(json::parse(R"({"grid": {}})")), ValidationError);
}
