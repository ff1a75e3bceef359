#include "lmem/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include "lmem/numerics.hpp"

namespace lmem {

SpaceGrid SpaceGrid::uniform(double lower, double upper, Index count) {
  if (count < 1 || !(upper > lower)) throw ValidationError("uniform grid needs count >= 1 and upper > lower");
  SpaceGrid g;
  g.points = count == 1 ? Vector(Vector::Constant(1, lower)) : Vector(Vector::LinSpaced(count, lower, upper));
  g.weights = Vector::Constant(count, (upper - lower) / double(count));
  return g;
}

MemoryFunction MemoryFunction::constant(const SpaceGrid& grid, double d) {
  MemoryFunction m;
  m.kind = MemoryKind::constant;
  m.values = Vector::Constant(grid.size(), d);
  m.levels = {d};
  return m;
}

MemoryFunction MemoryFunction::step(const SpaceGrid& grid, std::vector<double> breakpoints,
                                    std::vector<double> levels) {
  if (levels.size() != breakpoints.size() + 1)
    throw ValidationError("step memory needs exactly one more level than breakpoints");
  if (!std::is_sorted(breakpoints.begin(), breakpoints.end()))
    throw ValidationError("step memory breakpoints must be increasing");
  MemoryFunction m;
  m.kind = MemoryKind::step;
  m.values.resize(grid.size());
  for (Index i = 0; i < grid.size(); ++i) {
    const auto n = std::upper_bound(breakpoints.begin(), breakpoints.end(), grid.points[i]) -
                   breakpoints.begin();
    m.values[i] = levels[static_cast<std::size_t>(n)];
  }
  m.breakpoints = std::move(breakpoints);
  m.levels = std::move(levels);
  return m;
}

MemoryFunction MemoryFunction::table(Vector values) {
  MemoryFunction m;
  m.kind = MemoryKind::table;
  m.values = std::move(values);
  return m;
}

std::string_view to_string(InnovationKind k) {
  switch (k) {
    case InnovationKind::white: return "white";
    case InnovationKind::wiener: return "wiener";
    case InnovationKind::custom: return "custom";
  }
  return "unknown";
}

std::string_view to_string(InnovationLaw l) {
  return l == InnovationLaw::gaussian ? "gaussian" : "pareto";
}

std::string_view to_string(CltPart p) {
  switch (p) {
    case CltPart::none: return "none";
    case CltPart::part_i: return "i";
    case CltPart::part_ii: return "ii";
  }
  return "unknown";
}

PsdFactor psd_factor(const Matrix& sigma) {
  const Index q = sigma.rows();
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() == Eigen::Success) return {llt.matrixL(), 0.0};
  const double jitter = 1e-12 * std::max(sigma.trace(), 0.0) / double(q);
  if (jitter > 0) {
    llt.compute(sigma + jitter * Matrix::Identity(q, q));
    if (llt.info() == Eigen::Success) return {llt.matrixL(), jitter};
  }
  throw ValidationError("covariance matrix is not positive semidefinite (Cholesky failed after jitter)");
}

namespace {

void attach_factor(InnovationModel& m) {
  try {
    auto f = psd_factor(m.sigma);
    m.factor = std::move(f.lower);
    m.jitter = f.jitter;
    m.factor_ok = true;
  } catch (const ValidationError&) {
    m.factor_ok = false;
  }
}

}  // namespace

InnovationModel InnovationModel::white(const Vector& sigma2) {
  InnovationModel m;
  m.kind = InnovationKind::white;
  m.sigma = sigma2.asDiagonal();
  attach_factor(m);
  return m;
}

InnovationModel InnovationModel::wiener(const SpaceGrid& grid) {
  InnovationModel m;
  m.kind = InnovationKind::wiener;
  const Index q = grid.size();
  m.sigma.resize(q, q);
  for (Index i = 0; i < q; ++i)
    for (Index j = 0; j < q; ++j) m.sigma(i, j) = std::min(grid.points[i], grid.points[j]);
  attach_factor(m);
  return m;
}

InnovationModel InnovationModel::custom(const Matrix& sigma) {
  InnovationModel m;
  m.kind = InnovationKind::custom;
  m.sigma = sigma;
  attach_factor(m);
  return m;
}

std::uint64_t ProcessSpec::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ull;
    }
  };
  auto mix_vec = [&](const Vector& v) {
    const Index n = v.size();
    mix(&n, sizeof n);
    mix(v.data(), sizeof(double) * static_cast<std::size_t>(n));
  };
  mix_vec(grid.points);
  mix_vec(grid.weights);
  mix_vec(memory.values);
  const Vector flat = Eigen::Map<const Vector>(innovations.sigma.data(), innovations.sigma.size());
  mix_vec(flat);
  const int kind = static_cast<int>(innovations.kind);
  const int law = static_cast<int>(innovations.law);
  mix(&kind, sizeof kind);
  mix(&law, sizeof law);
  mix(&innovations.pareto_alpha, sizeof(double));
  mix(&tail_tol, sizeof tail_tol);
  mix(&horizon, sizeof horizon);
  mix(&seed, sizeof seed);
  return h;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < fatal.size(); ++i) os << (i ? "; " : "") << fatal[i];
  return os.str();
}

ValidationReport validate(const ProcessSpec& spec) {
  ValidationReport r;
  const auto& g = spec.grid;
  const Index q = g.size();
  auto at = [&](Index i) {
    std::ostringstream os;
    os << "grid point " << i << " (t=" << g.points[i] << ")";
    return os.str();
  };

  if (q == 0) r.fatal.push_back("grid is empty");
  if (g.weights.size() != q) r.fatal.push_back("grid points and weights differ in length");
  for (Index i = 1; i < q; ++i)
    if (!(g.points[i] > g.points[i - 1])) r.fatal.push_back(at(i) + ": points not strictly increasing");
  for (Index i = 0; i < std::min(q, g.weights.size()); ++i)
    if (!(g.weights[i] > 0)) r.fatal.push_back(at(i) + ": weight must be positive");

  if (spec.memory.values.size() != q) {
    r.fatal.push_back("memory function and grid differ in length");
  } else {
    r.regimes.reserve(static_cast<std::size_t>(q));
    Index bad = 0, first = -1;
    for (Index i = 0; i < q; ++i) {
      const double d = spec.memory(i);
      if (!(d > 0.5)) {
        if (bad++ == 0) first = i;
        r.regimes.push_back(Regime::long_memory);
      } else {
        r.regimes.push_back(classify_regime(d));
      }
    }
    if (bad > 0) {
      std::ostringstream os;
      os << at(first) << ": d=" << spec.memory(first)
         << " violates d > 1/2 (the moving-average series diverges)";
      if (bad > 1) os << ", " << bad - 1 << " more point(s) likewise";
      r.fatal.push_back(os.str());
    }
  }

  const auto& sig = spec.innovations.sigma;
  if (sig.rows() != q || sig.cols() != q) {
    r.fatal.push_back("innovation covariance and grid differ in size");
  } else if (q > 0) {
    const double scale = std::max(sig.cwiseAbs().maxCoeff(), 1e-300);
    if ((sig - sig.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      r.fatal.push_back("innovation covariance is not symmetric");
    for (Index i = 0; i < q; ++i)
      if (sig(i, i) < 0) r.fatal.push_back(at(i) + ": negative innovation variance");
    Eigen::SelfAdjointEigenSolver<Matrix> es(sig, Eigen::EigenvaluesOnly);
    const double lmax = es.eigenvalues().maxCoeff();
    const double lmin = es.eigenvalues().minCoeff();
    if (lmin < -1e-10 * std::max(lmax, 0.0) || lmax < 0) {
      std::ostringstream os;
      os << "innovation covariance is not positive semidefinite (smallest eigenvalue " << lmin << ")";
      r.fatal.push_back(os.str());
    } else if (!spec.innovations.factor_ok) {
      r.fatal.push_back("innovation covariance could not be factored");
    }
    if (spec.innovations.kind == InnovationKind::white && !sig.isDiagonal())
      r.fatal.push_back("white innovations must have a diagonal covariance");
  }
  if (spec.innovations.law == InnovationLaw::pareto && !(spec.innovations.pareto_alpha > 2))
    r.fatal.push_back("Pareto innovations need tail index alpha > 2 for finite variance");

  if (!(spec.tail_tol > 0 && spec.tail_tol < 1)) {
    r.fatal.push_back("tail_tol must lie in (0, 1)");
  } else if (spec.tail_tol > 0.01) {
    r.warnings.push_back("tail_tol above 0.01 exceeds the default truncation policy");
  }
  if (spec.horizon < 1) r.fatal.push_back("horizon must be at least 1");

  if (r.fatal.empty() && !r.regimes.empty()) {
    const bool all_long = std::all_of(r.regimes.begin(), r.regimes.end(),
                                      [](Regime x) { return x == Regime::long_memory; });
    const bool all_boundary = std::all_of(r.regimes.begin(), r.regimes.end(),
                                          [](Regime x) { return x == Regime::boundary; });
    r.clt = all_long ? CltPart::part_i : all_boundary ? CltPart::part_ii : CltPart::none;
  }
  return r;
}

void require_valid(const ProcessSpec& spec) {
  auto r = validate(spec);
  if (!r.ok()) throw ValidationError(r.summary());
}

CltPart require_clt(const ProcessSpec& spec) {
  auto r = validate(spec);
  if (!r.ok()) throw ValidationError(r.summary());
  if (r.clt == CltPart::none)
    throw RegimeError("CLT not stated for mixed regimes: need 1/2 < d < 1 everywhere or d == 1 everywhere");
  return r.clt;
}

double truncation_tail_bound(double d, std::int64_t M) {
  if (M <= 0) return std::numeric_limits<double>::infinity();
  return std::pow(double(M), 1 - 2 * d) / (2 * d - 1);
}

std::int64_t truncation_length(double d, double tail_tol, std::int64_t hard_cap) {
  if (!(d > 0.5)) throw ValidationError("truncation_length requires d > 1/2");
  if (!(tail_tol > 0)) throw ValidationError("truncation_length requires tail_tol > 0");
  if (tail_tol >= 1) return 0;
  const double total = numerics::hurwitz_zeta(2 * d, 1.0).value;
  const double budget = tail_tol * total;
  const double exact = std::pow(budget * (2 * d - 1), -1 / (2 * d - 1));
  if (!(exact <= double(hard_cap))) {
    const double needed = truncation_tail_bound(d, hard_cap) / total;
    std::ostringstream os;
    os << "tail budget unreachable: d=" << d << ", tail_tol=" << tail_tol << " needs M ~ " << exact
       << " > cap " << hard_cap << "; try tail_tol >= " << needed;
    throw BudgetError(os.str());
  }
  auto M = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(exact)));
  while (M > 1 && truncation_tail_bound(d, M - 1) <= budget) --M;
  while (truncation_tail_bound(d, M) > budget) ++M;
  if (M > hard_cap) throw BudgetError("tail budget unreachable within hard cap");
  return M;
}

}  // namespace lmem
