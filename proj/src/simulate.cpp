#include "lmem/simulate.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace lmem {

namespace {

constexpr std::uint64_t innovation_stream = 1;
constexpr std::uint64_t remainder_stream = 2;

std::uint64_t time_code(std::int64_t j) { return static_cast<std::uint64_t>(j) ^ (std::uint64_t{1} << 63); }

std::uint64_t lane(std::uint64_t replication, std::uint64_t block) {
  if (block >= (std::uint64_t{1} << 24)) throw std::length_error("grid too large for the counter layout");
  return (replication << 24) | block;
}

void apply_factor(const InnovationModel& m, const Vector& eta, Vector& eps) {
  if (m.kind == InnovationKind::white)
    eps = m.factor.diagonal().cwiseProduct(eta);
  else
    eps.noalias() = m.factor.triangularView<Eigen::Lower>() * eta;
}

}  // namespace

InnovationSource::InnovationSource(const InnovationModel& model, SeedRecord seed)
    : model_(&model), rng_(seed.seed, innovation_stream), replication_(seed.replication) {
  if (!model.factor_ok) throw ValidationError("innovation covariance has no valid factor");
  if (model.law == InnovationLaw::pareto) {
    const double a = model.pareto_alpha;
    if (!(a > 2)) throw ValidationError("Pareto innovations need alpha > 2");
    pareto_scale_ = 1 / std::sqrt(a / (a - 2));
  }
}

void InnovationSource::standardized(std::int64_t j, Eigen::Ref<Vector> out) const {
  const Index q = out.size();
  const std::uint64_t a = time_code(j);
  for (Index i = 0; i < q; i += 2) {
    const std::uint64_t b = lane(replication_, static_cast<std::uint64_t>(i / 2));
    std::array<double, 2> v;
    if (model_->law == InnovationLaw::gaussian) {
      v = rng_.normals(a, b);
    } else {
      // symmetrized Pareto: sign from the low bit, magnitude U^{-1/alpha}
      const auto w = rng_.block(a, b);
      const double inv_alpha = 1 / model_->pareto_alpha;
      for (int k = 0; k < 2; ++k) {
        const double u = rng::CounterRng::to_open_unit(w[2 * k], w[2 * k + 1]);
        const double sign = (w[2 * k] & 1u) ? -1.0 : 1.0;
        v[k] = sign * std::pow(u, -inv_alpha) * pareto_scale_;
      }
    }
    out[i] = v[0];
    if (i + 1 < q) out[i + 1] = v[1];
  }
}

Vector InnovationSource::operator()(std::int64_t j) const {
  Vector eta(model_->size()), eps(model_->size());
  standardized(j, eta);
  apply_factor(*model_, eta, eps);
  return eps;
}

Matrix sample_innovations(const InnovationModel& model, std::int64_t count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("count must be at least 1");
  InnovationSource src(model, {seed, 0});
  Matrix out(count, model.size());
  for (std::int64_t j = 1; j <= count; ++j) out.row(j - 1) = src(j).transpose();
  return out;
}

std::int64_t path_window(const ProcessSpec& spec) {
  return truncation_length(spec.memory.min(), spec.tail_tol, spec.hard_cap);
}

PathEnsemble generate_paths(const ProcessSpec& spec, std::int64_t n, SeedRecord seed) {
  require_valid(spec);
  return generate_paths(spec, n, path_window(spec), seed);
}

PathEnsemble generate_paths(const ProcessSpec& spec, std::int64_t n, std::int64_t window, SeedRecord seed) {
  if (n < 1) throw std::invalid_argument("paths need n >= 1");
  if (window < 0) throw std::invalid_argument("window must be non-negative");
  const Index q = spec.size();
  const std::int64_t span = n + window + 1;
  InnovationSource src(spec.innovations, seed);

  // eps rows for j = -window..n
  Matrix eps(span, q);
  for (std::int64_t j = -window; j <= n; ++j) eps.row(j + window) = src(j).transpose();

  std::map<double, Vector> coef;
  PathEnsemble out{spec.hash(), n, Matrix(n, q), window, seed, Vector(q)};
  for (Index i = 0; i < q; ++i) {
    const double d = spec.d(i);
    auto it = coef.find(d);
    if (it == coef.end()) {
      Vector c(span);
      for (std::int64_t L = 0; L < span; ++L) c[L] = std::pow(double(L + 1), -d);
      it = coef.emplace(d, std::move(c)).first;
    }
    const Vector& c = it->second;
    for (std::int64_t k = 1; k <= n; ++k) {
      // X_k = sum_{j=-window}^{k} (k-j+1)^{-d} eps_j; row r = j + window, lag k - j
      double s = 0;
      for (std::int64_t j = -window; j <= k; ++j) s += c[k - j] * eps(j + window, i);
      out.values(k - 1, i) = s;
    }
    out.truncation_bias[i] = spec.sigma(i, i) * truncation_tail_bound(d, window);
  }
  return out;
}

Vector partial_sums_direct(const PathEnsemble& paths) {
  if (paths.n < 1) throw std::invalid_argument("empty path ensemble");
  return paths.values.colwise().sum().transpose();
}

Vector partial_sums_via_z(const ProcessSpec& spec, const CoefficientTable& table, SeedRecord seed) {
  const Index q = spec.size();
  if (table.z.cols() != q) throw std::invalid_argument("coefficient table does not match the grid");
  InnovationSource src(spec.innovations, seed);
  Vector sum = Vector::Zero(q);
  for (std::int64_t j = table.first_j(); j <= table.n; ++j)
    sum += table.z.row(j + table.past_cut).transpose().cwiseProduct(src(j));
  return sum;
}

Vector partial_sums_via_z(const ProcessSpec& spec, const CoefficientTable& table, const PathEnsemble& paths) {
  if (table.past_cut != paths.window || table.n != paths.n)
    throw std::invalid_argument("window mismatch: coefficient table (n=" + std::to_string(table.n) +
                                ", past_cut=" + std::to_string(table.past_cut) + ") vs paths (n=" +
                                std::to_string(paths.n) + ", window=" + std::to_string(paths.window) + ")");
  if (paths.spec_hash != spec.hash()) throw std::invalid_argument("paths were generated from a different spec");
  return partial_sums_via_z(spec, table, paths.seed);
}

Vector partial_sums_via_z(const ProcessSpec& spec, std::int64_t n, SeedRecord seed) {
  require_valid(spec);
  const auto table = z_coefficients(spec, n, path_window(spec));
  return partial_sums_via_z(spec, table, seed);
}

Vector normalize_partial_sums(const Vector& sums, const NormalizationPlan& plan) { return plan.apply(sums); }

PartialSumSampler::PartialSumSampler(const ProcessSpec& spec, std::int64_t n, std::int64_t past_cut,
                                     bool include_remainder)
    : model_(spec.innovations), table_(z_coefficients(spec, n, past_cut)) {
  if (!model_.factor_ok) throw ValidationError("innovation covariance has no valid factor");
  remainder_ = include_remainder && table_.tail_cov.cwiseAbs().maxCoeff() > 0;
  if (remainder_) remainder_factor_ = psd_factor(table_.tail_cov).lower;
}

Vector PartialSumSampler::operator()(SeedRecord seed) const {
  const Index q = model_.size();
  InnovationSource src(model_, seed);
  Vector eta(q), eps(q), sum = Vector::Zero(q);
  for (std::int64_t j = table_.first_j(); j <= table_.n; ++j) {
    src.standardized(j, eta);
    apply_factor(model_, eta, eps);
    sum += table_.z.row(j + table_.past_cut).transpose().cwiseProduct(eps);
  }
  if (remainder_) {
    const rng::CounterRng rem(seed.seed, remainder_stream);
    for (Index i = 0; i < q; i += 2) {
      const auto v = rem.normals(seed.replication, static_cast<std::uint64_t>(i / 2));
      eta[i] = v[0];
      if (i + 1 < q) eta[i + 1] = v[1];
    }
    sum.noalias() += remainder_factor_.triangularView<Eigen::Lower>() * eta;
  }
  return sum;
}

}  // namespace lmem
