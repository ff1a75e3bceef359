#include "lmem/mcverify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <stdexcept>
#include <thread>

namespace lmem {

MomentAccumulator accumulate_rows(const Matrix& samples, std::int64_t shard_size) {
  if (shard_size < 1) throw std::invalid_argument("shard size must be positive");
  MomentAccumulator total(samples.cols());
  for (Index start = 0; start < samples.rows(); start += shard_size) {
    MomentAccumulator shard(samples.cols());
    const Index end = std::min<Index>(samples.rows(), start + shard_size);
    for (Index r = start; r < end; ++r) shard.add(samples.row(r).transpose());
    total.merge(shard);
  }
  return total;
}

namespace {

Matrix jackknife_se(const Matrix& samples, std::int64_t batches) {
  const Index N = samples.rows(), q = samples.cols();
  const Index B = std::clamp<Index>(batches, 2, N);
  std::vector<Matrix> sums(static_cast<std::size_t>(B), Matrix::Zero(q, q));
  std::vector<Index> counts(static_cast<std::size_t>(B), 0);
  Matrix total = Matrix::Zero(q, q);
  for (Index r = 0; r < N; ++r) {
    const auto b = static_cast<std::size_t>(r * B / N);
    const Vector x = samples.row(r).transpose();
    sums[b].noalias() += x * x.transpose();
    ++counts[b];
  }
  for (const auto& s : sums) total += s;
  std::vector<Matrix> loo;
  Matrix mean = Matrix::Zero(q, q);
  for (std::size_t b = 0; b < sums.size(); ++b) {
    loo.push_back((total - sums[b]) / double(N - counts[b]));
    mean += loo.back();
  }
  mean /= double(B);
  Matrix var = Matrix::Zero(q, q);
  for (const auto& m : loo) var += (m - mean).cwiseAbs2();
  var *= double(B - 1) / double(B);
  return var.cwiseSqrt();
}

}  // namespace

CltExperiment run_clt_experiment(const ProcessSpec& spec, const CltOptions& opt) {
  const auto part = require_clt(spec);
  if (opt.replications < 100) throw std::invalid_argument("CLT experiment needs at least 100 replications");
  if (opt.n < 2) throw std::invalid_argument("CLT experiment needs n >= 2");
  const Index q = spec.size();
  const auto plan = normalization_plan(spec, opt.n);
  const std::int64_t past_cut = opt.past_window_factor * opt.n;
  const PartialSumSampler sampler(spec, opt.n, past_cut);

  CltExperiment out;
  out.samples.resize(opt.replications, q);
  const std::int64_t shards = (opt.replications + opt.shard_size - 1) / opt.shard_size;
  std::atomic<std::int64_t> next{0};
  auto worker = [&] {
    for (std::int64_t s = next++; s < shards; s = next++) {
      const std::int64_t end = std::min(opt.replications, (s + 1) * opt.shard_size);
      for (std::int64_t r = s * opt.shard_size; r < end; ++r)
        out.samples.row(r) = plan.apply(sampler({opt.seed, static_cast<std::uint64_t>(r)})).transpose();
    }
  };
  const int threads = std::max(1, opt.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  auto& rep = out.report;
  rep.n = opt.n;
  rep.replications = opt.replications;
  rep.regime = part == CltPart::part_i ? Regime::long_memory : Regime::boundary;
  rep.past_cut = past_cut;
  rep.z_star = opt.z_star;
  const auto moments = accumulate_rows(out.samples, opt.shard_size);
  rep.empirical = moments.second_moment();
  rep.mean = moments.mean();

  const Matrix raw = partial_sum_covariance_matrix(spec, opt.n);
  rep.finite_n_exact = raw.cwiseQuotient(plan.b * plan.b.transpose());
  rep.limit = limit_kernel(spec).K;

  const double N = double(opt.replications);
  if (spec.innovations.law == InnovationLaw::gaussian) {
    rep.se_method = "gaussian-fourth-moment";
    const Matrix& K = rep.finite_n_exact;
    rep.se.resize(q, q);
    for (Index i = 0; i < q; ++i)
      for (Index j = 0; j < q; ++j) rep.se(i, j) = std::sqrt((K(i, i) * K(j, j) + K(i, j) * K(i, j)) / N);
  } else {
    rep.se_method = "jackknife";
    rep.se = jackknife_se(out.samples, opt.jackknife_batches);
  }

  rep.z_scores.resize(q, q);
  rep.verdict.resize(q, q);
  rep.gap.resize(q, q);
  for (Index i = 0; i < q; ++i)
    for (Index j = 0; j < q; ++j) {
      const double diff = rep.empirical(i, j) - rep.finite_n_exact(i, j);
      const double se = rep.se(i, j);
      rep.z_scores(i, j) = se > 0 ? diff / se : (diff == 0 ? 0.0 : std::copysign(INFINITY, diff));
      rep.verdict(i, j) = std::abs(rep.z_scores(i, j)) <= opt.z_star;
      const double lim = rep.limit(i, j);
      const double g = std::abs(rep.finite_n_exact(i, j) - lim);
      rep.gap(i, j) = lim != 0 ? g / std::abs(lim) : g;
    }
  return out;
}

std::vector<NormalityPoint> normality_diagnostics(const Matrix& samples, const Vector& variances,
                                                  const NormalityOptions& options) {
  const Index N = samples.rows();
  if (N < 500) throw std::invalid_argument("normality diagnostics need at least 500 samples");
  std::vector<NormalityPoint> out;
  const double skew_band = options.skew_band * std::sqrt(6.0 / double(N));
  const double kurt_band = options.kurt_band * std::sqrt(24.0 / double(N));
  for (Index c = 0; c < samples.cols(); ++c) {
    const Vector x = samples.col(c);
    const double mean = x.mean();
    const Eigen::ArrayXd dev = x.array() - mean;
    const double m2 = dev.square().mean();
    const double m3 = dev.cube().mean();
    const double m4 = dev.square().square().mean();
    NormalityPoint p{};
    p.skewness = m2 > 0 ? m3 / std::pow(m2, 1.5) : 0.0;
    p.excess_kurtosis = m2 > 0 ? m4 / (m2 * m2) - 3 : 0.0;

    const double var = variances.size() == samples.cols() ? variances[c] : m2;
    std::vector<double> sorted(x.data(), x.data() + N);
    std::sort(sorted.begin(), sorted.end());
    double ks = 0;
    if (var > 0) {
      const double sd = std::sqrt(var);
      for (Index k = 0; k < N; ++k) {
        const double F = 0.5 * std::erfc(-sorted[static_cast<std::size_t>(k)] / (sd * std::sqrt(2.0)));
        ks = std::max({ks, std::abs(F - double(k) / double(N)), std::abs(double(k + 1) / double(N) - F)});
      }
    }
    p.ks_distance = ks;
    p.skew_ok = std::abs(p.skewness) <= skew_band;
    p.kurt_ok = std::abs(p.excess_kurtosis) <= kurt_band;
    out.push_back(p);
  }
  return out;
}

ExponentFit fit_variance_exponent(const ProcessSpec& spec, const std::vector<std::int64_t>& n_list) {
  if (n_list.size() < 5) throw std::invalid_argument("exponent fit needs at least 5 horizons");
  for (auto n : n_list)
    if (n < 2 || (n & (n - 1)) != 0) throw std::invalid_argument("exponent fit horizons must be powers of two >= 2");
  ExponentFit fit{n_list, {}};
  std::map<double, std::vector<double>> cache;
  for (Index i = 0; i < spec.size(); ++i) {
    const double d = spec.d(i);
    ExponentFitPoint p;
    p.index = i;
    p.d = d;
    p.regime = classify_regime(d);
    auto it = cache.find(d);
    if (it == cache.end()) {
      std::vector<double> v;
      for (auto n : n_list) v.push_back(z_gram(d, d, n).value);
      it = cache.emplace(d, std::move(v)).first;
    }
    const auto& var = it->second;
    const std::size_t m = n_list.size();
    std::vector<double> xs(m), ys(m);
    for (std::size_t k = 0; k < m; ++k) {
      const double ln = std::log(double(n_list[k]));
      xs[k] = ln;
      ys[k] = std::log(var[k]);
      if (p.regime == Regime::boundary) {
        ys[k] -= 2 * std::log(ln);
        p.corrected_ratio.push_back(var[k] / (double(n_list[k]) * ln * ln));
      }
    }
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < m; ++k) {
      mx += xs[k];
      my += ys[k];
    }
    mx /= double(m);
    my /= double(m);
    double sxy = 0, sxx = 0;
    for (std::size_t k = 0; k < m; ++k) {
      sxy += (xs[k] - mx) * (ys[k] - my);
      sxx += (xs[k] - mx) * (xs[k] - mx);
    }
    p.slope = sxy / sxx;
    double rss = 0;
    for (std::size_t k = 0; k < m; ++k) {
      const double r = ys[k] - (my + p.slope * (xs[k] - mx));
      rss += r * r;
    }
    p.rms_residual = std::sqrt(rss / double(m));
    p.theoretical = p.regime == Regime::long_memory ? 3 - 2 * d : 1.0;
    p.abs_error = std::abs(p.slope - p.theoretical);
    fit.points.push_back(std::move(p));
  }
  return fit;
}

}  // namespace lmem
