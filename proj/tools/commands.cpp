#include "commands.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <map>
#include <ostream>
#include <sstream>

#include "lmem/config.hpp"
#include "lmem/csv.hpp"
#include "lmem/mcverify.hpp"
#include "lmem/simulate.hpp"

#ifndef LMEM_VERSION
#define LMEM_VERSION "0.0.0"
#endif

namespace lmem::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string str(double x) { return csv::format(x); }
std::string str(std::int64_t x) { return std::to_string(x); }
std::string flag(bool b) { return b ? "pass" : "fail"; }

// Collects output files; the manifest is written last.
class Artifacts {
 public:
  Artifacts(std::string command, const Options& opt, json config)
      : command_(std::move(command)), opt_(opt), config_(std::move(config)),
        start_(std::chrono::steady_clock::now()) {}

  void add(const std::string& name, std::string text) { files_[name] = std::move(text); }
  json& extra() { return extra_; }

  void commit() const {
    fs::create_directories(opt_.out);
    json files = json::object();
    std::uint64_t digest = fnv1a(command_);
    for (const auto& [name, text] : files_) {
      csv::write_file(opt_.out / name, text);
      files[name] = {{"bytes", text.size()}, {"fnv1a64", hex(fnv1a(text))}};
      digest = fnv1a(text, fnv1a(name, digest));
    }
    json m = {{"tool", "lmem"},
              {"version", LMEM_VERSION},
              {"command", command_},
              {"config", config_},
              {"seed", config_.value("seed", std::uint64_t{0})},
              {"threads", opt_.threads},
              {"files", files},
              {"artifact_hash", hex(digest)},
              {"created_utc", utc_now()},
              {"runtime_seconds",
               std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count()}};
    for (const auto& [k, v] : extra_.items()) m[k] = v;
    csv::write_file(opt_.out / "manifest.json", m.dump(2) + "\n");
  }

 private:
  std::string command_;
  const Options& opt_;
  json config_;
  json extra_ = json::object();
  std::map<std::string, std::string> files_;
  std::chrono::steady_clock::time_point start_;
};

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const RegimeError& e) {
    err << "lmem: regime error: " << e.what() << "\n";
  } catch (const BudgetError& e) {
    err << "lmem: budget error: " << e.what() << "\n";
  } catch (const ValidationError& e) {
    err << "lmem: invalid config: " << e.what() << "\n";
  } catch (const json::exception& e) {
    err << "lmem: invalid config: " << e.what() << "\n";
  } catch (const std::invalid_argument& e) {
    err << "lmem: invalid argument: " << e.what() << "\n";
  } catch (const std::logic_error& e) {
    // internal cross-check failed; treated as a failed verdict
    err << "lmem: check failed: " << e.what() << "\n";
    return exit_verdict_failure;
  } catch (const std::exception& e) {
    err << "lmem: error: " << e.what() << "\n";
  }
  return exit_config_error;
}

ProcessSpec load_spec(const json& config, std::ostream& err) {
  ProcessSpec spec = spec_from_json(config);
  const auto report = validate(spec);
  for (const auto& w : report.warnings) err << "lmem: warning: " << w << "\n";
  if (!report.ok()) throw ValidationError(report.summary());
  return spec;
}

std::string matrix_csv(const Matrix& m, const ProcessSpec& spec) {
  return csv::matrix_text(m, "t", spec.grid.points, spec.grid.points);
}

}  // namespace

json resolve_config(const Options& opt) {
  if (opt.config.empty()) throw ValidationError("no config given (use --config or LMEM_CONFIG)");
  json j = read_json(opt.config);
  if (!j.is_object()) throw ValidationError("config root must be an object");
  if (opt.seed) j["seed"] = *opt.seed;
  if (opt.tail_tol) j["tail_tol"] = *opt.tail_tol;
  if (opt.horizon) j["horizon"] = *opt.horizon;
  if (opt.replications) j["clt"]["replications"] = *opt.replications;
  if (!j.contains("seed")) j["seed"] = std::uint64_t{0};
  if (j.contains("innovations") && j["innovations"].contains("sigma_file")) {
    fs::path p = j["innovations"]["sigma_file"].get<std::string>();
    if (p.is_relative()) p = opt.config.parent_path() / p;
    const Matrix sigma = csv::read_matrix(p);
    json rows = json::array();
    for (Index r = 0; r < sigma.rows(); ++r) {
      json row = json::array();
      for (Index c = 0; c < sigma.cols(); ++c) row.push_back(sigma(r, c));
      rows.push_back(row);
    }
    j["innovations"].erase("sigma_file");
    j["innovations"]["sigma"] = rows;
  }
  return j;
}

int run_simulate(const Options& opt, std::ostream& err) {
  return guarded(err, [&] {
    const json config = resolve_config(opt);
    const ProcessSpec spec = load_spec(config, err);
    const std::int64_t n = spec.horizon;
    const std::int64_t window = path_window(spec);
    const SeedRecord seed{spec.seed, 0};
    const auto paths = generate_paths(spec, n, window, seed);

    Vector k(n);
    for (std::int64_t i = 0; i < n; ++i) k[i] = double(i + 1);
    Artifacts art("simulate", opt, config);
    art.add("paths.csv", csv::matrix_text(paths.values, "k", spec.grid.points, k));

    const Vector direct = partial_sums_direct(paths);
    // the z route needs an (n + window + 1) x q table; skipped when that is large
    const bool via_z = double(n + window + 1) * double(spec.size()) <= 2e7;
    Vector z = Vector::Constant(spec.size(), std::numeric_limits<double>::quiet_NaN());
    if (via_z) z = partial_sums_via_z(spec, z_coefficients(spec, n, window), paths);
    std::vector<std::vector<std::string>> rows;
    for (Index i = 0; i < spec.size(); ++i) {
      const double rel = std::abs(direct[i] - z[i]) / std::max(std::abs(direct[i]), 1e-300);
      rows.push_back({str(spec.grid.points[i]), str(spec.d(i)), str(direct[i]), str(z[i]), str(rel),
                      str(paths.truncation_bias[i])});
    }
    art.add("partial_sums.csv",
            csv::table_text({"t", "d", "direct", "via_z", "rel_diff", "truncation_bias"}, rows));
    art.extra()["window"] = window;
    art.extra()["horizon"] = n;
    art.extra()["z_route"] = via_z;
    art.commit();
    return exit_pass;
  });
}

int run_analyze(const Options& opt, std::ostream& err) {
  return guarded(err, [&] {
    const json config = resolve_config(opt);
    const ProcessSpec spec = load_spec(config, err);
    const json section = config.value("analyze", json::object());
    const auto lags = section.value("lags", std::vector<std::int64_t>{1, 2, 5, 10, 100, 1000});
    const double oracle_tol = section.value("oracle_tol", 1e-8);
    for (auto h : lags)
      if (h < 0) throw ValidationError("analyze.lags must be non-negative");
    const Index q = spec.size();
    const Vector& t = spec.grid.points;

    // lag covariances depend on (d_s, d_t, h) only, up to sigma
    std::map<std::tuple<double, double, std::int64_t>, Estimate> gamma;
    std::vector<std::vector<std::string>> cov_rows, sum_rows, c_rows;
    Matrix cmat(q, q);
    double max_delta = 0;
    std::int64_t rejected = 0;
    for (Index s = 0; s < q; ++s)
      for (Index u = 0; u < q; ++u) {
        const double ds = spec.d(s), du = spec.d(u), sig = spec.sigma(s, u);
        for (auto h : lags) {
          auto key = std::make_tuple(ds, du, h);
          auto it = gamma.find(key);
          if (it == gamma.end()) it = gamma.emplace(key, LagSeries(ds, du)(h)).first;
          std::string asym = "nan", status;
          double ratio = std::numeric_limits<double>::quiet_NaN();
          const double exact = sig * it->second.value;
          if (h < 2) {
            status = "no large-lag law below lag 2";
          } else {
            try {
              const auto a = cross_covariance_asymptotic(ds, du, sig, double(h));
              asym = str(a.value);
              status = std::string(to_string(a.regime));
              if (a.value != 0) ratio = exact / a.value;
            } catch (const RegimeError& e) {
              status = e.what();
            }
          }
          cov_rows.push_back({str(std::int64_t(s)), str(std::int64_t(u)), str(t[s]), str(t[u]), str(ds), str(du),
                              str(h), str(exact), str(std::abs(sig) * it->second.error), asym, str(ratio),
                              "\"" + status + "\""});
        }
        sum_rows.push_back({str(std::int64_t(s)), str(std::int64_t(u)), str(t[s]), str(t[u]), str(ds), str(du),
                            std::string(to_string(classify_summability(ds, du)))});
        try {
          const auto c = c_integral_estimate(ds, du);
          const double oracle = c_integral_closed_form(ds, du);
          const double delta = std::abs(c.value - oracle) / std::abs(oracle);
          max_delta = std::max(max_delta, delta);
          cmat(s, u) = c.value;
          c_rows.push_back({str(std::int64_t(s)), str(std::int64_t(u)), str(t[s]), str(t[u]), str(ds), str(du), "ok",
                            str(c.value), str(c.error), str(oracle), str(delta)});
        } catch (const RegimeError& e) {
          ++rejected;
          cmat(s, u) = std::numeric_limits<double>::quiet_NaN();
          c_rows.push_back({str(std::int64_t(s)), str(std::int64_t(u)), str(t[s]), str(t[u]), str(ds), str(du),
                            "\"rejected: " + std::string(e.what()) + "\"", "nan", "nan", "nan", "nan"});
        }
      }

    Artifacts art("analyze", opt, config);
    art.add("cross_covariance.csv",
            csv::table_text({"s", "t", "t_s", "t_t", "d_s", "d_t", "lag", "exact", "exact_error", "asymptotic",
                             "exact_over_asymptotic", "asymptotic_status"},
                            cov_rows));
    art.add("summability.csv", csv::table_text({"s", "t", "t_s", "t_t", "d_s", "d_t", "summability"}, sum_rows));
    art.add("c_integral.csv", csv::table_text({"s", "t", "t_s", "t_t", "d_s", "d_t", "status", "quadrature",
                                               "quadrature_error", "closed_form", "rel_delta"},
                                              c_rows));
    art.add("c_matrix.csv", matrix_csv(cmat, spec));

    const auto l2 = l2_membership(spec);
    art.add("l2_membership.json", json{{"total_measure", spec.grid.total_measure()},
                                       {"sigma2_integral", l2.sigma2_integral},
                                       {"weighted_integral", l2.weighted_integral},
                                       {"member", l2.member}}
                                          .dump(2) +
                                      "\n");
    const bool pass = max_delta <= oracle_tol;
    art.add("summary.json", json{{"oracle_tol", oracle_tol},
                                 {"max_rel_delta", max_delta},
                                 {"c_rejected_pairs", rejected},
                                 {"lags", lags},
                                 {"pass", pass}}
                                    .dump(2) +
                                "\n");
    art.commit();
    if (!pass) err << "lmem: c-integral oracle delta " << max_delta << " exceeds " << oracle_tol << "\n";
    return pass ? exit_pass : exit_verdict_failure;
  });
}

int run_verify_clt(const Options& opt, std::ostream& err) {
  return guarded(err, [&] {
    const json config = resolve_config(opt);
    const ProcessSpec spec = load_spec(config, err);
    require_clt(spec);
    const json section = config.value("clt", json::object());
    CltOptions co;
    co.n = section.value("n", spec.horizon);
    co.replications = section.value("replications", co.replications);
    co.z_star = section.value("z_star", co.z_star);
    co.past_window_factor = section.value("past_window_factor", co.past_window_factor);
    co.shard_size = section.value("shard_size", co.shard_size);
    co.jackknife_batches = section.value("jackknife_batches", co.jackknife_batches);
    co.seed = spec.seed;
    co.threads = opt.threads;
    NormalityOptions no;
    no.skew_band = section.value("skew_band", no.skew_band);
    no.kurt_band = section.value("kurt_band", no.kurt_band);
    std::vector<std::int64_t> n_list;
    for (int k = 10; k <= 16; ++k) n_list.push_back(std::int64_t{1} << k);
    n_list = section.value("n_list", n_list);
    const double exponent_tol = section.value("exponent_tol", 0.05);

    const auto run = run_clt_experiment(spec, co);
    const auto& rep = run.report;
    const auto normal = normality_diagnostics(run.samples, rep.finite_n_exact.diagonal(), no);
    const auto fit = fit_variance_exponent(spec, n_list);

    Artifacts art("verify-clt", opt, config);
    art.add("empirical.csv", matrix_csv(rep.empirical, spec));
    art.add("finite_n_exact.csv", matrix_csv(rep.finite_n_exact, spec));
    art.add("limit_kernel.csv", matrix_csv(rep.limit, spec));
    art.add("standard_error.csv", matrix_csv(rep.se, spec));

    const Index q = spec.size();
    const Vector& t = spec.grid.points;
    std::vector<std::vector<std::string>> rows;
    std::int64_t failed = 0;
    for (Index i = 0; i < q; ++i)
      for (Index j = 0; j < q; ++j) {
        failed += !rep.verdict(i, j);
        rows.push_back({str(t[i]), str(t[j]), str(rep.empirical(i, j)), str(rep.finite_n_exact(i, j)),
                        str(rep.se(i, j)), str(rep.z_scores(i, j)), flag(rep.verdict(i, j)), str(rep.limit(i, j)),
                        str(rep.gap(i, j))});
      }
    art.add("verdicts.csv", csv::table_text({"t_s", "t_t", "empirical", "finite_n_exact", "standard_error",
                                             "z_score", "verdict", "limit", "limit_gap"},
                                            rows));

    rows.clear();
    std::int64_t abnormal = 0;
    for (Index i = 0; i < q; ++i) {
      const auto& p = normal[static_cast<std::size_t>(i)];
      abnormal += !(p.skew_ok && p.kurt_ok);
      rows.push_back({str(t[i]), str(spec.d(i)), str(p.skewness), str(p.excess_kurtosis), str(p.ks_distance),
                      flag(p.skew_ok), flag(p.kurt_ok)});
    }
    art.add("normality.csv",
            csv::table_text({"t", "d", "skewness", "excess_kurtosis", "ks_distance", "skewness_band", "kurtosis_band"},
                            rows));

    rows.clear();
    std::int64_t off_slope = 0;
    for (const auto& p : fit.points) {
      const bool ok = p.abs_error <= exponent_tol;
      off_slope += !ok;
      std::string ratios;
      for (double r : p.corrected_ratio) ratios += (ratios.empty() ? "" : ";") + str(r);
      rows.push_back({str(t[p.index]), str(p.d), std::string(to_string(p.regime)), str(p.slope), str(p.theoretical),
                      str(p.abs_error), str(p.rms_residual), flag(ok), ratios});
    }
    art.add("exponent_fit.csv", csv::table_text({"t", "d", "regime", "slope", "theoretical", "abs_error",
                                                 "rms_residual", "within_tol", "corrected_ratio"},
                                                rows));

    const bool pass = failed == 0 && abnormal == 0;
    json summary = {{"n", co.n},
                    {"replications", co.replications},
                    {"seed", co.seed},
                    {"regime", std::string(to_string(rep.regime))},
                    {"past_cut", rep.past_cut},
                    {"se_method", rep.se_method},
                    {"z_star", co.z_star},
                    {"covariance_failures", failed},
                    {"max_abs_z", rep.z_scores.cwiseAbs().maxCoeff()},
                    {"normality_bands", {{"skew", no.skew_band}, {"kurtosis", no.kurt_band}}},
                    {"normality_failures", abnormal},
                    {"max_limit_gap", rep.max_gap()},
                    {"exponent_tol", exponent_tol},
                    {"exponent_off_tolerance", off_slope},
                    {"n_list", n_list},
                    {"pass", pass}};
    art.add("summary.json", summary.dump(2) + "\n");
    art.commit();
    if (!pass)
      err << "lmem: verdict failure: " << failed << " covariance entries beyond " << co.z_star << " se, " << abnormal
          << " points outside normality bands\n";
    return pass ? exit_pass : exit_verdict_failure;
  });
}

}  // namespace lmem::cli
