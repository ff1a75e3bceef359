#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace lmem::cli;
  CLI::App app{"Functional linear processes with space-varying long memory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", LMEM_VERSION);

  Options opt;
  std::uint64_t seed = 0;
  double tail_tol = 0;
  std::int64_t horizon = 0, replications = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "JSON process description")->envname("LMEM_CONFIG");
    sub->add_option("--out", opt.out, "output directory")->envname("LMEM_OUT")->capture_default_str();
    sub->add_option("--seed", seed, "master seed (overrides the config)")->envname("LMEM_SEED");
    sub->add_option("--threads", opt.threads, "worker cap")->envname("LMEM_THREADS")->check(CLI::PositiveNumber);
    sub->add_option("--tail-tol", tail_tol, "relative variance dropped by truncation")->envname("LMEM_TAIL_TOL");
    sub->add_option("--horizon", horizon, "number of time steps n")->envname("LMEM_HORIZON");
  };
  auto* simulate = app.add_subcommand("simulate", "sample paths X_1..X_n and partial sums");
  auto* analyze = app.add_subcommand("analyze", "exact and asymptotic covariance tables");
  auto* verify = app.add_subcommand("verify-clt", "Monte Carlo check of the limit theorem");
  for (auto* sub : {simulate, analyze, verify}) add_common(sub);
  verify->add_option("--replications", replications, "Monte Carlo replications N")->envname("LMEM_REPLICATIONS");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_config_error;
  }

  auto* sub = app.get_subcommands().front();
  auto given = [&](const char* name) { return sub->get_option_no_throw(name) && sub->count(name) > 0; };
  auto from_env = [&](const char* name) { return sub->get_option_no_throw(name) && !sub->get_option(name)->empty(); };
  if (given("--seed") || from_env("--seed")) opt.seed = seed;
  if (given("--tail-tol") || from_env("--tail-tol")) opt.tail_tol = tail_tol;
  if (given("--horizon") || from_env("--horizon")) opt.horizon = horizon;
  if (given("--replications") || from_env("--replications")) opt.replications = replications;

  if (sub == simulate) return run_simulate(opt, std::cerr);
  if (sub == analyze) return run_analyze(opt, std::cerr);
  return run_verify_clt(opt, std::cerr);
}
