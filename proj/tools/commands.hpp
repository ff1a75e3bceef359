#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

namespace lmem::cli {

inline constexpr int exit_pass = 0;
inline constexpr int exit_verdict_failure = 1;
inline constexpr int exit_config_error = 2;

/// Command-line and environment settings; unset fields fall back to the config file.
struct Options {
  std::filesystem::path config;
  std::filesystem::path out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<double> tail_tol;
  std::optional<std::int64_t> horizon;
  std::optional<std::int64_t> replications;
  int threads = 1;
};

/// Config file with overrides applied and external files inlined. The result
/// alone regenerates every artifact of a run.
nlohmann::json resolve_config(const Options& options);

// Each command writes into options.out and returns an exit code. Diagnostics
// go to `err` as a single line.
int run_simulate(const Options& options, std::ostream& err);
int run_analyze(const Options& options, std::ostream& err);
int run_verify_clt(const Options& options, std::ostream& err);

}  // namespace lmem::cli
