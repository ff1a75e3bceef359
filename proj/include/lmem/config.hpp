#pragma once

#include <filesystem>

#include <json.hpp>

#include "lmem/model.hpp"

namespace lmem {

/// Build a ProcessSpec from its JSON description:
///
///   grid.points / grid.weights        or  grid.uniform.{lower,upper,count}
///   memory.kind = constant | step | table
///     constant: value      step: breakpoints + levels      table: values
///   innovations.kind = white | wiener | custom
///     white: sigma2 (scalar or per point)    custom: sigma or sigma_file
///   innovations.law = gaussian | pareto  (pareto_alpha)
///   tail_tol, horizon, seed, hard_cap
///
/// Relative `sigma_file` paths resolve against `base_dir`. Structural errors
/// throw ValidationError; model assumptions are left to validate().
ProcessSpec spec_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace lmem
