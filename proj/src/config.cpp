#include "lmem/config.hpp"

#include <fstream>

#include "lmem/csv.hpp"

namespace lmem {

using nlohmann::json;

namespace {

Vector to_vector(const json& j, const char* what) {
  if (!j.is_array()) throw ValidationError(std::string(what) + " must be an array");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Index>(i)] = j[i].get<double>();
  return v;
}

std::vector<double> to_std(const json& j, const char* what) {
  const Vector v = to_vector(j, what);
  return {v.data(), v.data() + v.size()};
}

SpaceGrid grid_from(const json& j) {
  if (j.contains("uniform")) {
    const auto& u = j.at("uniform");
    return SpaceGrid::uniform(u.at("lower").get<double>(), u.at("upper").get<double>(),
                              u.at("count").get<Index>());
  }
  SpaceGrid g;
  g.points = to_vector(j.at("points"), "grid.points");
  g.weights = j.contains("weights") ? to_vector(j.at("weights"), "grid.weights")
                                    : Vector::Constant(g.points.size(), 1.0 / double(g.points.size()));
  return g;
}

MemoryFunction memory_from(const json& j, const SpaceGrid& grid) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "constant") {
    const double d = j.contains("value") ? j.at("value").get<double>() : j.at("values").at(0).get<double>();
    return MemoryFunction::constant(grid, d);
  }
  if (kind == "step") {
    const auto& lv = j.contains("levels") ? j.at("levels") : j.at("values");
    return MemoryFunction::step(grid, to_std(j.at("breakpoints"), "memory.breakpoints"),
                                to_std(lv, "memory.levels"));
  }
  if (kind == "table") return MemoryFunction::table(to_vector(j.at("values"), "memory.values"));
  throw ValidationError("unknown memory.kind '" + kind + "'");
}

InnovationModel innovations_from(const json& j, const SpaceGrid& grid,
                                 const std::filesystem::path& base_dir) {
  const auto kind = j.value("kind", std::string("white"));
  InnovationModel m;
  if (kind == "white") {
    Vector s2 = Vector::Ones(grid.size());
    if (j.contains("sigma2")) {
      const auto& s = j.at("sigma2");
      s2 = s.is_array() ? to_vector(s, "innovations.sigma2") : Vector::Constant(grid.size(), s.get<double>());
    }
    m = InnovationModel::white(s2);
  } else if (kind == "wiener") {
    m = InnovationModel::wiener(grid);
  } else if (kind == "custom") {
    Matrix sigma;
    if (j.contains("sigma_file")) {
      std::filesystem::path p = j.at("sigma_file").get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      sigma = csv::read_matrix(p);
    } else {
      const auto& rows = j.at("sigma");
      sigma.resize(static_cast<Index>(rows.size()), static_cast<Index>(rows.size()));
      for (std::size_t r = 0; r < rows.size(); ++r) sigma.row(static_cast<Index>(r)) = to_vector(rows[r], "innovations.sigma").transpose();
    }
    m = InnovationModel::custom(sigma);
  } else {
    throw ValidationError("unknown innovations.kind '" + kind + "'");
  }
  const auto law = j.value("law", std::string("gaussian"));
  if (law == "gaussian") {
    m.law = InnovationLaw::gaussian;
  } else if (law == "pareto") {
    m.law = InnovationLaw::pareto;
    m.pareto_alpha = j.value("pareto_alpha", 3.0);
  } else {
    throw ValidationError("unknown innovations.law '" + law + "'");
  }
  return m;
}

}  // namespace

ProcessSpec spec_from_json(const json& j, const std::filesystem::path& base_dir) {
  try {
    ProcessSpec s;
    s.grid = grid_from(j.at("grid"));
    s.memory = memory_from(j.at("memory"), s.grid);
    s.innovations = innovations_from(j.value("innovations", json::object()), s.grid, base_dir);
    s.tail_tol = j.value("tail_tol", default_tail_tol);
    s.horizon = j.value("horizon", std::int64_t{1});
    s.seed = j.value("seed", std::uint64_t{0});
    s.hard_cap = j.value("hard_cap", default_hard_cap);
    return s;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed config: ") + e.what());
  }
}

json read_json(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot open config " + path.string());
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw ValidationError("cannot parse " + path.string() + ": " + e.what());
  }
}

}  // namespace lmem
