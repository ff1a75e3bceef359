#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace lmem {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Memory regime of a single exponent d.
///   long_memory : 1/2 < d < 1
///   boundary    : d == 1
///   short_memory: d > 1
enum class Regime { long_memory, boundary, short_memory };

/// Exponents within this distance of 1 are treated as the boundary case.
inline constexpr double boundary_eps = 1e-12;

inline Regime classify_regime(double d) {
  if (std::abs(d - 1.0) <= boundary_eps) return Regime::boundary;
  return d < 1.0 ? Regime::long_memory : Regime::short_memory;
}

inline bool is_boundary(double d) { return classify_regime(d) == Regime::boundary; }

inline std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::long_memory: return "long";
    case Regime::boundary: return "boundary";
    case Regime::short_memory: return "short";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A standing assumption of the model is violated (d <= 1/2, non-PSD sigma, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A series truncation would exceed the configured hard cap.
class BudgetError : public Error {
 public:
  using Error::Error;
};

/// An asymptotic law or limit theorem is requested outside the parameter
/// region where it holds.
class RegimeError : public Error {
 public:
  using Error::Error;
};

}  // namespace lmem
