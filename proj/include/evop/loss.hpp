#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>

#include "evop/core_model.hpp"

namespace evop {

/// A loss on (outcome, prediction) pairs with declared strong-convexity
/// constant `rho`, Lipschitz constant `kappa`, and range [0, l_max] on the
/// prediction set. The constants are declarations; the check_* validators
/// below catch misdeclared ones.
struct LossSpec {
  std::string name;
  double rho = 0.0;
  double kappa = 0.0;
  double l_max = 0.0;
  std::size_t dimension = 1;
  /// Outcomes the validators sample from.
  std::string outcomes;

  std::function<double(Outcome, const Prediction&)> eval;
  /// Gradient in the prediction argument.
  std::function<Prediction(Outcome, const Prediction&)> grad;
  std::function<bool(const Prediction&)> contains;
  std::function<Prediction(std::mt19937_64&)> sample;
};

/// L(x, p) = (1 - p)^2 if x is one of `positive_symbols`, p^2 otherwise, on
/// [0, 1]. rho = 2, kappa = 2, l_max = 1.
LossSpec squared_error(std::string positive_symbols = "H", std::string outcomes = "HT");

struct ValidationReport {
  std::uint64_t samples = 0;
  std::uint64_t violations = 0;
  /// Smallest slack observed; negative means the inequality failed there.
  double worst_margin = 0.0;
};

inline constexpr double kConstantTolerance = 1e-9;
inline constexpr double kGradientRelTolerance = 1e-6;

ValidationReport check_strong_convexity(const LossSpec& spec, std::uint64_t samples,
                                        std::uint64_t seed);
ValidationReport check_lipschitz(const LossSpec& spec, std::uint64_t samples,
                                 std::uint64_t seed);
/// Central finite differences against spec.grad at interior points.
ValidationReport check_gradient(const LossSpec& spec, std::uint64_t samples,
                                std::uint64_t seed);

}  // namespace evop
