#include "evop/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace evop {

LossSpec squared_error(std::string positive_symbols, std::string outcomes) {
  if (positive_symbols.empty()) {
    throw std::invalid_argument("squared_error needs at least one positive symbol");
  }
  LossSpec spec;
  spec.name = "squared_error";
  spec.rho = 2.0;
  spec.kappa = 2.0;
  spec.l_max = 1.0;
  spec.dimension = 1;
  spec.outcomes = std::move(outcomes);

  auto target = [positive = std::move(positive_symbols)](Outcome x) {
    return positive.find(x.symbol) != std::string::npos ? 1.0 : 0.0;
  };
  spec.eval = [target](Outcome x, const Prediction& y) {
    const double d = target(x) - y.scalar();
    return d * d;
  };
  spec.grad = [target](Outcome x, const Prediction& y) {
    return Prediction(2.0 * (y.scalar() - target(x)));
  };
  spec.contains = [](const Prediction& y) {
    return y.dimension() == 1 && y.finite() && y.scalar() >= 0.0 && y.scalar() <= 1.0;
  };
  spec.sample = [](std::mt19937_64& rng) {
    return Prediction(std::uniform_real_distribution<double>(0.0, 1.0)(rng));
  };
  return spec;
}

namespace {

void require_samples(std::uint64_t samples) {
  if (samples == 0) throw std::invalid_argument("validator needs at least one sample");
}

Outcome sample_outcome(const LossSpec& spec, std::mt19937_64& rng) {
  if (spec.outcomes.empty()) throw std::invalid_argument("loss declares no outcomes");
  std::uniform_int_distribution<std::size_t> pick(0, spec.outcomes.size() - 1);
  return Outcome{spec.outcomes[pick(rng)]};
}

double dot_diff(const Prediction& g, const Prediction& a, const Prediction& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < g.dimension(); ++k) s += g[k] * (a[k] - b[k]);
  return s;
}

void tally(ValidationReport& report, double margin, double tolerance) {
  report.worst_margin = std::min(report.worst_margin, margin);
  if (margin < -tolerance) ++report.violations;
}

}  // namespace

ValidationReport check_strong_convexity(const LossSpec& spec, std::uint64_t samples,
                                        std::uint64_t seed) {
  require_samples(samples);
  std::mt19937_64 rng(seed);
  ValidationReport report{samples, 0, std::numeric_limits<double>::infinity()};
  for (std::uint64_t s = 0; s < samples; ++s) {
    const Outcome x = sample_outcome(spec, rng);
    const Prediction y = spec.sample(rng);
    const Prediction y2 = spec.sample(rng);
    const double d = distance(y2, y);
    const double lower = spec.eval(x, y) + dot_diff(spec.grad(x, y), y2, y) +
                         0.5 * spec.rho * d * d;
    tally(report, spec.eval(x, y2) - lower, kConstantTolerance);
  }
  return report;
}

ValidationReport check_lipschitz(const LossSpec& spec, std::uint64_t samples,
                                 std::uint64_t seed) {
  require_samples(samples);
  std::mt19937_64 rng(seed);
  ValidationReport report{samples, 0, std::numeric_limits<double>::infinity()};
  for (std::uint64_t s = 0; s < samples; ++s) {
    const Outcome x = sample_outcome(spec, rng);
    const Prediction y = spec.sample(rng);
    const Prediction y2 = spec.sample(rng);
    const double margin =
        spec.kappa * distance(y, y2) - std::abs(spec.eval(x, y) - spec.eval(x, y2));
    tally(report, margin, kConstantTolerance);
  }
  return report;
}

ValidationReport check_gradient(const LossSpec& spec, std::uint64_t samples,
                                std::uint64_t seed) {
  require_samples(samples);
  std::mt19937_64 rng(seed);
  constexpr double kStep = 1e-5;
  ValidationReport report{samples, 0, std::numeric_limits<double>::infinity()};
  for (std::uint64_t s = 0; s < samples; ++s) {
    const Outcome x = sample_outcome(spec, rng);
    const Prediction y = spec.sample(rng);
    const Prediction g = spec.grad(x, y);
    for (std::size_t k = 0; k < y.dimension(); ++k) {
      Prediction hi = y;
      Prediction lo = y;
      hi[k] += kStep;
      lo[k] -= kStep;
      const double fd = (spec.eval(x, hi) - spec.eval(x, lo)) / (2.0 * kStep);
      const double scale = std::max(1.0, std::abs(g[k]));
      tally(report, kGradientRelTolerance - std::abs(fd - g[k]) / scale, 0.0);
    }
  }
  return report;
}

}  // namespace evop
