#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "evop/loss.hpp"
#include "evop/random.hpp"

namespace evop {

using BigInt = boost::multiprecision::cpp_int;

/// exp(-2 lambda / a^2). Throws std::domain_error unless lambda > 0, a > 0.
double martingale_tail_bound(double lambda, double a);

struct Increment {
  double r = 0.0;
  double v = 0.0;
};

/// Increments (r_i, v_i) with |r_i| <= a sqrt(v_i) and E[r_i | past] <= 0.
struct MartingaleSample {
  std::vector<Increment> increments;
  double a = 1.0;
};

class GeneratorContractViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MartingaleGenerator {
  std::string name;
  /// Draws a sample of the given length from the seeded engine.
  std::function<MartingaleSample(Rng&, std::size_t)> draw;
};

/// r = 0, v = 0.
MartingaleGenerator zero_generator();
/// f* against the always-heads gambler on a coin: r = -L'(x, 1/2)(1 - 1/2),
/// v = (rho / 2)(1/2)^2, a = kappa sqrt(2 / rho). Zero-mean for a fair coin.
MartingaleGenerator psharp_generator(const LossSpec& loss, double coin_bias = 0.5);
/// r = a sqrt(v) every step: satisfies the range condition but has positive
/// mean, so the tail bound fails.
MartingaleGenerator negative_control_generator(double a = 2.0, double v = 0.25);
/// |r| = 2 a sqrt(v): breaks the range condition.
MartingaleGenerator contract_violation_generator(double a = 2.0, double v = 0.25);

struct TailCheck {
  double lambda = 0.0;
  double empirical = 0.0;
  double bound = 0.0;
  /// Binomial standard error at the bound.
  double std_error = 0.0;
  bool pass = false;
};

struct ConcentrationReport {
  std::string generator;
  std::uint64_t trials = 0;
  std::size_t increments = 0;
  std::vector<TailCheck> checks;

  bool all_pass() const;
};

/// Fraction of trials with sum(r - v) >= lambda against exp(-2 lambda / a^2);
/// a check passes when empirical <= bound + 3 * std_error. Trial k draws from
/// an engine seeded with derive_seed(seed, k).
ConcentrationReport verify_concentration(const MartingaleGenerator& generator,
                                         std::size_t increments, std::uint64_t trials,
                                         const std::vector<double>& lambdas, std::uint64_t seed);

struct BoundParams {
  double rho = 2.0;
  double kappa = 2.0;
  double epsilon = 0.5;
  std::uint64_t m = 3;
  /// Pool index of the optimal forecaster.
  std::uint64_t z = 1;
  std::uint64_t pool_size = 3;

  double b() const { return rho / (kappa * kappa); }
  double alpha() const;
  double c() const;

  /// Smallest m with 1/m < delta.
  static std::uint64_t m_for_margin(double delta);
  void validate() const;
};

/// exp(-b Lambda) / (1 - exp(-b rho eps / 2)), clamped to [0, 1].
double relscore_tail(const BoundParams& params, double Lambda);
/// Sum of relscore_tail over j, m >= 1 at Lambda = lambda + m + j, in
/// closed form: exp(-b(lambda + 2)) / ((1 - exp(-b rho eps / 2))(1 - exp(-b))^2),
/// clamped.
double relscore_union_tail(const BoundParams& params, double lambda);

/// A monotone map on nonnegative integers evaluated exactly. Results above
/// the cap come back empty rather than saturated.
class GrowthFunction {
 public:
  /// slope * t + offset.
  static GrowthFunction affine(BigInt slope, BigInt offset);
  static GrowthFunction successor() { return affine(1, 1); }
  /// Smallest n whose P# reveal count reaches t: floor(B^t / (B - 1)) + 1,
  /// and 1 at t = 0.
  static GrowthFunction psharp_reveal(std::uint64_t base);
  /// values[t - 1] for t >= 1; t outside the table throws std::out_of_range.
  static GrowthFunction table(std::vector<BigInt> values);

  std::optional<BigInt> operator()(const BigInt& t, const BigInt& cap) const;
  const std::string& description() const { return description_; }
  /// (slope, offset) for affine functions.
  std::optional<std::pair<BigInt, BigInt>> affine_form() const { return affine_; }

 private:
  GrowthFunction(std::function<std::optional<BigInt>(const BigInt&, const BigInt&)> fn,
                 std::string description)
      : fn_(std::move(fn)), description_(std::move(description)) {}

  std::function<std::optional<BigInt>(const BigInt&, const BigInt&)> fn_;
  std::string description_;
  std::optional<std::pair<BigInt, BigInt>> affine_;
};

/// h bounds the gap between consecutive disagreements, g the reveal delay.
/// Required: h(t) > t and g(t) >= t.
struct GrowthFunctions {
  GrowthFunction h;
  GrowthFunction g;
};

struct Overflow {
  BigInt cap;
};

using Capped = std::variant<BigInt, Overflow>;

/// (h o g)^t(1), or Overflow once a value exceeds cap.
Capped compose_hg(const GrowthFunctions& funcs, std::uint64_t t, const BigInt& cap);
/// Largest t with compose_hg(t) <= horizon (0 when even one step overshoots).
std::uint64_t max_iterations_within(const GrowthFunctions& funcs, const BigInt& horizon);

/// Failure probability of the convergence guarantee after t iterations:
/// exp(-b(lambda + 2 - z)) / ((1 - exp(-b rho eps / 2))(1 - exp(-b))^2)
/// + |F| exp(-t c) / (1 - exp(-c)), lambda = alpha t - m - z + |F|. Not clamped.
double convergence_failure(const BoundParams& params, std::uint64_t t);
/// 1 - convergence_failure at the largest t fitting in the horizon, clamped.
double convergence_probability(const BoundParams& params, const GrowthFunctions& funcs,
                               const BigInt& horizon);

struct StepsForProbability {
  /// Smallest t with convergence_failure(t) < p.
  std::uint64_t t = 0;
  Capped n;
};

StepsForProbability steps_for_probability(const BoundParams& params, const GrowthFunctions& funcs,
                                          double p, const BigInt& cap);

/// The P# instance: squared error (rho = kappa = 2), eps = 1/2, margin 1/2
/// (m = 3), f* at index 1 of a three-member pool.
BoundParams psharp_bound_params();
/// h(t) = t + 1, g = psharp_reveal(base).
GrowthFunctions psharp_growth(std::uint64_t base = 10);

std::string to_string(const Capped& value);

}  // namespace evop
