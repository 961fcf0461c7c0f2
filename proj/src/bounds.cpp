#include "evop/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace evop {

namespace {

double clamp01(double x) {
  if (std::isnan(x)) return 0.0;
  return std::clamp(x, 0.0, 1.0);
}

MartingaleGenerator constant_generator(std::string name, double a, Increment inc) {
  return {std::move(name), [a, inc](Rng&, std::size_t n) {
            return MartingaleSample{std::vector<Increment>(n, inc), a};
          }};
}

void check_sample(const MartingaleSample& s, const std::string& name) {
  if (!(s.a > 0.0)) throw GeneratorContractViolation(name + ": a must be positive");
  for (std::size_t i = 0; i < s.increments.size(); ++i) {
    const auto& [r, v] = s.increments[i];
    const double limit = s.a * std::sqrt(v);
    if (!(v >= 0.0) || !(std::abs(r) <= limit * (1.0 + 1e-12))) {
      std::ostringstream os;
      os.precision(17);
      os << name << ": increment " << i + 1 << " has |r| = " << std::abs(r)
         << " > a sqrt(v) = " << limit;
      throw GeneratorContractViolation(os.str());
    }
  }
}

}  // namespace

double martingale_tail_bound(double lambda, double a) {
  if (!(lambda > 0.0)) throw std::domain_error("martingale_tail_bound needs lambda > 0");
  if (!(a > 0.0)) throw std::domain_error("martingale_tail_bound needs a > 0");
  return std::exp(-2.0 * lambda / (a * a));
}

MartingaleGenerator zero_generator() { return constant_generator("zero", 1.0, {0.0, 0.0}); }

MartingaleGenerator psharp_generator(const LossSpec& loss, double coin_bias) {
  if (!loss.grad) throw std::invalid_argument("psharp generator needs a loss gradient");
  const Prediction half(0.5);
  const double r_heads = -loss.grad(kHeads, half).scalar() * (1.0 - 0.5);
  const double r_tails = -loss.grad(kTails, half).scalar() * (1.0 - 0.5);
  const double v = (loss.rho / 2.0) * 0.25;
  const double a = loss.kappa * std::sqrt(2.0 / loss.rho);
  return {"psharp", [=](Rng& rng, std::size_t n) {
            MartingaleSample s;
            s.a = a;
            s.increments.reserve(n);
            for (std::size_t i = 0; i < n; ++i) {
              s.increments.push_back({bernoulli(rng, coin_bias) ? r_heads : r_tails, v});
            }
            return s;
          }};
}

MartingaleGenerator negative_control_generator(double a, double v) {
  return constant_generator("negative_control", a, {a * std::sqrt(v), v});
}

MartingaleGenerator contract_violation_generator(double a, double v) {
  return constant_generator("contract_violation", a, {2.0 * a * std::sqrt(v), v});
}

bool ConcentrationReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const TailCheck& c) { return c.pass; });
}

ConcentrationReport verify_concentration(const MartingaleGenerator& generator,
                                         std::size_t increments, std::uint64_t trials,
                                         const std::vector<double>& lambdas, std::uint64_t seed) {
  if (trials < 1000) throw std::invalid_argument("verify_concentration needs at least 1000 trials");
  if (lambdas.empty()) throw std::invalid_argument("verify_concentration needs lambdas");
  std::vector<std::uint64_t> hits(lambdas.size(), 0);
  double a = 0.0;
  for (std::uint64_t k = 0; k < trials; ++k) {
    Rng rng(derive_seed(seed, k));
    const MartingaleSample s = generator.draw(rng, increments);
    check_sample(s, generator.name);
    if (k == 0) a = s.a;
    if (s.a != a) throw GeneratorContractViolation(generator.name + ": a changed between trials");
    double sum = 0.0;
    for (const auto& [r, v] : s.increments) sum += r - v;
    for (std::size_t l = 0; l < lambdas.size(); ++l) {
      if (sum >= lambdas[l]) ++hits[l];
    }
  }
  ConcentrationReport report{generator.name, trials, increments, {}};
  const auto n = static_cast<double>(trials);
  for (std::size_t l = 0; l < lambdas.size(); ++l) {
    TailCheck c;
    c.lambda = lambdas[l];
    c.empirical = static_cast<double>(hits[l]) / n;
    c.bound = martingale_tail_bound(c.lambda, a);
    c.std_error = std::sqrt(c.bound * (1.0 - c.bound) / n);
    c.pass = c.empirical <= c.bound + 3.0 * c.std_error;
    report.checks.push_back(c);
  }
  return report;
}

double BoundParams::alpha() const {
  const auto md = static_cast<double>(m);
  return rho * (1.0 - epsilon) / (8.0 * md * md);
}

double BoundParams::c() const {
  const auto md = static_cast<double>(m);
  const double q = rho * (1.0 - epsilon);
  return q * q / (16.0 * md * md * kappa * kappa);
}

std::uint64_t BoundParams::m_for_margin(double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw std::invalid_argument("disagreement margin must be positive and finite");
  }
  auto m = static_cast<std::uint64_t>(std::floor(1.0 / delta)) + 1;
  while (m > 1 && 1.0 / static_cast<double>(m - 1) < delta) --m;
  while (!(1.0 / static_cast<double>(m) < delta)) ++m;
  return m;
}

void BoundParams::validate() const {
  if (!(rho > 0.0) || !(kappa > 0.0)) throw std::invalid_argument("rho and kappa must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
  if (m < 1) throw std::invalid_argument("m must be at least 1");
  if (pool_size < 1 || z < 1 || z > pool_size) {
    throw std::invalid_argument("z must index a member of the pool");
  }
}

double relscore_tail(const BoundParams& params, double Lambda) {
  params.validate();
  const double b = params.b();
  return clamp01(std::exp(-b * Lambda) / (1.0 - std::exp(-b * params.rho * params.epsilon / 2.0)));
}

double relscore_union_tail(const BoundParams& params, double lambda) {
  params.validate();
  const double b = params.b();
  const double q = 1.0 - std::exp(-b);
  return clamp01(std::exp(-b * (lambda + 2.0)) /
                 ((1.0 - std::exp(-b * params.rho * params.epsilon / 2.0)) * q * q));
}

GrowthFunction GrowthFunction::affine(BigInt slope, BigInt offset) {
  if (slope < 0 || offset < 0) throw std::invalid_argument("affine growth needs nonnegative terms");
  std::ostringstream os;
  os << slope << "*t+" << offset;
  GrowthFunction f(
      [slope, offset](const BigInt& t, const BigInt& cap) -> std::optional<BigInt> {
        BigInt v = slope * t + offset;
        if (v > cap) return std::nullopt;
        return v;
      },
      os.str());
  f.affine_ = std::make_pair(slope, offset);
  return f;
}

GrowthFunction GrowthFunction::psharp_reveal(std::uint64_t base) {
  if (base < 2) throw std::invalid_argument("psharp base must be at least 2");
  return GrowthFunction(
      [base](const BigInt& t, const BigInt& cap) -> std::optional<BigInt> {
        if (t == 0) return cap >= 1 ? std::optional<BigInt>(1) : std::nullopt;
        // The value is at least 2^(t-1); skip the power when that alone
        // clears the cap.
        const std::size_t cap_bits = cap > 0 ? boost::multiprecision::msb(cap) + 1 : 0;
        if (t > cap_bits + 1) return std::nullopt;
        const BigInt v = boost::multiprecision::pow(BigInt(base), static_cast<unsigned>(t)) /
                             (base - 1) +
                         1;
        if (v > cap) return std::nullopt;
        return v;
      },
      "psharp_reveal(" + std::to_string(base) + ")");
}

GrowthFunction GrowthFunction::table(std::vector<BigInt> values) {
  if (values.empty()) throw std::invalid_argument("growth table is empty");
  const std::size_t size = values.size();
  return GrowthFunction(
      [values = std::move(values)](const BigInt& t, const BigInt& cap) -> std::optional<BigInt> {
        if (t < 1 || t > values.size()) throw std::out_of_range("growth table does not cover t");
        const BigInt& v = values[static_cast<std::size_t>(t) - 1];
        if (v > cap) return std::nullopt;
        return v;
      },
      "table[" + std::to_string(size) + "]");
}

std::optional<BigInt> GrowthFunction::operator()(const BigInt& t, const BigInt& cap) const {
  return fn_(t, cap);
}

namespace {

/// h o g as A t + C when both are affine with A = 1, the only case where
/// iterating one step at a time could take long.
std::optional<BigInt> unit_slope_step(const GrowthFunctions& funcs) {
  const auto h = funcs.h.affine_form();
  const auto g = funcs.g.affine_form();
  if (!h || !g) return std::nullopt;
  if (h->first * g->first != 1) return std::nullopt;
  const BigInt c = h->first * g->second + h->second;
  if (c < 1) throw std::invalid_argument("h o g must grow: need h(t) > t");
  return c;
}

std::optional<BigInt> apply_hg(const GrowthFunctions& funcs, const BigInt& x, const BigInt& cap) {
  const auto gx = funcs.g(x, cap);
  if (!gx) return std::nullopt;
  if (*gx < x) throw std::invalid_argument("g must satisfy g(t) >= t");
  const auto hx = funcs.h(*gx, cap);
  if (!hx) return std::nullopt;
  if (*hx <= *gx) throw std::invalid_argument("h must satisfy h(t) > t");
  return hx;
}

}  // namespace

Capped compose_hg(const GrowthFunctions& funcs, std::uint64_t t, const BigInt& cap) {
  if (cap < 1) return Overflow{cap};
  if (const auto c = unit_slope_step(funcs)) {
    BigInt v = 1 + BigInt(t) * *c;
    if (v > cap) return Overflow{cap};
    return v;
  }
  BigInt x = 1;
  for (std::uint64_t i = 0; i < t; ++i) {
    auto next = apply_hg(funcs, x, cap);
    if (!next) return Overflow{cap};
    x = std::move(*next);
  }
  return x;
}

std::uint64_t max_iterations_within(const GrowthFunctions& funcs, const BigInt& horizon) {
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  if (const auto c = unit_slope_step(funcs)) {
    const BigInt t = (horizon - 1) / *c;
    const BigInt limit = std::numeric_limits<std::uint64_t>::max();
    return static_cast<std::uint64_t>(t > limit ? limit : t);
  }
  BigInt x = 1;
  std::uint64_t t = 0;
  while (true) {
    auto next = apply_hg(funcs, x, horizon);
    if (!next) return t;
    x = std::move(*next);
    ++t;
  }
}

double convergence_failure(const BoundParams& params, std::uint64_t t) {
  params.validate();
  const double b = params.b();
  const double c = params.c();
  const auto td = static_cast<double>(t);
  const auto z = static_cast<double>(params.z);
  const auto f = static_cast<double>(params.pool_size);
  const double lambda = params.alpha() * td - static_cast<double>(params.m) - z + f;
  const double q = 1.0 - std::exp(-b);
  const double union_term = std::exp(-b * (lambda + 2.0 - z)) /
                            ((1.0 - std::exp(-b * params.rho * params.epsilon / 2.0)) * q * q);
  const double late_term = f * std::exp(-td * c) / (1.0 - std::exp(-c));
  return union_term + late_term;
}

double convergence_probability(const BoundParams& params, const GrowthFunctions& funcs,
                               const BigInt& horizon) {
  return clamp01(1.0 - convergence_failure(params, max_iterations_within(funcs, horizon)));
}

StepsForProbability steps_for_probability(const BoundParams& params, const GrowthFunctions& funcs,
                                          double p, const BigInt& cap) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("target failure probability must be in (0, 1)");
  std::uint64_t lo = 0;
  if (!(convergence_failure(params, 0) < p)) {
    std::uint64_t hi = 1;
    while (!(convergence_failure(params, hi) < p)) {
      if (hi > (std::uint64_t{1} << 62)) throw std::overflow_error("no t reaches the target probability");
      lo = hi;
      hi *= 2;
    }
    // failure(lo) >= p > failure(hi)
    while (hi - lo > 1) {
      const std::uint64_t mid = lo + (hi - lo) / 2;
      if (convergence_failure(params, mid) < p) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    lo = hi;
  }
  return {lo, compose_hg(funcs, lo, cap)};
}

BoundParams psharp_bound_params() {
  BoundParams p;
  p.rho = 2.0;
  p.kappa = 2.0;
  p.epsilon = 0.5;
  p.m = BoundParams::m_for_margin(0.5);
  p.z = 1;
  p.pool_size = 3;
  return p;
}

GrowthFunctions psharp_growth(std::uint64_t base) {
  return {GrowthFunction::successor(), GrowthFunction::psharp_reveal(base)};
}

std::string to_string(const Capped& value) {
  if (const auto* v = std::get_if<BigInt>(&value)) return v->str();
  return "overflow(>" + std::get<Overflow>(value).cap.str() + ")";
}

}  // namespace evop
