#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "evop/bounds.hpp"

using namespace evop;

namespace {

BigInt big(const Capped& c) {
  REQUIRE(std::holds_alternative<BigInt>(c));
  return std::get<BigInt>(c);
}

bool overflowed(const Capped& c) { return std::holds_alternative<Overflow>(c); }

// The failure probability written out term by term in long double.
long double failure_oracle(long double rho, long double kappa, long double eps, long double m,
                           long double z, long double F, long double t) {
  const long double b = rho / (kappa * kappa);
  const long double alpha = rho * (1 - eps) / (8 * m * m);
  const long double c = rho * rho * (1 - eps) * (1 - eps) / (16 * m * m * kappa * kappa);
  const long double lambda = alpha * t - m - z + F;
  const long double first = std::exp(-b * (lambda + 2 - z)) /
                            ((1 - std::exp(-b * rho * eps / 2)) * std::pow(1 - std::exp(-b), 2));
  const long double second = F * std::exp(-c * t) / (1 - std::exp(-c));
  return first + second;
}

}  // namespace

TEST_CASE("martingale tail bound") {
  CHECK(martingale_tail_bound(4.0, 2.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
  CHECK(martingale_tail_bound(4.0, 2.0) == doctest::Approx(0.1353).epsilon(1e-3));
  CHECK(martingale_tail_bound(1e-12, 1.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(martingale_tail_bound(0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(martingale_tail_bound(1.0, -1.0), std::domain_error);
  for (double l = 0.5; l < 20; l += 0.5) {
    CHECK(martingale_tail_bound(l + 0.5, 2.0) < martingale_tail_bound(l, 2.0));
    CHECK(martingale_tail_bound(l, 2.5) > martingale_tail_bound(l, 2.0));
  }
}

TEST_CASE("a = kappa sqrt(2 / rho) turns the bound into exp(-b M)") {
  for (double rho : {0.5, 1.0, 2.0, 3.0}) {
    for (double kappa : {1.0, 2.0, 5.0}) {
      const double a = kappa * std::sqrt(2.0) / std::sqrt(rho);
      for (double M : {0.1, 1.0, 4.0, 12.0}) {
        CHECK(martingale_tail_bound(M, a) == doctest::Approx(std::exp(-rho / (kappa * kappa) * M)).epsilon(1e-12));
      }
    }
  }
  const auto p = psharp_bound_params();
  CHECK(p.kappa * std::sqrt(2.0 / p.rho) == 2.0);
}

TEST_CASE("concentration check on the bundled generators") {
  const std::vector<double> lambdas{1, 2, 5, 10};
  const auto zero = verify_concentration(zero_generator(), 100, 2000, lambdas, 1);
  CHECK(zero.all_pass());
  for (const auto& c : zero.checks) CHECK(c.empirical == 0.0);

  const auto ps = verify_concentration(psharp_generator(squared_error()), 100, 20000, lambdas, 2);
  CHECK(ps.all_pass());
  REQUIRE(ps.checks.size() == 4);
  CHECK(ps.checks[0].bound == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
  CHECK(ps.trials == 20000);

  const auto neg = verify_concentration(negative_control_generator(), 100, 2000, lambdas, 3);
  CHECK_FALSE(neg.all_pass());
  for (const auto& c : neg.checks) CHECK(c.empirical == 1.0);

  CHECK_THROWS_AS(verify_concentration(contract_violation_generator(), 100, 1000, lambdas, 4),
                  GeneratorContractViolation);
  CHECK_THROWS_AS(verify_concentration(zero_generator(), 100, 999, lambdas, 4), std::invalid_argument);
}

TEST_CASE("P# generator increments") {
  Rng rng(5);
  const auto s = psharp_generator(squared_error()).draw(rng, 1000);
  CHECK(s.a == 2.0);
  int up = 0;
  for (const auto& inc : s.increments) {
    CHECK(std::abs(inc.r) == 0.5);
    CHECK(inc.v == 0.25);
    CHECK(std::abs(inc.r) <= s.a * std::sqrt(inc.v));
    up += inc.r > 0;
  }
  CHECK(std::abs(up - 500) < 3 * std::sqrt(250.0));
}

TEST_CASE("derived constants") {
  const auto p = psharp_bound_params();
  CHECK(p.m == 3);
  CHECK(p.b() == 0.5);
  CHECK(p.alpha() == doctest::Approx(1.0 / 72.0).epsilon(1e-15));
  CHECK(p.c() == doctest::Approx(1.0 / 576.0).epsilon(1e-15));
  CHECK(BoundParams::m_for_margin(0.5) == 3);
  CHECK(BoundParams::m_for_margin(0.3) == 4);
  CHECK(BoundParams::m_for_margin(1.0) == 2);
  CHECK(BoundParams::m_for_margin(0.25) == 5);
  CHECK_THROWS_AS(BoundParams::m_for_margin(0.0), std::invalid_argument);
  BoundParams bad = p;
  bad.epsilon = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = p;
  bad.z = 4;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("RelScore tail") {
  const auto p = psharp_bound_params();
  CHECK(relscore_tail(p, 20) == doctest::Approx(std::exp(-10.0) / (1 - std::exp(-0.25))).epsilon(1e-12));
  CHECK(relscore_tail(p, 0) == 1.0);
  CHECK(relscore_tail(p, 1e4) < 1e-300);
}

TEST_CASE("union tail equals the truncated double sum") {
  for (double rho : {1.0, 2.0}) {
    for (double eps : {0.2, 0.5, 0.9}) {
      BoundParams p;
      p.rho = rho;
      p.epsilon = eps;
      for (double lambda : {10.0, 25.0, 40.0}) {
        long double sum = 0;
        const long double b = p.b();
        for (int j = 1; j <= 400; ++j) {
          for (int m = 1; m <= 400; ++m) {
            sum += std::exp(-b * (lambda + m + j)) / (1 - std::exp(-b * rho * eps / 2));
          }
        }
        if (sum >= 1) continue;
        CHECK(relscore_union_tail(p, lambda) == doctest::Approx(double(sum)).epsilon(1e-9));
      }
    }
  }
  CHECK(relscore_union_tail(psharp_bound_params(), 0.0) == 1.0);
}

TEST_CASE("growth functions") {
  const BigInt cap = BigInt(1) << 1000;
  const auto g = GrowthFunction::psharp_reveal(10);
  CHECK(*g(0, cap) == 1);
  CHECK(*g(1, cap) == 2);
  CHECK(*g(2, cap) == 12);
  CHECK(*g(3, cap) == 112);
  CHECK(*g(4, cap) == 1112);
  CHECK_FALSE(g(30, BigInt(1000000000)).has_value());
  const auto s = GrowthFunction::successor();
  for (int t = 0; t < 200; ++t) {
    CHECK(*s(t, cap) == t + 1);
    CHECK(*g(t, cap) >= t);
    CHECK(*g(t + 1, cap) >= *g(t, cap));
  }
  const auto tab = GrowthFunction::table({2, 5, 9});
  CHECK(*tab(2, cap) == 5);
  CHECK_THROWS_AS(tab(4, cap), std::out_of_range);
  CHECK_THROWS_AS(tab(0, cap), std::out_of_range);
  CHECK(GrowthFunction::affine(3, 4).affine_form()->first == 3);
  CHECK_FALSE(g.affine_form().has_value());
}

TEST_CASE("compose_hg") {
  const BigInt cap = BigInt(1) << 200;
  const GrowthFunctions doubling{GrowthFunction::successor(), GrowthFunction::affine(2, 0)};
  CHECK(big(compose_hg(doubling, 0, cap)) == 1);
  for (std::uint64_t t = 0; t <= 150; ++t) {
    CHECK(big(compose_hg(doubling, t, cap)) == (BigInt(1) << (t + 1)) - 1);
  }
  CHECK(overflowed(compose_hg(doubling, 250, cap)));

  // The closed-form unit-slope path against a table that hides its shape.
  const GrowthFunctions unit{GrowthFunction::successor(), GrowthFunction::affine(1, 3)};
  std::vector<BigInt> plus3;
  for (int t = 1; t <= 500; ++t) plus3.push_back(t + 3);
  const GrowthFunctions tabled{GrowthFunction::successor(), GrowthFunction::table(plus3)};
  for (std::uint64_t t = 0; t <= 100; ++t) {
    CHECK(big(compose_hg(unit, t, cap)) == big(compose_hg(tabled, t, cap)));
  }
  CHECK(big(compose_hg(unit, 1000000000000ull, cap)) == BigInt(1) + BigInt(4) * 1000000000000ull);

  const auto ps = psharp_growth();
  CHECK(big(compose_hg(ps, 1, cap)) == 3);
  CHECK(big(compose_hg(ps, 2, cap)) == 113);
  CHECK(overflowed(compose_hg(ps, 3, BigInt(1000000000))));
  CHECK(overflowed(compose_hg(ps, 9, BigInt(1000000000))));
  CHECK(to_string(compose_hg(ps, 9, BigInt(1000000000))) == "overflow(>1000000000)");
  CHECK(to_string(compose_hg(ps, 2, cap)) == "113");

  const GrowthFunctions flat{GrowthFunction::affine(1, 0), GrowthFunction::affine(1, 0)};
  CHECK_THROWS_AS(compose_hg(flat, 3, cap), std::invalid_argument);
  const GrowthFunctions shrinking{GrowthFunction::successor(), GrowthFunction::table({1, 1, 1})};
  CHECK_THROWS_AS(compose_hg(shrinking, 3, cap), std::invalid_argument);
}

TEST_CASE("iterations within a horizon") {
  const GrowthFunctions two{GrowthFunction::successor(), GrowthFunction::successor()};
  CHECK(max_iterations_within(two, 10) == 4);
  CHECK(max_iterations_within(two, 11) == 5);
  CHECK(max_iterations_within(psharp_growth(), 100000) == 2);
  CHECK(max_iterations_within(psharp_growth(), 2) == 0);
  CHECK(max_iterations_within(psharp_growth(), 3) == 1);
}

TEST_CASE("failure probability matches an independent recomputation") {
  struct Case {
    double rho, kappa, eps;
    std::uint64_t m, z, F, t;
  };
  for (const Case& k : {Case{2, 2, 0.5, 3, 1, 3, 100}, Case{1, 3, 0.25, 2, 2, 5, 100},
                        Case{4, 1, 0.9, 7, 1, 2, 5000}, Case{2, 2, 0.5, 3, 1, 3, 0}}) {
    BoundParams p;
    p.rho = k.rho;
    p.kappa = k.kappa;
    p.epsilon = k.eps;
    p.m = k.m;
    p.z = k.z;
    p.pool_size = k.F;
    const double expected = double(failure_oracle(k.rho, k.kappa, k.eps, k.m, k.z, k.F, k.t));
    CHECK(convergence_failure(p, k.t) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("convergence probability") {
  const auto p = psharp_bound_params();
  CHECK(convergence_probability(p, psharp_growth(), 2) == 0.0);
  const GrowthFunctions lin{GrowthFunction::successor(), GrowthFunction::successor()};
  double prev = 0;
  for (BigInt T = 1; T < BigInt(1) << 40; T *= 3) {
    const double now = convergence_probability(p, lin, T);
    CHECK(now >= prev);
    CHECK(now >= 0.0);
    CHECK(now <= 1.0);
    prev = now;
  }
  CHECK(prev > 0.99);
}

TEST_CASE("steps for a target probability") {
  const auto p = psharp_bound_params();
  const BigInt cap("1000000000000");
  const auto r = steps_for_probability(p, psharp_growth(), 0.5, cap);
  CHECK(overflowed(r.n));
  CHECK(r.t > 3);
  CHECK(convergence_failure(p, r.t) < 0.5);
  CHECK(convergence_failure(p, r.t - 1) >= 0.5);

  const GrowthFunctions lin{GrowthFunction::successor(), GrowthFunction::successor()};
  const auto loose = steps_for_probability(p, lin, 0.999999, cap);
  const auto tight = steps_for_probability(p, lin, 0.01, cap);
  CHECK(loose.t < tight.t);
  CHECK_THROWS_AS(steps_for_probability(p, lin, 1.0, cap), std::invalid_argument);
  CHECK_THROWS_AS(steps_for_probability(p, lin, 0.0, cap), std::invalid_argument);
}

TEST_CASE("the returned N achieves the requested probability") {
  const BigInt cap("1000000000000000000000000000000");
  const std::vector<GrowthFunctions> growths{
      {GrowthFunction::successor(), GrowthFunction::successor()},
      {GrowthFunction::affine(1, 5), GrowthFunction::affine(2, 1)},
  };
  int checked = 0;
  for (double rho : {1.0, 2.0}) {
    for (double eps : {0.3, 0.7}) {
      for (std::uint64_t m : {2u, 4u}) {
        for (double prob : {0.5, 0.1, 0.01}) {
          for (const auto& funcs : growths) {
            BoundParams p;
            p.rho = rho;
            p.epsilon = eps;
            p.m = m;
            const auto r = steps_for_probability(p, funcs, prob, cap);
            if (overflowed(r.n)) continue;
            ++checked;
            CHECK(convergence_probability(p, funcs, big(r.n)) >= 1.0 - prob);
            if (r.t > 0) CHECK(convergence_failure(p, r.t - 1) >= prob);
          }
        }
      }
    }
  }
  CHECK(checked >= 20);
}
