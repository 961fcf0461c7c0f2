#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "evop/loss.hpp"

using namespace evop;

TEST_CASE("squared error values") {
  const auto L = squared_error();
  CHECK(L.eval(kHeads, 0.5) == 0.25);
  CHECK(L.eval(kTails, 0.0) == 0.0);
  CHECK(L.eval(kHeads, 1.0) == 0.0);
  CHECK(L.eval(kTails, 1.0) == 1.0);
  CHECK(L.eval(kHeads, 0.9) == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(L.rho == 2.0);
  CHECK(L.kappa == 2.0);
  CHECK(L.l_max == 1.0);
  CHECK(L.contains(0.0));
  CHECK(L.contains(1.0));
  CHECK_FALSE(L.contains(1.5));
  CHECK_FALSE(L.contains(-0.01));
}

TEST_CASE("gradient in the prediction") {
  const auto L = squared_error();
  CHECK(L.grad(kHeads, 0.25).scalar() == -1.5);
  CHECK(L.grad(kTails, 0.25).scalar() == 0.5);
}

TEST_CASE("positive symbols select the (1 - p)^2 branch") {
  const auto L = squared_error("7", "0123456789");
  CHECK(L.eval(Outcome{'7'}, 1.0) == 0.0);
  CHECK(L.eval(Outcome{'3'}, 1.0) == 1.0);
  CHECK_THROWS_AS(squared_error(""), std::invalid_argument);
}

TEST_CASE("declared constants of squared error validate") {
  const auto L = squared_error();
  const auto sc = check_strong_convexity(L, 10000, 1);
  CHECK(sc.samples == 10000);
  CHECK(sc.violations == 0);
  CHECK(sc.worst_margin >= -kConstantTolerance);
  CHECK(check_lipschitz(L, 10000, 2).violations == 0);
  CHECK(check_gradient(L, 1000, 3).violations == 0);
}

TEST_CASE("misdeclared constants are caught") {
  auto too_convex = squared_error();
  too_convex.rho = 10.0;
  const auto r = check_strong_convexity(too_convex, 10000, 4);
  CHECK(r.violations > 0);
  CHECK(r.worst_margin < 0.0);

  auto too_flat = squared_error();
  too_flat.kappa = 0.5;
  CHECK(check_lipschitz(too_flat, 10000, 5).violations > 0);

  auto wrong_grad = squared_error();
  wrong_grad.grad = [](Outcome, const Prediction& p) { return Prediction(p.scalar()); };
  CHECK(check_gradient(wrong_grad, 1000, 6).violations > 0);
}

TEST_CASE("validators reject zero samples") {
  const auto L = squared_error();
  CHECK_THROWS_AS(check_strong_convexity(L, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(check_lipschitz(L, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(check_gradient(L, 0, 1), std::invalid_argument);
}

TEST_CASE("lipschitz check at equal points has zero slack use") {
  const auto L = squared_error();
  for (double y : {0.0, 0.3, 1.0}) {
    CHECK(std::abs(L.eval(kHeads, y) - L.eval(kHeads, y)) <= L.kappa * 0.0);
  }
}

TEST_CASE("loss stays in [0, l_max] on sampled predictions") {
  const auto L = squared_error();
  std::mt19937_64 rng(9);
  for (int s = 0; s < 1000; ++s) {
    const auto p = L.sample(rng);
    REQUIRE(L.contains(p));
    for (Outcome x : {kHeads, kTails}) {
      CHECK(L.eval(x, p) >= 0.0);
      CHECK(L.eval(x, p) <= L.l_max);
    }
  }
}
