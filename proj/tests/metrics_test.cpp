#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "evop/metrics.hpp"
#include "support.hpp"

using namespace evop;

namespace {

// Streams: fstar, f1, f0.
RunLedger gamblers_ledger(Environment& env, Index steps) {
  RunLedger ledger({"fstar", "f1", "f0"}, squared_error());
  const std::vector<std::optional<Prediction>> preds{Prediction(0.5), Prediction(1.0), Prediction(0.0)};
  for (Index n = 1; n <= steps; ++n) {
    REQUIRE(env.step());
    ledger.record(preds, env.truth(n));
  }
  return ledger;
}

std::vector<std::optional<Prediction>> stream_of(std::initializer_list<double> v) {
  std::vector<std::optional<Prediction>> out;
  for (double x : v) {
    if (std::isnan(x)) {
      out.emplace_back();
    } else {
      out.emplace_back(Prediction(x));
    }
  }
  return out;
}

RunLedger random_ledger(std::uint64_t seed, Index steps, std::size_t streams) {
  Rng rng(seed);
  std::vector<std::string> names;
  for (std::size_t s = 0; s < streams; ++s) names.push_back("s" + std::to_string(s));
  RunLedger ledger(names, squared_error());
  for (Index n = 1; n <= steps; ++n) {
    std::vector<std::optional<Prediction>> p;
    for (std::size_t s = 0; s < streams; ++s) {
      if (s >= 2 && rng() % 5 == 0) {
        p.emplace_back();
      } else {
        p.emplace_back(Prediction(uniform01(rng)));
      }
    }
    ledger.record(p, bernoulli(rng, 0.5) ? kHeads : kTails);
  }
  return ledger;
}

}  // namespace

TEST_CASE("the scripted swing trace") {
  PSharpParams p;
  p.forced_coins = {kTails, kTails, kTails, kTails, kHeads};
  auto env = make_psharp(p, 1);
  const auto ledger = gamblers_ledger(*env, 11111);
  CHECK(std::abs(ledger.cumulative_loss(0, 11111) - 2777.75) <= 1e-9);
  CHECK(std::abs(ledger.cumulative_loss(1, 11111) - 1111.0) <= 1e-9);
  const std::size_t f1[] = {1};
  const double r = regret(ledger, 0, f1, 11111);
  CHECK(std::abs(r - 1666.75) <= 1e-9);
  CHECK(r >= 0.15 * 11111);
  CHECK(average_regret(ledger, 0, f1, Subsequence::prefix(11111), 11111) ==
        doctest::Approx(1666.75 / 11111).epsilon(1e-12));
}

TEST_CASE("self comparison and the best stream") {
  const auto ledger = random_ledger(3, 200, 3);
  const std::size_t self[] = {0};
  CHECK(regret(ledger, 0, self, 200) == 0.0);
  std::size_t best = 0;
  for (std::size_t s = 1; s < 2; ++s) {
    if (ledger.cumulative_loss(s, 200) < ledger.cumulative_loss(best, 200)) best = s;
  }
  const std::size_t both[] = {0, 1};
  CHECK(regret(ledger, best, both, 200) <= 0.0);
}

TEST_CASE("regret matches direct sums on random subsequences") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto ledger = random_ledger(seed, 300, 4);
    Rng rng(seed * 31);
    std::vector<Index> idx;
    for (Index t = 1; t <= 300; ++t) {
      if (rng() % 3 == 0) idx.push_back(t);
    }
    const Subsequence s(idx);
    const std::size_t n = s.size() / 2 + 1;
    auto direct = [&](std::size_t f) -> std::optional<double> {
      double total = 0;
      for (std::size_t q = 0; q < n; ++q) {
        const auto& y = ledger.prediction(f, s[q]);
        if (!y) return std::nullopt;
        total += ledger.loss_spec().eval(ledger.truth(s[q]), *y);
      }
      return total;
    };
    const std::size_t comps[] = {1, 2, 3};
    std::optional<double> best;
    for (std::size_t c : comps) {
      const auto l = direct(c);
      if (l && (!best || *l < *best)) best = l;
    }
    REQUIRE(best);
    CHECK(regret(ledger, 0, comps, s, n) == doctest::Approx(*direct(0) - *best).epsilon(1e-12));
  }
}

TEST_CASE("pairwise regret is antisymmetric") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto ledger = random_ledger(seed, 400, 2);
    const std::size_t a[] = {0}, b[] = {1};
    for (Index n = 1; n <= 400; n += 13) {
      CHECK(regret(ledger, 0, b, n) == -regret(ledger, 1, a, n));
      const Subsequence even([&] {
        std::vector<Index> v;
        for (Index t = 2; t <= n; t += 2) v.push_back(t);
        return v;
      }());
      if (!even.empty()) {
        CHECK(regret(ledger, 0, b, even, even.size()) == -regret(ledger, 1, a, even, even.size()));
      }
    }
  }
}

TEST_CASE("competitors must be defined throughout") {
  RunLedger ledger({"f", "partial"}, squared_error());
  ledger.record(stream_of({0.5, 0.5}), kHeads);
  ledger.record(stream_of({0.5, NAN}), kHeads);
  ledger.record(stream_of({0.5, 0.5}), kTails);
  const std::size_t partial[] = {1};
  CHECK_THROWS_AS(regret(ledger, 0, partial, 3), EmptyComparisonClass);
  CHECK(regret(ledger, 0, partial, Subsequence({1, 3}), 2) == 0.0);
  CHECK(regret(ledger, 0, partial, 1) == 0.0);
  CHECK_THROWS_AS(regret(ledger, 1, std::span<const std::size_t>{}, 1), EmptyComparisonClass);
  CHECK_THROWS_AS(regret(ledger, 1, partial, 3), std::invalid_argument);
  CHECK_THROWS_AS(regret(ledger, 0, partial, 4), std::out_of_range);
}

TEST_CASE("ledger bookkeeping") {
  RunLedger ledger({"a", "b"}, squared_error());
  CHECK_THROWS_AS(ledger.record(stream_of({0.5}), kHeads), std::invalid_argument);
  ledger.record(stream_of({0.5, NAN}), kHeads);
  ledger.record(stream_of({1.0, 0.0}), kTails);
  CHECK(ledger.steps() == 2);
  CHECK(ledger.find("b") == std::size_t{1});
  CHECK(ledger.loss(0, 1) == 0.25);
  CHECK_FALSE(ledger.loss(1, 1).has_value());
  CHECK(ledger.cumulative_loss(0, 2) == 1.25);
  CHECK(ledger.cumulative_loss(1, 2) == 0.0);
  CHECK(ledger.defined_count(1, 2) == 1);
  CHECK(ledger.defined_count(0, 0) == 0);
}

TEST_CASE("cumulative losses are nondecreasing") {
  const auto ledger = random_ledger(9, 500, 4);
  for (std::size_t s = 0; s < 4; ++s) {
    for (Index n = 1; n <= 500; ++n) {
      REQUIRE(ledger.cumulative_loss(s, n) >= ledger.cumulative_loss(s, n - 1));
    }
  }
}

TEST_CASE("convergence step") {
  const auto a = stream_of({0.1, 0.2, 0.3, 0.4});
  CHECK(convergence_step(a, a, 1e-9) == Index{1});

  std::vector<std::optional<Prediction>> x, y;
  for (Index n = 1; n <= 100; ++n) {
    x.emplace_back(Prediction(0.5));
    y.emplace_back(Prediction(n <= 37 ? 1.0 : 0.5));
  }
  CHECK(convergence_step(x, y, 1e-9) == Index{38});
  y.back() = Prediction(0.9);
  CHECK_FALSE(convergence_step(x, y, 1e-9).has_value());
  CHECK(convergence_step(x, y, 0.5) == Index{1});

  // Undefined steps are skipped.
  const auto p = stream_of({1.0, 0.5, 0.5, NAN});
  const auto q = stream_of({0.0, 0.5, NAN, 0.0});
  CHECK(convergence_step(p, q, 1e-9) == Index{2});
  const auto none = stream_of({NAN, NAN});
  CHECK_FALSE(convergence_step(none, none, 1e-9).has_value());
  CHECK_THROWS_AS(convergence_step(p, none, 1e-9), std::invalid_argument);
}

TEST_CASE("block report identities on P#") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto env = make_psharp(PSharpParams{}, seed);
    const auto ledger = gamblers_ledger(*env, 11111);
    const std::size_t gamblers[] = {1, 2};
    const auto rows = block_report(ledger, *env->blocks(), 0, gamblers);
    REQUIRE(rows.size() == 5);
    Index expected_end = 0, length = 1;
    for (const auto& row : rows) {
      expected_end += length;
      CHECK(row.end == expected_end);
      CHECK(row.start == expected_end - length + 1);
      CHECK(row.block_loss[0] == 0.25 * double(length));
      CHECK(row.block_loss[1] == (row.coin == kHeads ? 0.0 : double(length)));
      CHECK(row.block_loss[2] == (row.coin == kTails ? 0.0 : double(length)));
      REQUIRE(row.regret);
      CHECK(*row.regret == regret(ledger, 0, gamblers, row.end));
      length *= 10;
    }
  }
}

TEST_CASE("f* regret against the gamblers swings at every block end") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    auto env = make_psharp(PSharpParams{}, derive_seed(2, seed));
    const auto ledger = gamblers_ledger(*env, 11111);
    const std::size_t gamblers[] = {1, 2};
    for (const auto& row : block_report(ledger, *env->blocks(), 0, gamblers)) {
      if (row.block < 2) continue;
      CHECK(*row.regret >= 0.14 * double(row.end));
    }
  }
}

TEST_CASE("average regret of the right constant vanishes with immediate feedback") {
  auto env = make_iid_bernoulli(0.35, DelaySchedule::constant(0), 17);
  std::vector<std::string> names{"fstar"};
  std::vector<std::optional<Prediction>> preds{Prediction(0.35)};
  for (int g = 0; g <= 10; ++g) {
    names.push_back("c" + std::to_string(g));
    preds.emplace_back(Prediction(g / 10.0));
  }
  RunLedger ledger(names, squared_error());
  for (Index n = 1; n <= 100000; ++n) {
    env->step();
    ledger.record(preds, env->truth(n));
  }
  std::vector<std::size_t> grid;
  for (std::size_t s = 1; s < names.size(); ++s) grid.push_back(s);
  const auto full = Subsequence::prefix(100000);
  CHECK(average_regret(ledger, 0, grid, full, 1000) <= 0.02);
  CHECK(average_regret(ledger, 0, grid, full, 100000) <= 0.002);
}
