#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>

#include "evop/core_model.hpp"
#include "evop/random.hpp"
#include "support.hpp"

using namespace evop;
using evop::testing::make_log;

namespace {

// Straight-line recomputation of every log query from the raw observation
// lists.
struct LogOracle {
  std::vector<std::vector<Reveal>> steps;

  std::optional<Index> reveal_time(Index t) const {
    for (std::size_t k = 0; k < steps.size(); ++k) {
      for (const auto& r : steps[k]) {
        if (r.index == t) return k + 1;
      }
    }
    return std::nullopt;
  }

  std::map<Index, std::pair<Index, Outcome>> first_reveals(Index n) const {
    std::map<Index, std::pair<Index, Outcome>> out;
    for (Index k = 1; k <= n; ++k) {
      for (const auto& r : steps[k - 1]) out.emplace(r.index, std::make_pair(k, r.outcome));
    }
    return out;
  }

  std::uint64_t revealed_count(Index n) const { return first_reveals(n).size(); }

  std::uint64_t revealed_count(Outcome x, Index n) const {
    std::uint64_t c = 0;
    for (const auto& [t, v] : first_reveals(n)) c += v.second == x;
    return c;
  }

  std::uint64_t chain_bound(Index n) const {
    const auto first = first_reveals(n);
    std::set<Index> fresh_steps;
    std::uint64_t early = 0;
    for (const auto& [t, v] : first) {
      fresh_steps.insert(v.first);
      if (v.first <= t) ++early;
    }
    return fresh_steps.size() + early;
  }
};

Outcome outcome_of(Index t) { return (splitmix64(t) & 1) ? kHeads : kTails; }

LogOracle random_steps(std::uint64_t seed, Index n) {
  Rng rng(seed);
  LogOracle o;
  for (Index k = 1; k <= n; ++k) {
    std::set<Index> picks;
    const auto count = rng() % 4;
    for (std::uint64_t c = 0; c < count; ++c) {
      const auto kind = rng() % 10;
      if (kind < 7) {
        picks.insert(1 + rng() % (2 * n));
      } else if (kind < 9) {
        picks.insert(k + rng() % 3);
      } else {
        picks.insert((Index{1} << 20) + rng() % 1000);  // beyond the dense range
      }
    }
    std::vector<Reveal> obs;
    for (const Index t : picks) obs.push_back({t, outcome_of(t)});
    o.steps.push_back(obs);
  }
  return o;
}

}  // namespace

TEST_CASE("appending an empty observation") {
  ObservationLog log;
  log.append(Observation());
  CHECK(log.size() == 1);
  CHECK(log.revealed_count(1) == 0);
  CHECK_FALSE(log.lookup(1).has_value());
  CHECK(log.observation(1).empty());
}

TEST_CASE("first reveal wins") {
  auto log = make_log({{}, {}, {{3, kHeads}}});
  REQUIRE(log.reveal_time(3) == 3);
  log.append(Observation({{3, kHeads}}));
  CHECK(log.reveal_time(3) == 3);
  CHECK(log.revealed_count(4) == 1);
}

TEST_CASE("contradicting reveal is rejected and leaves the log unchanged") {
  auto log = make_log({{{3, kHeads}}});
  CHECK_THROWS_AS(log.append(Observation({{1, kTails}, {3, kTails}})), ConsistencyViolation);
  CHECK(log.size() == 1);
  CHECK_FALSE(log.lookup(1).has_value());
  CHECK(log.lookup(3) == kHeads);
}

TEST_CASE("lookup and reveal time") {
  const auto log = make_log({{}, {{1, kHeads}}});
  CHECK(log.lookup(1) == kHeads);
  CHECK(log.reveal_time(1) == 2);
  CHECK_FALSE(log.lookup(2).has_value());
  CHECK_FALSE(log.reveal_time(7).has_value());
  CHECK_FALSE(log.prefix(1).lookup(1).has_value());
  CHECK(log.prefix(2).lookup(1) == kHeads);
}

TEST_CASE("observation validation") {
  CHECK_THROWS_AS(Observation({{0, kHeads}}), std::invalid_argument);
  CHECK_THROWS_AS(Observation({{2, kHeads}, {2, kHeads}}), std::invalid_argument);
  CHECK(Observation({{2, kHeads}, {5, kTails}}).at(5) == kTails);
  CHECK_FALSE(Observation({{2, kHeads}}).at(3).has_value());
}

TEST_CASE("is_independent") {
  const auto quick = make_log({{}, {{1, kHeads}}, {}, {}, {}});
  const auto slow = make_log({{}, {}, {}, {}, {{1, kHeads}}});
  CHECK(is_independent(Subsequence({4}), slow));
  CHECK(is_independent(Subsequence({1, 2}), quick));
  CHECK_FALSE(is_independent(Subsequence({1, 2}), slow));
  CHECK(is_independent(Subsequence({1, 5}), slow));
  CHECK_FALSE(is_independent(Subsequence({2, 3}), quick));
}

TEST_CASE("subsequences are strictly increasing and 1-based") {
  CHECK_THROWS_AS(Subsequence({2, 2}), std::invalid_argument);
  CHECK_THROWS_AS(Subsequence({3, 1}), std::invalid_argument);
  CHECK_THROWS_AS(Subsequence({0, 1}), std::invalid_argument);
  const auto p = Subsequence::prefix(4);
  REQUIRE(p.size() == 4);
  CHECK(p[0] == 1);
  CHECK(p[3] == 4);
}

TEST_CASE("prediction distance") {
  CHECK(distance(Prediction(0.9), Prediction(0.1)) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(distance(Prediction(0.25), Prediction(0.75)) == 0.5);
  CHECK(distance(Prediction({0.0, 3.0}), Prediction({4.0, 0.0})) == 5.0);
  CHECK_THROWS_AS(distance(Prediction(0.1), Prediction({0.1, 0.2})), std::invalid_argument);
  CHECK_THROWS_AS(Prediction(std::span<const double>()), std::invalid_argument);
  CHECK_FALSE(Prediction(std::numeric_limits<double>::infinity()).finite());
}

TEST_CASE("log queries agree with a brute-force oracle") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const Index n = 60;
    const auto oracle = random_steps(seed, n);
    const auto log = make_log(oracle.steps);
    for (Index k = 0; k <= n; ++k) {
      CHECK(log.revealed_count(k) == oracle.revealed_count(k));
      CHECK(log.revealed_count(kHeads, k) == oracle.revealed_count(kHeads, k));
      CHECK(log.revealed_count(kTails, k) == oracle.revealed_count(kTails, k));
      CHECK(log.chain_bound(k) == oracle.chain_bound(k));
    }
    std::set<Index> touched;
    for (const auto& s : oracle.steps) {
      for (const auto& r : s) touched.insert(r.index);
    }
    touched.insert(1);
    touched.insert(2 * n + 5);
    for (const Index t : touched) {
      CHECK(log.reveal_time(t) == oracle.reveal_time(t));
      if (oracle.reveal_time(t)) CHECK(log.lookup(t) == outcome_of(t));
    }
  }
}

TEST_CASE("reveal times never change under append") {
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    const auto oracle = random_steps(seed, 80);
    ObservationLog log;
    std::map<Index, Index> seen;
    for (const auto& s : oracle.steps) {
      log.append(Observation(s));
      for (const auto& [t, k] : seen) CHECK(log.reveal_time(t) == k);
      for (const auto& r : s) seen.emplace(r.index, *log.reveal_time(r.index));
    }
  }
}
