#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "evop/core_model.hpp"
#include "evop/environments.hpp"
#include "evop/evop.hpp"
#include "evop/forecasters.hpp"
#include "evop/loss.hpp"
#include "evop/random.hpp"

namespace evop::testing {

inline ObservationLog make_log(const std::vector<std::vector<Reveal>>& steps) {
  ObservationLog log;
  for (const auto& s : steps) log.append(Observation(s));
  return log;
}

inline ObservationLog drive(Environment& env, Index steps) {
  ObservationLog log;
  for (Index n = 0; n < steps; ++n) {
    const auto obs = env.step();
    if (!obs) break;
    log.append(*obs);
  }
  return log;
}

/// Environment families whose reveals arrive in sparse batches, so that the
/// MaxScore search cap grows only logarithmically.
inline std::unique_ptr<Environment> sparse_environment(std::uint64_t seed, Index length) {
  Rng rng(seed);
  const auto pick = rng() % 3;
  const double bias = 0.2 + 0.6 * uniform01(rng);
  if (pick == 0) {
    PSharpParams p;
    p.base = 2 + rng() % 2;
    p.coin_bias = bias;
    return make_psharp(p, rng());
  }
  if (pick == 1) {
    return make_iid_bernoulli(bias, DelaySchedule::batched(1.3 + 1.2 * uniform01(rng)), rng());
  }
  std::vector<Outcome> seq;
  for (Index t = 0; t < length; ++t) seq.push_back(bernoulli(rng, bias) ? kHeads : kTails);
  const std::string schedule = (rng() % 2) ? "psharp:2" : "psharp:3";
  return make_deterministic(std::move(seq), RevealSchedule::parse(schedule));
}

/// Frequent feedback: short constant or tabled delays.
inline std::unique_ptr<Environment> dense_environment(std::uint64_t seed) {
  Rng rng(seed);
  const double q = 0.2 + 0.6 * uniform01(rng);
  if (rng() % 2) return make_iid_bernoulli(q, DelaySchedule::constant(rng() % 4), rng());
  std::vector<Index> delays;
  for (int k = 0; k < 30; ++k) delays.push_back(rng() % 6);
  return make_iid_bernoulli(q, DelaySchedule::table(delays), rng());
}

inline std::function<bool(Index)> random_predicate(Rng& rng, std::string& name) {
  switch (rng() % 4) {
    case 0:
      name = "even";
      return [](Index n) { return n % 2 == 0; };
    case 1:
      name = "odd";
      return [](Index n) { return n % 2 == 1; };
    case 2: {
      const Index k = 1 + rng() % 40;
      name = "after:" + std::to_string(k);
      return [k](Index n) { return n > k; };
    }
    default: {
      const Index k = 5 + rng() % 60;
      name = "before:" + std::to_string(k);
      return [k](Index n) { return n < k; };
    }
  }
}

/// Member 1 is total; the others mix constants, frequency estimators and
/// partially defined wrappers.
inline ForecasterPool random_pool(std::uint64_t seed, std::size_t size) {
  Rng rng(seed);
  auto base = [&rng]() -> ForecasterPtr {
    switch (rng() % 3) {
      case 0:
        return constant(static_cast<double>(rng() % 11) / 10.0);
      case 1:
        return constant(uniform01(rng));
      default:
        return empirical_frequency(0.5 + 2.5 * uniform01(rng), 0.5 + 2.5 * uniform01(rng));
    }
  };
  std::vector<ForecasterPool::Member> members;
  members.push_back({"f1", base()});
  for (std::size_t i = 2; i <= size; ++i) {
    ForecasterPtr f = base();
    if (rng() % 3 == 0) {
      std::string name;
      auto pred = random_predicate(rng, name);
      f = abstaining(f, std::move(pred), name);
    }
    members.push_back({"f" + std::to_string(i), f});
  }
  return ForecasterPool(std::move(members));
}

inline ForecasterPool psharp_pool(bool with_frequency = false) {
  std::vector<ForecasterPool::Member> m{
      {"fstar", constant(0.5)}, {"f1", constant(1.0)}, {"f0", constant(0.0)}};
  if (with_frequency) m.push_back({"freq", empirical_frequency()});
  return ForecasterPool(std::move(m));
}

}  // namespace evop::testing
