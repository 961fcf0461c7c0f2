#include "evop/evop.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace evop {

namespace {

using Column = std::vector<std::optional<Prediction>>;

Column predictions_on_prefixes(const Forecaster& f, const ObservationLog& log) {
  Column out;
  out.reserve(log.size());
  for (Index k = 1; k <= log.size(); ++k) out.push_back(f.predict(log.prefix(k)));
  return out;
}

std::vector<SeqElement> scan_test_seq(const Column& yi, const Column& yj, std::uint64_t m,
                                      const ObservationLog& log) {
  std::vector<SeqElement> out;
  if (m == 0) return out;
  bool waiting = false;
  Index t = 0;
  for (Index k = 1; k <= log.size(); ++k) {
    if (waiting) {
      const auto r = log.reveal_time(t);
      if (r && *r <= k) {
        out.push_back({t, k});
        waiting = false;
      }
      continue;
    }
    const auto& a = yi[k - 1];
    const auto& b = yj[k - 1];
    if (a && b && disagree(distance(*a, *b), m)) {
      t = k;
      waiting = true;
    }
  }
  return out;
}

/// Smallest m >= 1 at which distance d counts as a disagreement, or
/// `beyond` if that m exceeds beyond - 1.
std::uint64_t first_disagreeing_m(double d, std::uint64_t beyond) {
  if (!(d > 0.0)) return beyond;
  const double guess = std::floor(1.0 / d) + 1.0;
  std::uint64_t m = guess < static_cast<double>(beyond)
                        ? std::max<std::uint64_t>(1, static_cast<std::uint64_t>(guess))
                        : beyond - 1;
  while (m > 1 && disagree(d, m - 1)) --m;
  while (m < beyond && !disagree(d, m)) ++m;
  return m;
}

class NaiveEvaluator {
 public:
  NaiveEvaluator(const EvOpConfig& config, const ObservationLog& log)
      : config_(config), log_(log), columns_(config.pool.size()) {
    if (log.empty()) throw std::invalid_argument("EvOp needs at least one observation");
    cap_ = score_m_cap(log.view(), config.loss.l_max);
  }

  const Column& column(std::size_t i) {
    auto& c = columns_.at(i - 1);
    if (!c) c = predictions_on_prefixes(config_.pool[i], log_);
    return *c;
  }

  std::vector<SeqElement> test_seq(std::size_t i, std::size_t j, std::uint64_t m) {
    return scan_test_seq(column(i), column(j), m, log_);
  }

  double rel_score(std::size_t i, std::size_t j, std::uint64_t m) {
    const auto losses = element_losses(i, j, test_seq(i, j, m));
    return sum_terms(losses, m);
  }

  double max_score(std::size_t i) {
    double best = max_score_candidate(i, 1, 0, 0.0);
    for (std::size_t j = 1; j <= config_.pool.size(); ++j) {
      if (j != i) best = std::max(best, best_over_m(i, j));
    }
    return best;
  }

  std::uint64_t cap() const { return cap_; }

 private:
  std::vector<std::pair<double, double>> element_losses(std::size_t i, std::size_t j,
                                                        const std::vector<SeqElement>& elems) {
    const auto& yi = column(i);
    const auto& yj = column(j);
    std::vector<std::pair<double, double>> out;
    out.reserve(elems.size());
    for (const auto& e : elems) {
      const Outcome x = *log_.lookup(e.t);
      out.emplace_back(config_.loss.eval(x, *yi[e.t - 1]), config_.loss.eval(x, *yj[e.t - 1]));
    }
    return out;
  }

  double sum_terms(const std::vector<std::pair<double, double>>& losses, std::uint64_t m) const {
    if (m == 0) return 0.0;
    const double pen = relscore_penalty(config_.loss.rho, config_.epsilon, m);
    double score = 0.0;
    for (const auto& [li, lj] : losses) score += relscore_term(li, lj, pen);
    return score;
  }

  // TestSeq only depends on which steps qualify as disagreements, so the
  // scan is redone only at the m values where that set grows.
  double best_over_m(std::size_t i, std::size_t j) {
    const auto& yi = column(i);
    const auto& yj = column(j);
    std::vector<char> changes(cap_ + 2, 0);
    for (Index k = 0; k < log_.size(); ++k) {
      if (yi[k] && yj[k]) changes[first_disagreeing_m(distance(*yi[k], *yj[k]), cap_ + 1)] = 1;
    }
    double best = -std::numeric_limits<double>::infinity();
    std::vector<std::pair<double, double>> losses;
    for (std::uint64_t m = 1; m <= cap_; ++m) {
      if (m == 1 || changes[m]) losses = element_losses(i, j, scan_test_seq(yi, yj, m, log_));
      best = std::max(best, max_score_candidate(i, j, m, sum_terms(losses, m)));
    }
    return best;
  }

  const EvOpConfig& config_;
  const ObservationLog& log_;
  std::vector<std::optional<Column>> columns_;
  std::uint64_t cap_ = 0;
};

template <typename ScoreOf>
Decision select(const std::vector<std::optional<Prediction>>& current, Index n,
                ScoreOf&& score_of) {
  const std::size_t pool_size = current.size();
  std::size_t first = 0;
  for (std::size_t i = 1; i <= pool_size; ++i) {
    if (current[i - 1]) {
      first = i;
      break;
    }
  }
  if (first == 0) {
    throw NoDefinedForecaster("no forecaster is defined at step " + std::to_string(n));
  }
  Decision best{first, *current[first - 1], score_of(first)};
  // MaxScore(i) >= i - 1, so indices past MaxScore(first) + 1 cannot win.
  const double reach = std::floor(best.score + 1.0);
  const std::size_t limit =
      reach >= static_cast<double>(pool_size) ? pool_size : static_cast<std::size_t>(reach);
  for (std::size_t i = first + 1; i <= limit; ++i) {
    if (!current[i - 1]) continue;
    const double s = score_of(i);
    if (s < best.score) best = {i, *current[i - 1], s};
  }
  return best;
}

void check_member(const ForecasterPool& pool, std::size_t i) {
  if (i < 1 || i > pool.size()) throw std::out_of_range("forecaster index out of range");
}

}  // namespace

EvOpConfig::EvOpConfig(LossSpec loss_spec, ForecasterPool forecasters, double eps)
    : loss(std::move(loss_spec)), pool(std::move(forecasters)), epsilon(eps) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
  if (!loss.eval) throw std::invalid_argument("loss has no evaluator");
  if (!(loss.rho > 0.0) || !(loss.l_max > 0.0) || !std::isfinite(loss.l_max)) {
    throw std::invalid_argument("loss constants must be positive and finite");
  }
}

std::uint64_t score_m_cap(const LogView& view, double l_max) {
  const double bound = std::floor(l_max * static_cast<double>(view.chain_bound()));
  return static_cast<std::uint64_t>(bound) + 1;
}

std::vector<SeqElement> test_seq(const ForecasterPool& pool, std::size_t i, std::size_t j,
                                 std::uint64_t m, const ObservationLog& log) {
  check_member(pool, i);
  check_member(pool, j);
  return scan_test_seq(predictions_on_prefixes(pool[i], log),
                       predictions_on_prefixes(pool[j], log), m, log);
}

double rel_score(const EvOpConfig& config, std::size_t i, std::size_t j, std::uint64_t m,
                 const ObservationLog& log) {
  check_member(config.pool, i);
  check_member(config.pool, j);
  return NaiveEvaluator(config, log).rel_score(i, j, m);
}

double max_score(const EvOpConfig& config, std::size_t i, const ObservationLog& log) {
  check_member(config.pool, i);
  return NaiveEvaluator(config, log).max_score(i);
}

Decision evop_predict(const EvOpConfig& config, const ObservationLog& log) {
  NaiveEvaluator eval(config, log);
  std::vector<std::optional<Prediction>> current;
  for (std::size_t i = 1; i <= config.pool.size(); ++i) current.push_back(eval.column(i).back());
  return select(current, log.size(), [&](std::size_t i) { return eval.max_score(i); });
}

IncrementalEvOp::IncrementalEvOp(EvOpConfig config)
    : config_(std::move(config)),
      history_(config_.pool.size()),
      pairs_(config_.pool.size() * config_.pool.size()) {}

std::size_t IncrementalEvOp::pair_slot(std::size_t a, std::size_t b) const {
  return (a - 1) * config_.pool.size() + (b - 1);
}

void IncrementalEvOp::advance(ScoredPair& state, Index k) {
  if (state.pending) {
    const Index t = *state.pending;
    const auto r = log_.reveal_time(t);
    if (r && *r <= k) {
      const Outcome x = *log_.lookup(t);
      const double li = config_.loss.eval(x, *history_[state.i - 1][t - 1]);
      const double lj = config_.loss.eval(x, *history_[state.j - 1][t - 1]);
      const double pen = relscore_penalty(config_.loss.rho, config_.epsilon, state.m);
      state.score_ij += relscore_term(li, lj, pen);
      state.score_ji += relscore_term(lj, li, pen);
      ++state.completed;
      state.last = SeqElement{t, k};
      state.pending.reset();
    }
    return;
  }
  const auto& a = history_[state.i - 1][k - 1];
  const auto& b = history_[state.j - 1][k - 1];
  if (a && b && disagree(distance(*a, *b), state.m)) state.pending = k;
}

void IncrementalEvOp::grow_cap(std::uint64_t new_cap) {
  const std::size_t p = config_.pool.size();
  const Index replay_to = log_.size() - 1;
  for (std::size_t a = 1; a <= p; ++a) {
    for (std::size_t b = a + 1; b <= p; ++b) {
      auto& states = pairs_[pair_slot(a, b)];
      for (std::uint64_t m = m_cap_ + 1; m <= new_cap; ++m) {
        ScoredPair s;
        s.i = a;
        s.j = b;
        s.m = m;
        for (Index k = 1; k <= replay_to; ++k) advance(s, k);
        states.push_back(s);
      }
    }
  }
  m_cap_ = new_cap;
}

Decision IncrementalEvOp::observe(const Observation& obs) {
  log_.append(obs);
  const Index n = log_.size();
  const LogView view = log_.view();
  for (std::size_t i = 1; i <= config_.pool.size(); ++i) {
    history_[i - 1].push_back(config_.pool[i].predict(view));
  }
  const std::uint64_t cap = score_m_cap(view, config_.loss.l_max);
  if (cap > m_cap_) grow_cap(cap);
  for (auto& states : pairs_) {
    for (auto& s : states) advance(s, n);
  }
  return select(current_predictions(), n, [&](std::size_t i) { return max_score(i); });
}

std::vector<std::optional<Prediction>> IncrementalEvOp::current_predictions() const {
  std::vector<std::optional<Prediction>> out;
  out.reserve(history_.size());
  for (const auto& h : history_) out.push_back(h.empty() ? std::nullopt : h.back());
  return out;
}

const ScoredPair& IncrementalEvOp::pair(std::size_t i, std::size_t j, std::uint64_t m) const {
  check_member(config_.pool, i);
  check_member(config_.pool, j);
  if (i == j) throw std::invalid_argument("pair needs two distinct forecasters");
  if (m < 1 || m > m_cap_) throw std::out_of_range("m outside the tracked range");
  return pairs_[pair_slot(std::min(i, j), std::max(i, j))][m - 1];
}

double IncrementalEvOp::rel_score(std::size_t i, std::size_t j, std::uint64_t m) const {
  if (m == 0 || i == j) {
    check_member(config_.pool, i);
    check_member(config_.pool, j);
    return 0.0;
  }
  const auto& s = pair(i, j, m);
  return i < j ? s.score_ij : s.score_ji;
}

double IncrementalEvOp::max_score(std::size_t i) const {
  check_member(config_.pool, i);
  double best = max_score_candidate(i, 1, 0, 0.0);
  for (std::size_t j = 1; j <= config_.pool.size(); ++j) {
    if (j == i) continue;
    const auto& states = pairs_[pair_slot(std::min(i, j), std::max(i, j))];
    for (const auto& s : states) {
      best = std::max(best, max_score_candidate(i, j, s.m, i < j ? s.score_ij : s.score_ji));
    }
  }
  return best;
}

}  // namespace evop
