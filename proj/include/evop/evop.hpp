#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "evop/core_model.hpp"
#include "evop/forecasters.hpp"
#include "evop/loss.hpp"

namespace evop {

struct EvOpConfig {
  EvOpConfig(LossSpec loss, ForecasterPool pool, double epsilon = 0.5);

  LossSpec loss;
  ForecasterPool pool;
  /// Any constant in (0, 1).
  double epsilon;
};

/// One TestSeq output: disagreement at step t, x_t first visible at step k.
struct SeqElement {
  Index t = 0;
  Index k = 0;

  friend bool operator==(const SeqElement&, const SeqElement&) = default;
};

struct Decision {
  /// 1-based pool index of the forecaster being copied.
  std::size_t choice = 0;
  Prediction prediction;
  /// MaxScore of the chosen forecaster.
  double score = 0.0;
};

class NoDefinedForecaster : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shared arithmetic. The naive and incremental paths both go through these
// so that their outputs agree to the bit.

/// Disagreement test ||y_i - y_j|| > 1/m with 1/0 = infinity.
inline bool disagree(double dist, std::uint64_t m) {
  return m != 0 && dist > 1.0 / static_cast<double>(m);
}

inline double relscore_penalty(double rho, double epsilon, std::uint64_t m) {
  const auto md = static_cast<double>(m);
  return rho * epsilon / (2.0 * md * md);
}

inline double relscore_term(double loss_i, double loss_j, double penalty) {
  return loss_i - loss_j - penalty;
}

inline double max_score_candidate(std::size_t i, std::size_t j, std::uint64_t m, double rel) {
  return static_cast<double>(i) - static_cast<double>(j) - static_cast<double>(m) + rel;
}

/// Largest m worth checking in MaxScore: every candidate with a larger m is
/// strictly below the (j = 1, m = 0) baseline, because RelScore is at most
/// l_max times the number of completed elements and chain_bound() caps that.
std::uint64_t score_m_cap(const LogView& view, double l_max);

// Naive routines: every call rescans the whole log and re-evaluates the
// forecasters on every prefix.

/// Greedy independent subsequence on which f_i and f_j disagree by more
/// than 1/m. The pending disagreement, if any, is not part of the output.
std::vector<SeqElement> test_seq(const ForecasterPool& pool, std::size_t i, std::size_t j,
                                 std::uint64_t m, const ObservationLog& log);
/// Sum over test_seq of L(x_t, y_t^i) - L(x_t, y_t^j) - rho eps / (2 m^2).
/// Lower is better for f_i.
double rel_score(const EvOpConfig& config, std::size_t i, std::size_t j, std::uint64_t m,
                 const ObservationLog& log);
/// max over j and m of i - j - m + RelScore(i, j, m).
double max_score(const EvOpConfig& config, std::size_t i, const ObservationLog& log);
/// The min-max choice at step n = log.size() and its prediction of x_n.
Decision evop_predict(const EvOpConfig& config, const ObservationLog& log);

/// Running TestSeq/RelScore state of one unordered pair {i, j} at one m.
/// Both orientations share the subsequence; only the sign of the loss
/// difference differs.
struct ScoredPair {
  std::size_t i = 0;
  std::size_t j = 0;
  std::uint64_t m = 0;
  std::optional<Index> pending;
  std::uint64_t completed = 0;
  std::optional<SeqElement> last;
  /// RelScore(i, j, m) and RelScore(j, i, m).
  double score_ij = 0.0;
  double score_ji = 0.0;
};

/// EvOp driven one observation at a time; O(|pool|^2 * M_cap) per step.
/// Produces exactly what evop_predict would on the accumulated log.
class IncrementalEvOp {
 public:
  explicit IncrementalEvOp(EvOpConfig config);

  /// Append obs_n and predict x_n.
  Decision observe(const Observation& obs);

  const EvOpConfig& config() const { return config_; }
  const ObservationLog& log() const { return log_; }
  Index steps() const { return log_.size(); }
  std::uint64_t m_cap() const { return m_cap_; }
  /// Every member's prediction at the latest step.
  std::vector<std::optional<Prediction>> current_predictions() const;
  const std::optional<Prediction>& prediction(std::size_t i, Index k) const {
    return history_.at(i - 1).at(k - 1);
  }
  double max_score(std::size_t i) const;
  double rel_score(std::size_t i, std::size_t j, std::uint64_t m) const;
  const ScoredPair& pair(std::size_t i, std::size_t j, std::uint64_t m) const;

 private:
  std::size_t pair_slot(std::size_t a, std::size_t b) const;
  void advance(ScoredPair& state, Index k);
  void grow_cap(std::uint64_t new_cap);

  EvOpConfig config_;
  ObservationLog log_;
  std::vector<std::vector<std::optional<Prediction>>> history_;
  /// pairs_[slot][m - 1] for a < b.
  std::vector<std::vector<ScoredPair>> pairs_;
  std::uint64_t m_cap_ = 0;
};

}  // namespace evop
