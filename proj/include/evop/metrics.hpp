#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "evop/core_model.hpp"
#include "evop/environments.hpp"
#include "evop/loss.hpp"

namespace evop {

class EmptyComparisonClass : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Oracle-side record of a run: every stream's prediction at every step,
/// scored against the true outcome whether or not it was ever revealed.
/// Streams are numbered from 0 in construction order; EvOp is typically
/// recorded as one more stream next to the pool members.
class RunLedger {
 public:
  RunLedger(std::vector<std::string> stream_names, LossSpec loss);

  /// Step n = steps() + 1. One entry per stream.
  void record(std::span<const std::optional<Prediction>> predictions, Outcome truth);

  Index steps() const { return truth_.size(); }
  std::size_t streams() const { return names_.size(); }
  const std::string& name(std::size_t s) const { return names_.at(s); }
  std::optional<std::size_t> find(const std::string& name) const;

  Outcome truth(Index n) const { return truth_.at(n - 1); }
  const std::optional<Prediction>& prediction(std::size_t s, Index n) const;
  std::optional<double> loss(std::size_t s, Index n) const;
  /// Sum of the stream's losses over steps 1..n where it was defined,
  /// accumulated in step order.
  double cumulative_loss(std::size_t s, Index n) const;
  /// Number of steps in 1..n where the stream was defined.
  Index defined_count(std::size_t s, Index n) const;
  /// The stream's predictions at steps 1..steps().
  std::span<const std::optional<Prediction>> stream(std::size_t s) const {
    return columns_.at(s).predictions;
  }
  const LossSpec& loss_spec() const { return loss_; }

 private:
  struct Column {
    std::vector<std::optional<Prediction>> predictions;
    std::vector<double> losses;      // 0 where undefined
    std::vector<double> cumulative;  // prefix sums of losses
    std::vector<Index> defined;      // prefix counts
  };

  std::vector<std::string> names_;
  LossSpec loss_;
  std::vector<Outcome> truth_;
  std::vector<Column> columns_;
};

/// Loss of stream f on s_1..s_n minus the smallest loss among the
/// competitors defined on all of s_1..s_n.
double regret(const RunLedger& ledger, std::size_t f, std::span<const std::size_t> competitors,
              const Subsequence& s, std::size_t n);
double average_regret(const RunLedger& ledger, std::size_t f,
                      std::span<const std::size_t> competitors, const Subsequence& s,
                      std::size_t n);
/// regret on the full prefix 1..n.
double regret(const RunLedger& ledger, std::size_t f, std::span<const std::size_t> competitors,
              Index n);

/// Smallest N with |evop_n - target_n| <= tol at every later step where both
/// are defined. Absent when the last comparable step still differs.
std::optional<Index> convergence_step(std::span<const std::optional<Prediction>> evop,
                                      std::span<const std::optional<Prediction>> target,
                                      double tol);

struct BlockRow {
  Index block = 0;
  Index start = 0;
  Index end = 0;
  Outcome coin;
  std::vector<double> block_loss;  // per stream
  /// Regret of the subject at the block end; absent if no competitor was
  /// defined throughout.
  std::optional<double> regret;
};

/// One row per block that ends within the recorded steps.
std::vector<BlockRow> block_report(const RunLedger& ledger, const BlockLayout& layout,
                                   std::size_t subject, std::span<const std::size_t> competitors);

}  // namespace evop
