#include "evop/metrics.hpp"

#include <algorithm>
#include <limits>

namespace evop {

RunLedger::RunLedger(std::vector<std::string> stream_names, LossSpec loss)
    : names_(std::move(stream_names)), loss_(std::move(loss)), columns_(names_.size()) {
  if (names_.empty()) throw std::invalid_argument("ledger needs at least one stream");
  if (!loss_.eval) throw std::invalid_argument("ledger loss has no evaluator");
}

void RunLedger::record(std::span<const std::optional<Prediction>> predictions, Outcome truth) {
  if (predictions.size() != columns_.size()) {
    throw std::invalid_argument("ledger record has the wrong number of streams");
  }
  for (std::size_t s = 0; s < columns_.size(); ++s) {
    auto& c = columns_[s];
    const auto& p = predictions[s];
    const double l = p ? loss_.eval(truth, *p) : 0.0;
    c.predictions.push_back(p);
    c.losses.push_back(l);
    c.cumulative.push_back((c.cumulative.empty() ? 0.0 : c.cumulative.back()) + l);
    c.defined.push_back((c.defined.empty() ? 0 : c.defined.back()) + (p ? 1 : 0));
  }
  truth_.push_back(truth);
}

std::optional<std::size_t> RunLedger::find(const std::string& name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

const std::optional<Prediction>& RunLedger::prediction(std::size_t s, Index n) const {
  return columns_.at(s).predictions.at(n - 1);
}

std::optional<double> RunLedger::loss(std::size_t s, Index n) const {
  const auto& c = columns_.at(s);
  if (!c.predictions.at(n - 1)) return std::nullopt;
  return c.losses[n - 1];
}

double RunLedger::cumulative_loss(std::size_t s, Index n) const {
  if (n == 0) return 0.0;
  return columns_.at(s).cumulative.at(n - 1);
}

Index RunLedger::defined_count(std::size_t s, Index n) const {
  if (n == 0) return 0;
  return columns_.at(s).defined.at(n - 1);
}

namespace {

bool is_full_prefix(const Subsequence& s, std::size_t n) { return n == 0 || s[n - 1] == n; }

std::optional<double> loss_on(const RunLedger& ledger, std::size_t f, const Subsequence& s,
                              std::size_t n) {
  if (is_full_prefix(s, n)) {
    if (ledger.defined_count(f, n) != n) return std::nullopt;
    return ledger.cumulative_loss(f, n);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto l = ledger.loss(f, s[i]);
    if (!l) return std::nullopt;
    total += *l;
  }
  return total;
}

}  // namespace

double regret(const RunLedger& ledger, std::size_t f, std::span<const std::size_t> competitors,
              const Subsequence& s, std::size_t n) {
  if (n > s.size()) throw std::out_of_range("regret horizon exceeds the subsequence");
  if (n > 0 && s[n - 1] > ledger.steps()) throw std::out_of_range("regret past recorded steps");
  const auto own = loss_on(ledger, f, s, n);
  if (!own) throw std::invalid_argument("stream '" + ledger.name(f) + "' is undefined on s");
  std::optional<double> best;
  for (const std::size_t c : competitors) {
    const auto l = loss_on(ledger, c, s, n);
    if (l && (!best || *l < *best)) best = l;
  }
  if (!best) throw EmptyComparisonClass("no competitor is defined on all of s");
  return *own - *best;
}

double average_regret(const RunLedger& ledger, std::size_t f,
                      std::span<const std::size_t> competitors, const Subsequence& s,
                      std::size_t n) {
  if (n == 0) throw std::invalid_argument("average regret needs n >= 1");
  return regret(ledger, f, competitors, s, n) / static_cast<double>(n);
}

double regret(const RunLedger& ledger, std::size_t f, std::span<const std::size_t> competitors,
              Index n) {
  return regret(ledger, f, competitors, Subsequence::prefix(n), n);
}

std::optional<Index> convergence_step(std::span<const std::optional<Prediction>> evop,
                                      std::span<const std::optional<Prediction>> target,
                                      double tol) {
  if (evop.size() != target.size()) throw std::invalid_argument("streams are not aligned");
  Index last_comparable = 0;
  Index last_miss = 0;
  for (Index n = 1; n <= evop.size(); ++n) {
    const auto& a = evop[n - 1];
    const auto& b = target[n - 1];
    if (!a || !b) continue;
    last_comparable = n;
    if (!(distance(*a, *b) <= tol)) last_miss = n;
  }
  if (last_comparable == 0) return std::nullopt;
  if (last_miss == last_comparable) return std::nullopt;
  return last_miss + 1;
}

std::vector<BlockRow> block_report(const RunLedger& ledger, const BlockLayout& layout,
                                   std::size_t subject, std::span<const std::size_t> competitors) {
  std::vector<BlockRow> rows;
  const Index steps = ledger.steps();
  for (Index k = 1; k <= layout.finite_blocks(); ++k) {
    const Index end = layout.block_end(k);
    if (end > steps) break;
    BlockRow row;
    row.block = k;
    row.start = layout.block_start(k);
    row.end = end;
    row.coin = ledger.truth(end);
    for (std::size_t s = 0; s < ledger.streams(); ++s) {
      row.block_loss.push_back(ledger.cumulative_loss(s, end) -
                               ledger.cumulative_loss(s, row.start - 1));
    }
    try {
      row.regret = regret(ledger, subject, competitors, end);
    } catch (const EmptyComparisonClass&) {
      row.regret.reset();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace evop
