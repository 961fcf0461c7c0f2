#include "evop/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

namespace evop {

Alphabet::Alphabet(std::string symbols) : symbols_(std::move(symbols)) {
  if (symbols_.empty()) {
    throw std::invalid_argument("alphabet must not be empty");
  }
  std::string sorted = symbols_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("alphabet has duplicate symbols: " + symbols_);
  }
}

Prediction::Prediction(std::initializer_list<double> coords)
    : Prediction(std::span<const double>(coords.begin(), coords.size())) {}

Prediction::Prediction(std::span<const double> coords) : dim_(coords.size()) {
  if (dim_ == 0 || dim_ > kMaxDimension) {
    throw std::invalid_argument("prediction dimension must be in [1, " +
                                std::to_string(kMaxDimension) + "]");
  }
  std::copy(coords.begin(), coords.end(), coords_.begin());
}

bool Prediction::finite() const {
  return std::all_of(coords_.begin(), coords_.begin() + dim_,
                     [](double c) { return std::isfinite(c); });
}

bool operator==(const Prediction& a, const Prediction& b) {
  return a.dim_ == b.dim_ &&
         std::equal(a.coords_.begin(), a.coords_.begin() + a.dim_, b.coords_.begin());
}

double distance(const Prediction& a, const Prediction& b) {
  if (a.dimension() != b.dimension()) {
    throw std::invalid_argument("distance between predictions of different dimension");
  }
  if (a.dimension() == 1) {
    return std::abs(a[0] - b[0]);
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < a.dimension(); ++k) {
    const double d = a[k] - b[k];
    sum += d * d;
  }
  return std::sqrt(sum);
}

Observation::Observation(std::vector<Reveal> reveals) : reveals_(std::move(reveals)) {
  std::unordered_set<Index> seen;
  seen.reserve(reveals_.size());
  for (const auto& r : reveals_) {
    if (r.index == 0) {
      throw std::invalid_argument("observation reveals index 0; indices are 1-based");
    }
    if (!seen.insert(r.index).second) {
      throw std::invalid_argument("observation reveals index " + std::to_string(r.index) +
                                  " twice");
    }
  }
}

std::optional<Outcome> Observation::at(Index t) const {
  for (const auto& r : reveals_) {
    if (r.index == t) return r.outcome;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

std::optional<Outcome> LogView::lookup(Index t) const {
  const auto k = log_->reveal_time(t);
  if (!k || *k > n_) return std::nullopt;
  return log_->lookup(t);
}

std::optional<Index> LogView::reveal_time(Index t) const {
  const auto k = log_->reveal_time(t);
  if (!k || *k > n_) return std::nullopt;
  return k;
}

std::span<const Reveal> LogView::observation(Index k) const {
  if (k == 0 || k > n_) throw std::out_of_range("observation index outside view");
  return log_->observation(k);
}

std::uint64_t LogView::revealed_count() const { return log_->revealed_count(n_); }

std::uint64_t LogView::revealed_count(Outcome x) const {
  return log_->revealed_count(x, n_);
}

std::uint64_t LogView::chain_bound() const { return log_->chain_bound(n_); }

// ---------------------------------------------------------------------------

const ObservationLog::Entry* ObservationLog::find(Index t) const {
  if (t == 0) return nullptr;
  if (t <= dense_.size()) {
    const Entry& e = dense_[t - 1];
    return e.time == 0 ? nullptr : &e;
  }
  auto it = sparse_.find(t);
  return it == sparse_.end() ? nullptr : &it->second;
}

std::size_t ObservationLog::symbol_slot(Outcome x) {
  const auto pos = symbols_.find(x.symbol);
  if (pos != std::string::npos) return pos;
  symbols_.push_back(x.symbol);
  symbol_prefix_.emplace_back(revealed_prefix_.size(), 0);
  return symbols_.size() - 1;
}

void ObservationLog::append(const Observation& obs) {
  const Index step = size() + 1;

  for (const auto& r : obs.reveals()) {
    if (const Entry* e = find(r.index); e != nullptr && e->outcome != r.outcome) {
      throw ConsistencyViolation("observation " + std::to_string(step) + " reveals x_" +
                                 std::to_string(r.index) + " = " + r.outcome.symbol +
                                 " but step " + std::to_string(e->time) + " revealed " +
                                 e->outcome.symbol);
    }
  }

  step_begin_.push_back(reveals_.size());
  reveals_.insert(reveals_.end(), obs.reveals().begin(), obs.reveals().end());

  std::uint64_t fresh = 0;
  std::uint64_t early = 0;
  std::vector<std::uint64_t> per_symbol(symbols_.size(), 0);
  for (const auto& r : obs.reveals()) {
    if (find(r.index) != nullptr) continue;
    ++fresh;
    if (r.index >= step) ++early;
    const std::size_t slot = symbol_slot(r.outcome);
    if (slot >= per_symbol.size()) per_symbol.resize(slot + 1, 0);
    ++per_symbol[slot];

    const Entry entry{step, r.outcome};
    if (r.index <= dense_.size()) {
      dense_[r.index - 1] = entry;
    } else if (r.index <= step + kDenseSlack) {
      const std::size_t old = dense_.size();
      dense_.resize(r.index);
      // Migrate any sparse entries now covered by the dense range.
      for (Index t = old + 1; t < r.index && !sparse_.empty(); ++t) {
        if (auto it = sparse_.find(t); it != sparse_.end()) {
          dense_[t - 1] = it->second;
          sparse_.erase(it);
        }
      }
      dense_[r.index - 1] = entry;
    } else {
      sparse_.emplace(r.index, entry);
    }
  }

  const std::uint64_t prev_revealed = revealed_prefix_.empty() ? 0 : revealed_prefix_.back();
  revealed_prefix_.push_back(prev_revealed + fresh);
  const std::uint64_t prev_chain = chain_prefix_.empty() ? 0 : chain_prefix_.back();
  chain_prefix_.push_back(prev_chain + (fresh > 0 ? 1 : 0) + early);
  for (std::size_t slot = 0; slot < symbol_prefix_.size(); ++slot) {
    auto& counts = symbol_prefix_[slot];
    const std::uint64_t prev = counts.empty() ? 0 : counts.back();
    counts.push_back(prev + (slot < per_symbol.size() ? per_symbol[slot] : 0));
  }
}

LogView ObservationLog::prefix(Index n) const {
  if (n > size()) throw std::out_of_range("prefix longer than log");
  return {*this, n};
}

std::optional<Outcome> ObservationLog::lookup(Index t) const {
  const Entry* e = find(t);
  if (e == nullptr) return std::nullopt;
  return e->outcome;
}

std::optional<Index> ObservationLog::reveal_time(Index t) const {
  const Entry* e = find(t);
  if (e == nullptr) return std::nullopt;
  return e->time;
}

std::span<const Reveal> ObservationLog::observation(Index k) const {
  if (k == 0 || k > size()) throw std::out_of_range("observation index outside log");
  const std::size_t begin = step_begin_[k - 1];
  const std::size_t end = k < size() ? step_begin_[k] : reveals_.size();
  return {reveals_.data() + begin, end - begin};
}

std::uint64_t ObservationLog::revealed_count(Index n) const {
  return n == 0 ? 0 : revealed_prefix_.at(n - 1);
}

std::uint64_t ObservationLog::revealed_count(Outcome x, Index n) const {
  const auto pos = symbols_.find(x.symbol);
  if (n == 0 || pos == std::string::npos) return 0;
  return symbol_prefix_[pos].at(n - 1);
}

std::uint64_t ObservationLog::chain_bound(Index n) const {
  return n == 0 ? 0 : chain_prefix_.at(n - 1);
}

// ---------------------------------------------------------------------------

Subsequence::Subsequence(std::vector<Index> indices) : indices_(std::move(indices)) {
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (indices_[i] == 0) throw std::invalid_argument("subsequence indices are 1-based");
    if (i > 0 && indices_[i] <= indices_[i - 1]) {
      throw std::invalid_argument("subsequence must be strictly increasing");
    }
  }
}

Subsequence Subsequence::prefix(Index n) {
  std::vector<Index> idx(n);
  std::iota(idx.begin(), idx.end(), Index{1});
  return Subsequence(std::move(idx));
}

bool is_independent(const Subsequence& s, const ObservationLog& log) {
  for (std::size_t i = 1; i < s.size(); ++i) {
    const auto k = log.reveal_time(s[i - 1]);
    if (!k || *k > s[i]) return false;
  }
  return true;
}

}  // namespace evop
