#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace evop {

using Index = std::uint64_t;

/// An outcome symbol. Coin environments use 'H' and 'T'; digit sequences
/// use '0'..'9'. The library treats the symbol as opaque.
struct Outcome {
  char symbol = 'H';

  friend constexpr auto operator<=>(Outcome, Outcome) = default;
};

inline constexpr Outcome kHeads{'H'};
inline constexpr Outcome kTails{'T'};

class Alphabet {
 public:
  explicit Alphabet(std::string symbols);

  static Alphabet coin() { return Alphabet("HT"); }
  static Alphabet digits() { return Alphabet("0123456789"); }

  bool contains(Outcome x) const {
    return symbols_.find(x.symbol) != std::string::npos;
  }
  const std::string& symbols() const { return symbols_; }
  std::size_t size() const { return symbols_.size(); }

 private:
  std::string symbols_;
};

/// A point of the prediction set. Stored inline; the bundled losses are all
/// one-dimensional, the cap leaves room for small vector-valued losses.
class Prediction {
 public:
  static constexpr std::size_t kMaxDimension = 4;

  Prediction() = default;
  Prediction(double p) : dim_(1) { coords_[0] = p; }  // NOLINT(google-explicit-constructor)
  Prediction(std::initializer_list<double> coords);
  explicit Prediction(std::span<const double> coords);

  std::size_t dimension() const { return dim_; }
  double operator[](std::size_t k) const { return coords_[k]; }
  double& operator[](std::size_t k) { return coords_[k]; }
  double scalar() const { return coords_[0]; }
  std::span<const double> coords() const { return {coords_.data(), dim_}; }
  bool finite() const;

  friend bool operator==(const Prediction& a, const Prediction& b);

 private:
  std::array<double, kMaxDimension> coords_{};
  std::size_t dim_ = 1;
};

/// l2 distance; exactly |a - b| in one dimension.
double distance(const Prediction& a, const Prediction& b);

struct Reveal {
  Index index = 0;
  Outcome outcome;

  friend bool operator==(const Reveal&, const Reveal&) = default;
};

/// A finite partial map from outcome indices to outcomes.
class Observation {
 public:
  Observation() = default;
  explicit Observation(std::vector<Reveal> reveals);

  std::span<const Reveal> reveals() const { return reveals_; }
  bool empty() const { return reveals_.empty(); }
  std::size_t size() const { return reveals_.size(); }
  std::optional<Outcome> at(Index t) const;

 private:
  std::vector<Reveal> reveals_;
};

class ConsistencyViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ObservationLog;

/// The first n observations of a log. Forecasters see the world through this.
class LogView {
 public:
  LogView(const ObservationLog& log, Index n) : log_(&log), n_(n) {}

  Index size() const { return n_; }
  std::optional<Outcome> lookup(Index t) const;
  std::optional<Index> reveal_time(Index t) const;
  bool reveals(Index t) const { return reveal_time(t).has_value(); }
  std::span<const Reveal> observation(Index k) const;
  /// Number of distinct indices revealed so far.
  std::uint64_t revealed_count() const;
  std::uint64_t revealed_count(Outcome x) const;
  /// Upper bound on the length of any interleaved (disagreement, reveal)
  /// chain that fits in this prefix: steps with a fresh reveal plus indices
  /// that were revealed no later than their own step.
  std::uint64_t chain_bound() const;

  const ObservationLog& log() const { return *log_; }

 private:
  const ObservationLog* log_;
  Index n_;
};

/// Append-only prefix o_1..o_n of observations with first-reveal lookup.
class ObservationLog {
 public:
  ObservationLog() = default;

  /// Strong guarantee: on ConsistencyViolation the log is unchanged.
  void append(const Observation& obs);

  Index size() const { return step_begin_.size(); }
  bool empty() const { return step_begin_.empty(); }
  LogView view() const { return {*this, size()}; }
  LogView prefix(Index n) const;

  std::optional<Outcome> lookup(Index t) const;
  /// Minimal k with t in Dom(obs_k).
  std::optional<Index> reveal_time(Index t) const;
  std::span<const Reveal> observation(Index k) const;

  std::uint64_t revealed_count(Index n) const;
  std::uint64_t revealed_count(Outcome x, Index n) const;
  std::uint64_t chain_bound(Index n) const;

 private:
  struct Entry {
    Index time = 0;
    Outcome outcome;
  };

  const Entry* find(Index t) const;
  std::size_t symbol_slot(Outcome x);

  static constexpr Index kDenseSlack = Index{1} << 16;

  std::vector<Reveal> reveals_;
  std::vector<std::size_t> step_begin_;
  std::vector<Entry> dense_;  // index t at position t - 1; time 0 means unrevealed
  std::unordered_map<Index, Entry> sparse_;
  std::vector<std::uint64_t> revealed_prefix_;
  std::vector<std::uint64_t> chain_prefix_;
  std::string symbols_;
  std::vector<std::vector<std::uint64_t>> symbol_prefix_;
};

/// Strictly increasing list of positive indices.
class Subsequence {
 public:
  Subsequence() = default;
  explicit Subsequence(std::vector<Index> indices);

  /// 1, 2, ..., n.
  static Subsequence prefix(Index n);

  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  Index operator[](std::size_t i) const { return indices_[i]; }
  std::span<const Index> indices() const { return indices_; }
  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }

 private:
  std::vector<Index> indices_;
};

/// True iff every element after the first is predicted at or after the
/// reveal of its predecessor: reveal_time(s[i-1]) <= s[i].
bool is_independent(const Subsequence& s, const ObservationLog& log);

}  // namespace evop
