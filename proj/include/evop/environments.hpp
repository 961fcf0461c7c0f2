#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "evop/core_model.hpp"
#include "evop/random.hpp"

namespace evop {

struct Descriptor {
  std::string name;
  std::map<std::string, std::string> params;

  std::string to_string() const;
};

/// Block boundaries S_k of a P#-family environment. Block k covers steps
/// S_{k-1} + 1 .. S_k. Boundaries saturate at the largest Index.
class BlockLayout {
 public:
  /// Block k has length B^{k-1}.
  static BlockLayout geometric(std::uint64_t base);
  /// Block k has length B^{B^k}.
  static BlockLayout doubly_exponential(std::uint64_t base);

  Index block_of(Index n) const;
  /// S_k; S_0 = 0.
  Index block_end(Index k) const;
  Index block_start(Index k) const { return block_end(k - 1) + 1; }
  /// Number of blocks whose end fits in the Index range.
  Index finite_blocks() const { return ends_.size() - 1; }
  std::uint64_t base() const { return base_; }

 private:
  BlockLayout(std::uint64_t base, std::vector<Index> ends) : base_(base), ends_(std::move(ends)) {}

  std::uint64_t base_;
  std::vector<Index> ends_;  // ends_[k] = S_k, ends_[0] = 0
};

/// Coin index k with S_{k-1} < n <= S_k for the geometric layout of base B.
Index psharp_block_index(Index n, std::uint64_t base = 10);

/// ceil(log_B(n (B - 1) / B)) clamped below at 0, in exact integer
/// arithmetic: the number of c >= 1 with B^c < n (B - 1).
Index psharp_reveal_count(Index n, std::uint64_t base = 10);

/// Smallest n with psharp_reveal_count(n, base) >= c.
Index psharp_reveal_threshold(Index c, std::uint64_t base = 10);

class Environment {
 public:
  virtual ~Environment() = default;

  /// Emits the next observation, or nothing once the environment has no more
  /// steps (see truncated()).
  std::optional<Observation> step();
  /// Oracle value of x_t for 1 <= t <= steps(). For metrics only.
  virtual Outcome truth(Index t) const = 0;
  virtual const Alphabet& alphabet() const = 0;
  const Descriptor& descriptor() const { return descriptor_; }
  /// P#-family environments expose their block structure.
  virtual const BlockLayout* blocks() const { return nullptr; }

  Index steps() const { return steps_; }
  /// Set once step() has refused to go further (end of a finite sequence or
  /// a horizon cap).
  bool truncated() const { return truncated_; }

 protected:
  explicit Environment(Descriptor descriptor) : descriptor_(std::move(descriptor)) {}

  /// Produce obs_n for n = steps() + 1, or nothing if n is out of range.
  virtual std::optional<Observation> emit(Index n) = 0;

 private:
  Descriptor descriptor_;
  Index steps_ = 0;
  bool truncated_ = false;
};

struct PSharpParams {
  std::uint64_t base = 10;
  double coin_bias = 0.5;
  /// P#_2: block k is replicated B^{B^k} times.
  bool doubly_exponential = false;
  /// Steps past this are refused with a truncation marker; 0 means no cap.
  Index horizon_cap = 0;
  /// Fixed leading coins (a scripted trace); later coins are random.
  std::vector<Outcome> forced_coins;
};

std::unique_ptr<Environment> make_psharp(const PSharpParams& params, std::uint64_t seed);

/// delay(t) >= 0; x_t is revealed in obs_{t + 1 + delay(t)}, so delay 0 is
/// ordinary immediate feedback.
class DelaySchedule {
 public:
  static DelaySchedule constant(Index delay);
  /// floor(scale * t).
  static DelaySchedule linear(double scale);
  /// Reveals arrive in batches at steps b_0 = 2, b_{j+1} = max(b_j + 1,
  /// ceil(ratio * b_j)); x_t is revealed at the first batch step after t.
  static DelaySchedule batched(double ratio);
  /// delays[t - 1]; the last entry repeats past the end of the table.
  static DelaySchedule table(std::vector<Index> delays);

  Index operator()(Index t) const { return fn_(t); }
  const std::string& description() const { return description_; }

 private:
  DelaySchedule(std::function<Index(Index)> fn, std::string description)
      : fn_(std::move(fn)), description_(std::move(description)) {}

  std::function<Index(Index)> fn_;
  std::string description_;
};

std::unique_ptr<Environment> make_iid_bernoulli(double q, DelaySchedule delay,
                                                std::uint64_t seed);

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RevealSchedule {
  enum class Kind { kImmediate, kPSharp };
  Kind kind = Kind::kImmediate;
  std::uint64_t base = 10;

  static RevealSchedule parse(const std::string& text);
  std::string to_string() const;
};

/// One symbol per byte; whitespace separates nothing and is skipped, '#'
/// starts a comment running to end of line.
std::vector<Outcome> parse_sequence(const std::string& text, const Alphabet& alphabet);

std::unique_ptr<Environment> make_deterministic(const std::filesystem::path& path,
                                                RevealSchedule schedule,
                                                Alphabet alphabet = Alphabet::coin());
std::unique_ptr<Environment> make_deterministic(std::vector<Outcome> sequence,
                                                RevealSchedule schedule,
                                                Alphabet alphabet = Alphabet::coin(),
                                                std::string source = "inline");

}  // namespace evop
