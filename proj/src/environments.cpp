#include "evop/environments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>
#include <utility>

namespace evop {

namespace {

constexpr Index kIndexMax = std::numeric_limits<Index>::max();

Index saturating_mul(Index a, Index b) {
  if (a != 0 && b > kIndexMax / a) return kIndexMax;
  return a * b;
}

Index saturating_add(Index a, Index b) { return b > kIndexMax - a ? kIndexMax : a + b; }

Index saturating_pow(Index base, Index exp) {
  Index r = 1;
  for (Index i = 0; i < exp; ++i) {
    r = saturating_mul(r, base);
    if (r == kIndexMax) break;
  }
  return r;
}

void require_base(std::uint64_t base) {
  if (base < 2) throw std::invalid_argument("P# base must be at least 2");
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::string Descriptor::to_string() const {
  std::string out = name;
  for (const auto& [k, v] : params) out += " " + k + "=" + v;
  return out;
}

// ---------------------------------------------------------------------------

BlockLayout BlockLayout::geometric(std::uint64_t base) {
  require_base(base);
  std::vector<Index> ends{0};
  Index length = 1;
  while (ends.back() != kIndexMax) {
    ends.push_back(saturating_add(ends.back(), length));
    length = saturating_mul(length, base);
  }
  return BlockLayout(base, std::move(ends));
}

BlockLayout BlockLayout::doubly_exponential(std::uint64_t base) {
  require_base(base);
  std::vector<Index> ends{0};
  Index exponent = base;  // B^k for k = 1
  while (ends.back() != kIndexMax) {
    // B^{B^k}; once B^k itself passes 64 the power saturates anyway.
    const Index length = exponent >= 64 ? kIndexMax : saturating_pow(base, exponent);
    ends.push_back(saturating_add(ends.back(), length));
    exponent = saturating_mul(exponent, base);
  }
  return BlockLayout(base, std::move(ends));
}

Index BlockLayout::block_of(Index n) const {
  if (n == 0) throw std::invalid_argument("step indices are 1-based");
  const auto it = std::lower_bound(ends_.begin(), ends_.end(), n);
  return static_cast<Index>(it - ends_.begin());
}

Index BlockLayout::block_end(Index k) const {
  if (k >= ends_.size()) return kIndexMax;
  return ends_[k];
}

Index psharp_block_index(Index n, std::uint64_t base) {
  return BlockLayout::geometric(base).block_of(n);
}

Index psharp_reveal_count(Index n, std::uint64_t base) {
  require_base(base);
  using u128 = unsigned __int128;
  const u128 limit = static_cast<u128>(n) * (base - 1);
  Index count = 0;
  u128 power = base;
  while (power < limit) {
    ++count;
    power *= base;
  }
  return count;
}

Index psharp_reveal_threshold(Index c, std::uint64_t base) {
  require_base(base);
  if (c == 0) return 1;
  const Index power = saturating_pow(base, c);
  if (power == kIndexMax) return kIndexMax;
  return power / (base - 1) + 1;
}

// ---------------------------------------------------------------------------

std::optional<Observation> Environment::step() {
  if (truncated_) return std::nullopt;
  auto obs = emit(steps_ + 1);
  if (!obs) {
    truncated_ = true;
    return std::nullopt;
  }
  ++steps_;
  return obs;
}

namespace {

class PSharpEnvironment final : public Environment {
 public:
  PSharpEnvironment(const PSharpParams& params, std::uint64_t seed)
      : Environment(describe(params, seed)),
        params_(params),
        layout_(params.doubly_exponential ? BlockLayout::doubly_exponential(params.base)
                                          : BlockLayout::geometric(params.base)),
        alphabet_(Alphabet::coin()),
        rng_(seed) {
    if (!(params.coin_bias >= 0.0 && params.coin_bias <= 1.0)) {
      throw std::invalid_argument("P# coin bias must be in [0, 1]");
    }
    for (Outcome c : params.forced_coins) {
      if (!alphabet_.contains(c)) throw std::invalid_argument("forced coin must be H or T");
    }
  }

  Outcome truth(Index t) const override {
    if (t == 0 || t > steps()) throw std::out_of_range("truth queried outside emitted steps");
    return coins_[layout_.block_of(t) - 1];
  }
  const Alphabet& alphabet() const override { return alphabet_; }
  const BlockLayout* blocks() const override { return &layout_; }

 protected:
  std::optional<Observation> emit(Index n) override {
    if (params_.horizon_cap != 0 && n > params_.horizon_cap) return std::nullopt;
    const Index block = layout_.block_of(n);
    while (coins_.size() < block) draw_coin();

    const Index count = psharp_reveal_count(n, params_.base);
    std::vector<Reveal> reveals;
    for (Index t = revealed_ + 1; t <= count; ++t) {
      reveals.push_back({t, coins_[layout_.block_of(t) - 1]});
    }
    revealed_ = std::max(revealed_, count);
    return Observation(std::move(reveals));
  }

 private:
  static Descriptor describe(const PSharpParams& p, std::uint64_t seed) {
    Descriptor d{p.doubly_exponential ? "psharp2" : "psharp", {}};
    d.params["base"] = std::to_string(p.base);
    d.params["coin_bias"] = format_double(p.coin_bias);
    d.params["seed"] = std::to_string(seed);
    if (p.horizon_cap != 0) d.params["horizon_cap"] = std::to_string(p.horizon_cap);
    if (!p.forced_coins.empty()) {
      std::string coins;
      for (Outcome c : p.forced_coins) coins.push_back(c.symbol);
      d.params["coins"] = coins;
    }
    return d;
  }

  void draw_coin() {
    const std::size_t k = coins_.size();
    if (k < params_.forced_coins.size()) {
      coins_.push_back(params_.forced_coins[k]);
    } else {
      coins_.push_back(bernoulli(rng_, params_.coin_bias) ? kHeads : kTails);
    }
  }

  PSharpParams params_;
  BlockLayout layout_;
  Alphabet alphabet_;
  Rng rng_;
  std::vector<Outcome> coins_;
  Index revealed_ = 0;
};

}  // namespace

std::unique_ptr<Environment> make_psharp(const PSharpParams& params, std::uint64_t seed) {
  return std::make_unique<PSharpEnvironment>(params, seed);
}

// ---------------------------------------------------------------------------

DelaySchedule DelaySchedule::constant(Index delay) {
  return {[delay](Index) { return delay; }, "constant:" + std::to_string(delay)};
}

DelaySchedule DelaySchedule::linear(double scale) {
  if (!(scale >= 0.0) || !std::isfinite(scale)) {
    throw std::invalid_argument("linear delay scale must be finite and nonnegative");
  }
  return {[scale](Index t) { return static_cast<Index>(std::floor(scale * static_cast<double>(t))); },
          "linear:" + format_double(scale)};
}

DelaySchedule DelaySchedule::batched(double ratio) {
  if (!(ratio > 1.0) || !std::isfinite(ratio)) {
    throw std::invalid_argument("batch ratio must be finite and > 1");
  }
  // Boundaries are shared between copies and extended on demand.
  auto boundaries = std::make_shared<std::vector<Index>>(std::vector<Index>{2});
  auto fn = [ratio, boundaries](Index t) {
    auto& b = *boundaries;
    while (b.back() <= t) {
      const auto next = static_cast<Index>(std::ceil(ratio * static_cast<double>(b.back())));
      b.push_back(std::max(b.back() + 1, next));
    }
    const Index reveal_at = *std::upper_bound(b.begin(), b.end(), t);
    return reveal_at - t - 1;
  };
  return {std::move(fn), "batched:" + format_double(ratio)};
}

DelaySchedule DelaySchedule::table(std::vector<Index> delays) {
  if (delays.empty()) throw std::invalid_argument("delay table must not be empty");
  std::string description = "table:" + std::to_string(delays.size());
  return {[d = std::move(delays)](Index t) { return d[std::min<Index>(t, d.size()) - 1]; },
          std::move(description)};
}

namespace {

class IidBernoulliEnvironment final : public Environment {
 public:
  IidBernoulliEnvironment(double q, DelaySchedule delay, std::uint64_t seed)
      : Environment(describe(q, delay, seed)),
        q_(q),
        delay_(std::move(delay)),
        alphabet_(Alphabet::coin()),
        rng_(seed) {
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("Bernoulli bias must be in [0, 1]");
  }

  Outcome truth(Index t) const override {
    if (t == 0 || t > outcomes_.size()) {
      throw std::out_of_range("truth queried outside emitted steps");
    }
    return outcomes_[t - 1];
  }
  const Alphabet& alphabet() const override { return alphabet_; }

 protected:
  std::optional<Observation> emit(Index n) override {
    outcomes_.push_back(bernoulli(rng_, q_) ? kHeads : kTails);
    pending_.push({n + 1 + delay_(n), n});

    std::vector<Reveal> reveals;
    while (!pending_.empty() && pending_.top().first == n) {
      const Index t = pending_.top().second;
      pending_.pop();
      reveals.push_back({t, outcomes_[t - 1]});
    }
    return Observation(std::move(reveals));
  }

 private:
  static Descriptor describe(double q, const DelaySchedule& delay, std::uint64_t seed) {
    return {"iid_bernoulli",
            {{"q", format_double(q)}, {"delay", delay.description()}, {"seed", std::to_string(seed)}}};
  }

  using Pending = std::pair<Index, Index>;  // (reveal step, index)

  double q_;
  DelaySchedule delay_;
  Alphabet alphabet_;
  Rng rng_;
  std::vector<Outcome> outcomes_;
  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> pending_;
};

}  // namespace

std::unique_ptr<Environment> make_iid_bernoulli(double q, DelaySchedule delay,
                                                std::uint64_t seed) {
  return std::make_unique<IidBernoulliEnvironment>(q, std::move(delay), seed);
}

// ---------------------------------------------------------------------------

RevealSchedule RevealSchedule::parse(const std::string& text) {
  if (text == "immediate") return {Kind::kImmediate, 10};
  if (text == "psharp") return {Kind::kPSharp, 10};
  const std::string prefix = "psharp:";
  if (text.rfind(prefix, 0) == 0) {
    const std::string digits = text.substr(prefix.size());
    std::size_t used = 0;
    std::uint64_t base = 0;
    try {
      base = std::stoull(digits, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != digits.size() || base < 2) {
      throw std::invalid_argument("bad reveal schedule base: " + text);
    }
    return {Kind::kPSharp, base};
  }
  throw std::invalid_argument("unknown reveal schedule: " + text +
                              " (expected immediate, psharp or psharp:B)");
}

std::string RevealSchedule::to_string() const {
  if (kind == Kind::kImmediate) return "immediate";
  return "psharp:" + std::to_string(base);
}

std::vector<Outcome> parse_sequence(const std::string& text, const Alphabet& alphabet) {
  std::vector<Outcome> out;
  std::size_t line = 1;
  std::size_t column = 0;
  bool comment = false;
  for (char c : text) {
    ++column;
    if (c == '\n') {
      ++line;
      column = 0;
      comment = false;
      continue;
    }
    if (comment || c == '\r' || c == ' ' || c == '\t') continue;
    if (c == '#') {
      comment = true;
      continue;
    }
    if (!alphabet.contains(Outcome{c})) {
      std::ostringstream msg;
      msg << "line " << line << ", column " << column << ": symbol '" << c
          << "' is not in alphabet \"" << alphabet.symbols() << "\"";
      throw ParseError(msg.str());
    }
    out.push_back(Outcome{c});
  }
  return out;
}

namespace {

class DeterministicEnvironment final : public Environment {
 public:
  DeterministicEnvironment(std::vector<Outcome> sequence, RevealSchedule schedule,
                           Alphabet alphabet, std::string source)
      : Environment({"deterministic",
                     {{"source", std::move(source)},
                      {"schedule", schedule.to_string()},
                      {"length", std::to_string(sequence.size())}}}),
        sequence_(std::move(sequence)),
        schedule_(schedule),
        alphabet_(std::move(alphabet)) {
    for (Outcome x : sequence_) {
      if (!alphabet_.contains(x)) throw ParseError("sequence symbol outside alphabet");
    }
  }

  Outcome truth(Index t) const override {
    if (t == 0 || t > steps()) throw std::out_of_range("truth queried outside emitted steps");
    return sequence_[t - 1];
  }
  const Alphabet& alphabet() const override { return alphabet_; }

 protected:
  std::optional<Observation> emit(Index n) override {
    if (n > sequence_.size()) return std::nullopt;
    const Index target = schedule_.kind == RevealSchedule::Kind::kImmediate
                             ? n - 1
                             : psharp_reveal_count(n, schedule_.base);
    std::vector<Reveal> reveals;
    for (Index t = revealed_ + 1; t <= std::min<Index>(target, sequence_.size()); ++t) {
      reveals.push_back({t, sequence_[t - 1]});
      revealed_ = t;
    }
    return Observation(std::move(reveals));
  }

 private:
  std::vector<Outcome> sequence_;
  RevealSchedule schedule_;
  Alphabet alphabet_;
  Index revealed_ = 0;
};

}  // namespace

std::unique_ptr<Environment> make_deterministic(const std::filesystem::path& path,
                                                RevealSchedule schedule, Alphabet alphabet) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open sequence file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  std::vector<Outcome> seq;
  try {
    seq = parse_sequence(buf.str(), alphabet);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return make_deterministic(std::move(seq), schedule, std::move(alphabet), path.string());
}

std::unique_ptr<Environment> make_deterministic(std::vector<Outcome> sequence,
                                                RevealSchedule schedule, Alphabet alphabet,
                                                std::string source) {
  return std::make_unique<DeterministicEnvironment>(std::move(sequence), schedule,
                                                    std::move(alphabet), std::move(source));
}

}  // namespace evop
