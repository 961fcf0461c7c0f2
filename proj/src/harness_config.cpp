#include <fstream>
#include <set>
#include <sstream>

#include "evop/harness.hpp"

namespace evop::harness {

using nlohmann::json;

namespace {

/// Reads the fields of one JSON object and rejects any it was not asked for.
class Fields {
 public:
  Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  const json& at(const std::string& key) {
    if (!has(key)) throw ConfigError(path(key) + ": required field is missing");
    return j_.at(key);
  }

  template <typename T>
  T get(const std::string& key) {
    const json& v = at(key);
    try {
      return v.get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(path(key) + ": " + e.what());
    }
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    return get<T>(key);
  }

  std::string path(const std::string& key) const { return where_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(path(it.key()) + ": unknown field");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

Scenario parse_scenario(const std::string& s) {
  if (s == "psharp-regret-swing") return Scenario::kPSharpRegretSwing;
  if (s == "impossibility") return Scenario::kImpossibility;
  if (s == "evop-convergence") return Scenario::kEvOpConvergence;
  if (s == "concentration") return Scenario::kConcentration;
  if (s == "bound-vs-empirical") return Scenario::kBoundVsEmpirical;
  if (s == "custom") return Scenario::kCustom;
  throw ConfigError("scenario: unknown scenario '" + s + "'");
}

BigInt parse_big(const json& v, const std::string& where) {
  try {
    if (v.is_number_unsigned()) return BigInt(v.get<std::uint64_t>());
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return BigInt(v.get<std::int64_t>());
    if (v.is_string()) {
      const auto s = v.get<std::string>();
      if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
        throw ConfigError(where + ": expected a nonnegative decimal integer");
      }
      return BigInt(s);
    }
  } catch (const json::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
  throw ConfigError(where + ": expected a nonnegative integer or a decimal string");
}

std::vector<Outcome> parse_outcomes(const std::string& text, const Alphabet& alphabet,
                                    const std::string& where) {
  try {
    return parse_sequence(text, alphabet);
  } catch (const ParseError& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

DelayConfig parse_delay(const json& j, const std::string& where) {
  Fields f(j, where);
  DelayConfig d;
  d.kind = f.get<std::string>("kind");
  if (d.kind == "constant") {
    d.value = f.get<Index>("value", 0);
  } else if (d.kind == "linear") {
    d.scale = f.get<double>("scale");
  } else if (d.kind == "batched") {
    d.ratio = f.get<double>("ratio", 2.0);
  } else if (d.kind == "table") {
    d.table = f.get<std::vector<Index>>("delays");
  } else {
    throw ConfigError(f.path("kind") + ": unknown delay kind '" + d.kind + "'");
  }
  f.finish();
  return d;
}

EnvironmentConfig parse_environment(const json& j, const std::filesystem::path& base_dir) {
  Fields f(j, "environment");
  EnvironmentConfig e;
  e.kind = f.get<std::string>("kind");
  if (e.kind == "psharp") {
    e.psharp.base = f.get<std::uint64_t>("base", 10);
    e.psharp.coin_bias = f.get<double>("coin_bias", 0.5);
    e.psharp.doubly_exponential = f.get<bool>("doubly_exponential", false);
    e.psharp.horizon_cap = f.get<Index>("horizon_cap", 0);
    if (f.has("forced_coins")) {
      e.psharp.forced_coins = parse_outcomes(f.get<std::string>("forced_coins"),
                                             Alphabet::coin(), f.path("forced_coins"));
    }
  } else if (e.kind == "iid") {
    e.q = f.get<double>("q");
    if (f.has("delay")) e.delay = parse_delay(f.at("delay"), f.path("delay"));
  } else if (e.kind == "deterministic") {
    e.alphabet = f.get<std::string>("alphabet", "HT");
    e.schedule = f.get<std::string>("schedule", "immediate");
    const bool has_path = f.has("path");
    const bool has_seq = f.has("sequence");
    if (has_path == has_seq) {
      throw ConfigError("environment: deterministic needs exactly one of 'path' or 'sequence'");
    }
    if (has_path) {
      e.path = (base_dir / f.get<std::string>("path")).lexically_normal();
    } else {
      e.sequence = parse_outcomes(f.get<std::string>("sequence"), Alphabet(e.alphabet),
                                  f.path("sequence"));
    }
    try {
      RevealSchedule::parse(e.schedule);
    } catch (const std::exception& ex) {
      throw ConfigError(f.path("schedule") + ": " + ex.what());
    }
  } else {
    throw ConfigError("environment.kind: unknown environment '" + e.kind + "'");
  }
  f.finish();
  return e;
}

MemberConfig parse_member(const json& j, const std::string& where) {
  Fields f(j, where);
  MemberConfig m;
  m.name = f.get<std::string>("name");
  m.kind = f.get<std::string>("kind");
  if (m.kind == "constant") {
    const json& v = f.at("value");
    if (v.is_array()) {
      m.value = f.get<std::vector<double>>("value");
    } else {
      m.value = {f.get<double>("value")};
    }
  } else if (m.kind == "empirical_frequency") {
    m.a = f.get<double>("a", 1.0);
    m.b = f.get<double>("b", 1.0);
    const auto s = f.get<std::string>("symbol", "H");
    if (s.size() != 1) throw ConfigError(f.path("symbol") + ": expected one character");
    m.symbol = s[0];
  } else {
    throw ConfigError(f.path("kind") + ": unknown forecaster kind '" + m.kind + "'");
  }
  m.defined_on = f.get<std::string>("defined_on", "");
  f.finish();
  return m;
}

GrowthConfig parse_growth(const json& j, const std::string& where) {
  Fields f(j, where);
  GrowthConfig g;
  g.kind = f.get<std::string>("kind");
  if (g.kind == "affine") {
    g.slope = parse_big(f.at("slope"), f.path("slope"));
    g.offset = parse_big(f.at("offset"), f.path("offset"));
  } else if (g.kind == "successor") {
  } else if (g.kind == "psharp_reveal") {
    g.base = f.get<std::uint64_t>("base", 10);
  } else if (g.kind == "table") {
    const json& v = f.at("values");
    if (!v.is_array()) throw ConfigError(f.path("values") + ": expected an array");
    for (std::size_t i = 0; i < v.size(); ++i) {
      g.values.push_back(parse_big(v[i], f.path("values") + "[" + std::to_string(i) + "]"));
    }
  } else {
    throw ConfigError(f.path("kind") + ": unknown growth kind '" + g.kind + "'");
  }
  f.finish();
  return g;
}

BoundConfig parse_bound(const json& j) {
  Fields f(j, "bound");
  BoundConfig b;
  const auto preset = f.get<std::string>("preset", "");
  if (preset == "psharp") {
    b.params = psharp_bound_params();
    b.h = GrowthConfig();
    b.h->kind = "successor";
    b.g = GrowthConfig();
    b.g->kind = "psharp_reveal";
    b.g->base = 10;
  } else if (!preset.empty()) {
    throw ConfigError("bound.preset: unknown preset '" + preset + "'");
  }
  b.params.rho = f.get<double>("rho", b.params.rho);
  b.params.kappa = f.get<double>("kappa", b.params.kappa);
  b.params.epsilon = f.get<double>("epsilon", b.params.epsilon);
  if (f.has("delta") && f.has("m")) throw ConfigError("bound: give either 'delta' or 'm'");
  if (f.has("delta")) b.params.m = BoundParams::m_for_margin(f.get<double>("delta"));
  b.params.m = f.get<std::uint64_t>("m", b.params.m);
  b.params.z = f.get<std::uint64_t>("z", b.params.z);
  b.params.pool_size = f.get<std::uint64_t>("pool_size", b.params.pool_size);
  if (f.has("h")) b.h = parse_growth(f.at("h"), "bound.h");
  if (f.has("g")) b.g = parse_growth(f.at("g"), "bound.g");
  b.p = f.get<double>("p", b.p);
  if (f.has("cap")) b.cap = parse_big(f.at("cap"), "bound.cap");
  if (f.has("horizons")) {
    const json& v = f.at("horizons");
    if (!v.is_array()) throw ConfigError("bound.horizons: expected an array");
    for (std::size_t i = 0; i < v.size(); ++i) {
      b.horizons.push_back(parse_big(v[i], "bound.horizons[" + std::to_string(i) + "]"));
    }
  }
  f.finish();
  try {
    b.params.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("bound: ") + e.what());
  }
  return b;
}

ConcentrationConfig parse_concentration(const json& j) {
  Fields f(j, "concentration");
  ConcentrationConfig c;
  c.generator = f.get<std::string>("generator", c.generator);
  c.increments = f.get<std::size_t>("increments", c.increments);
  c.trials = f.get<std::uint64_t>("trials", c.trials);
  c.lambdas = f.get<std::vector<double>>("lambdas", c.lambdas);
  c.a = f.get<double>("a", c.a);
  c.v = f.get<double>("v", c.v);
  c.coin_bias = f.get<double>("coin_bias", c.coin_bias);
  c.expect = f.get<std::string>("expect", c.expect);
  f.finish();
  static const std::set<std::string> generators{"zero", "psharp", "negative_control",
                                                "contract_violation"};
  if (!generators.count(c.generator)) {
    throw ConfigError("concentration.generator: unknown generator '" + c.generator + "'");
  }
  if (c.expect != "pass" && c.expect != "fail" && c.expect != "violation") {
    throw ConfigError("concentration.expect: must be pass, fail or violation");
  }
  if (c.trials < 1000) throw ConfigError("concentration.trials: at least 1000 required");
  for (const double l : c.lambdas) {
    if (!(l > 0.0)) throw ConfigError("concentration.lambdas: every lambda must be positive");
  }
  return c;
}

Checks parse_checks(const json& j) {
  Fields f(j, "checks");
  Checks c;
  c.swing_ratio = f.get<double>("swing_ratio", c.swing_ratio);
  c.from_block = f.get<Index>("from_block", c.from_block);
  c.avg_regret_threshold = f.get<double>("avg_regret_threshold", c.avg_regret_threshold);
  c.required_fraction = f.get<double>("required_fraction", c.required_fraction);
  f.finish();
  return c;
}

json growth_json(const GrowthConfig& g) {
  json j{{"kind", g.kind}};
  if (g.kind == "affine") {
    j["slope"] = g.slope.str();
    j["offset"] = g.offset.str();
  } else if (g.kind == "psharp_reveal") {
    j["base"] = g.base;
  } else if (g.kind == "table") {
    json v = json::array();
    for (const auto& x : g.values) v.push_back(x.str());
    j["values"] = v;
  }
  return j;
}

std::string outcomes_string(const std::vector<Outcome>& xs) {
  std::string s;
  for (const auto x : xs) s.push_back(x.symbol);
  return s;
}

}  // namespace

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::kPSharpRegretSwing: return "psharp-regret-swing";
    case Scenario::kImpossibility: return "impossibility";
    case Scenario::kEvOpConvergence: return "evop-convergence";
    case Scenario::kConcentration: return "concentration";
    case Scenario::kBoundVsEmpirical: return "bound-vs-empirical";
    case Scenario::kCustom: return "custom";
  }
  return "custom";
}

ExperimentConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  Fields f(doc, "config");
  ExperimentConfig c;
  c.scenario = parse_scenario(f.get<std::string>("scenario"));
  if (f.has("environment")) c.environment = parse_environment(f.at("environment"), base_dir);
  if (f.has("pool")) {
    const json& p = f.at("pool");
    if (!p.is_array()) throw ConfigError("config.pool: expected an array");
    for (std::size_t i = 0; i < p.size(); ++i) {
      c.pool.push_back(parse_member(p[i], "pool[" + std::to_string(i) + "]"));
    }
  }
  if (f.has("loss")) {
    Fields l(f.at("loss"), "loss");
    if (l.get<std::string>("kind", "squared_error") != "squared_error") {
      throw ConfigError("loss.kind: only squared_error is available");
    }
    c.loss_positive = l.get<std::string>("positive", "H");
    l.finish();
  }
  if (f.has("evop")) {
    Fields e(f.at("evop"), "evop");
    c.epsilon = e.get<double>("epsilon", 0.5);
    e.finish();
  }
  c.horizon = f.get<Index>("horizon", 0);
  if (f.has("seeds")) {
    Fields s(f.at("seeds"), "seeds");
    c.seed_count = s.get<std::uint64_t>("count", 1);
    c.master_seed = s.get<std::uint64_t>("master", 0);
    s.finish();
  }
  c.output = f.get<std::string>("output", "out");
  if (c.output.is_relative()) c.output = (base_dir / c.output).lexically_normal();
  c.target = f.get<std::string>("target", "");
  c.tolerance = f.get<double>("tolerance", c.tolerance);
  if (f.has("checks")) c.checks = parse_checks(f.at("checks"));
  if (f.has("bound")) c.bound = parse_bound(f.at("bound"));
  if (f.has("concentration")) c.concentration = parse_concentration(f.at("concentration"));
  c.per_step = f.get<bool>("per_step", false);
  f.finish();
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(doc, path.parent_path().empty() ? "." : path.parent_path());
}

void validate(const ExperimentConfig& c) {
  if (c.seed_count < 1) throw ConfigError("seeds.count: at least one seed is required");
  if (c.scenario == Scenario::kConcentration) {
    if (!c.concentration) throw ConfigError("concentration scenario needs a 'concentration' section");
    return;
  }
  if (c.horizon < 1) throw ConfigError("horizon: must be at least 1");
  if (!c.environment) throw ConfigError("scenario " + to_string(c.scenario) + " needs an environment");
  if (c.pool.empty()) throw ConfigError("scenario " + to_string(c.scenario) + " needs a pool");
  if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) throw ConfigError("evop.epsilon: must lie in (0, 1)");
  const bool needs_target = c.scenario == Scenario::kPSharpRegretSwing ||
                            c.scenario == Scenario::kEvOpConvergence ||
                            c.scenario == Scenario::kBoundVsEmpirical;
  if (needs_target && c.target.empty()) {
    throw ConfigError("scenario " + to_string(c.scenario) + " needs a 'target' pool member");
  }
  if (!c.target.empty()) {
    bool found = false;
    for (const auto& m : c.pool) found = found || m.name == c.target;
    if (!found) throw ConfigError("target: '" + c.target + "' is not a pool member");
  }
  const bool needs_blocks =
      c.scenario == Scenario::kPSharpRegretSwing || c.scenario == Scenario::kImpossibility;
  if (needs_blocks && c.environment->kind != "psharp") {
    throw ConfigError("scenario " + to_string(c.scenario) + " needs a psharp environment");
  }
  if (c.scenario == Scenario::kBoundVsEmpirical) {
    if (!c.bound || !c.bound->h || !c.bound->g) {
      throw ConfigError("bound-vs-empirical needs bound.h and bound.g");
    }
  }
  for (const auto& m : c.pool) {
    if (m.name == "evop") throw ConfigError("pool: the name 'evop' is reserved");
  }
  try {
    make_pool(c.pool);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("pool: ") + e.what());
  }
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["scenario"] = to_string(c.scenario);
  if (c.environment) {
    const auto& e = *c.environment;
    json env{{"kind", e.kind}};
    if (e.kind == "psharp") {
      env["base"] = e.psharp.base;
      env["coin_bias"] = e.psharp.coin_bias;
      env["doubly_exponential"] = e.psharp.doubly_exponential;
      env["horizon_cap"] = e.psharp.horizon_cap;
      if (!e.psharp.forced_coins.empty()) env["forced_coins"] = outcomes_string(e.psharp.forced_coins);
    } else if (e.kind == "iid") {
      env["q"] = e.q;
      json d{{"kind", e.delay.kind}};
      if (e.delay.kind == "constant") d["value"] = e.delay.value;
      if (e.delay.kind == "linear") d["scale"] = e.delay.scale;
      if (e.delay.kind == "batched") d["ratio"] = e.delay.ratio;
      if (e.delay.kind == "table") d["delays"] = e.delay.table;
      env["delay"] = d;
    } else {
      env["alphabet"] = e.alphabet;
      env["schedule"] = e.schedule;
      if (!e.path.empty()) {
        env["path"] = e.path.string();
      } else {
        env["sequence"] = outcomes_string(e.sequence);
      }
    }
    j["environment"] = env;
  }
  json pool = json::array();
  for (const auto& m : c.pool) {
    json mj{{"name", m.name}, {"kind", m.kind}};
    if (m.kind == "constant") {
      mj["value"] = m.value;
    } else {
      mj["a"] = m.a;
      mj["b"] = m.b;
      mj["symbol"] = std::string(1, m.symbol);
    }
    if (!m.defined_on.empty()) mj["defined_on"] = m.defined_on;
    pool.push_back(mj);
  }
  j["pool"] = pool;
  j["loss"] = {{"kind", "squared_error"}, {"positive", c.loss_positive}};
  j["evop"] = {{"epsilon", c.epsilon}};
  j["horizon"] = c.horizon;
  j["seeds"] = {{"count", c.seed_count}, {"master", c.master_seed}};
  j["output"] = c.output.string();
  if (!c.target.empty()) j["target"] = c.target;
  j["tolerance"] = c.tolerance;
  j["checks"] = {{"swing_ratio", c.checks.swing_ratio},
                 {"from_block", c.checks.from_block},
                 {"avg_regret_threshold", c.checks.avg_regret_threshold},
                 {"required_fraction", c.checks.required_fraction}};
  if (c.bound) {
    const auto& b = *c.bound;
    json bj{{"rho", b.params.rho},   {"kappa", b.params.kappa},         {"epsilon", b.params.epsilon},
            {"m", b.params.m},       {"z", b.params.z},                 {"pool_size", b.params.pool_size},
            {"p", b.p},              {"cap", b.cap.str()}};
    if (b.h) bj["h"] = growth_json(*b.h);
    if (b.g) bj["g"] = growth_json(*b.g);
    json hs = json::array();
    for (const auto& h : b.horizons) hs.push_back(h.str());
    bj["horizons"] = hs;
    j["bound"] = bj;
  }
  if (c.concentration) {
    const auto& k = *c.concentration;
    j["concentration"] = {{"generator", k.generator}, {"increments", k.increments},
                          {"trials", k.trials},       {"lambdas", k.lambdas},
                          {"a", k.a},                 {"v", k.v},
                          {"coin_bias", k.coin_bias}, {"expect", k.expect}};
  }
  j["per_step"] = c.per_step;
  return j;
}

}  // namespace evop::harness
