#include "evop/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>

namespace evop::harness {

using nlohmann::json;

namespace {

// For human-readable report lines; CSVs keep full precision.
std::string short_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

}  // namespace

namespace {

constexpr const char* kVersion = "1.0.0";

std::function<bool(Index)> step_predicate(const std::string& spec) {
  if (spec == "even") return [](Index n) { return n % 2 == 0; };
  if (spec == "odd") return [](Index n) { return n % 2 == 1; };
  const auto colon = spec.find(':');
  if (colon != std::string::npos) {
    const std::string kind = spec.substr(0, colon);
    Index bound = 0;
    try {
      std::size_t used = 0;
      bound = std::stoull(spec.substr(colon + 1), &used);
      if (used != spec.size() - colon - 1) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw std::invalid_argument("bad step predicate '" + spec + "'");
    }
    if (kind == "after") return [bound](Index n) { return n > bound; };
    if (kind == "before") return [bound](Index n) { return n < bound; };
  }
  throw std::invalid_argument("unknown step predicate '" + spec + "'");
}

std::string format_prediction(const std::optional<Prediction>& p) {
  if (!p) return "";
  std::string s;
  for (std::size_t k = 0; k < p->dimension(); ++k) {
    if (k) s += ';';
    s += format_double((*p)[k]);
  }
  return s;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("failed writing " + path.string());
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::size_t member_index(const RunData& data, const std::string& name) {
  const auto s = data.ledger.find(name);
  if (!s) throw ConfigError("no stream named '" + name + "'");
  return *s;
}

std::vector<std::size_t> members_except(const RunData& data, std::size_t skip) {
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s + 1 < data.ledger.streams(); ++s) {
    if (s != skip) out.push_back(s);
  }
  return out;
}

std::optional<double> try_regret(const RunLedger& ledger, std::size_t f,
                                 const std::vector<std::size_t>& competitors, Index n) {
  if (competitors.empty()) return std::nullopt;
  if (ledger.defined_count(f, n) != n) return std::nullopt;
  try {
    return regret(ledger, f, competitors, n);
  } catch (const EmptyComparisonClass&) {
    return std::nullopt;
  }
}

std::string optional_cell(const std::optional<double>& x) { return x ? format_double(*x) : ""; }

std::string optional_cell(const std::optional<Index>& x) {
  return x ? std::to_string(*x) : "";
}

double median(std::vector<Index> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  if (n % 2 == 1) return static_cast<double>(xs[n / 2]);
  return (static_cast<double>(xs[n / 2 - 1]) + static_cast<double>(xs[n / 2])) / 2.0;
}

std::string join(const std::vector<std::string>& cells) {
  std::string s;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) s += ',';
    s += cells[i];
  }
  return s + "\n";
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string str() const {
    std::string s = join(header);
    for (const auto& r : rows) s += join(r);
    return s;
  }
};

struct Aggregates {
  std::vector<std::pair<std::string, std::string>> values;
  std::vector<std::pair<std::string, bool>> checks;

  void add(std::string key, std::string value) { values.emplace_back(std::move(key), std::move(value)); }
  void check(std::string what, bool ok) { checks.emplace_back(std::move(what), ok); }
  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.second; });
  }
};

MartingaleGenerator make_generator(const ConcentrationConfig& c) {
  if (c.generator == "zero") return zero_generator();
  if (c.generator == "psharp") return psharp_generator(squared_error(), c.coin_bias);
  if (c.generator == "negative_control") return negative_control_generator(c.a, c.v);
  return contract_violation_generator(c.a, c.v);
}

GrowthFunctions make_growth_pair(const BoundConfig& b) {
  if (!b.h || !b.g) throw ConfigError("bound needs both 'h' and 'g'");
  return {make_growth(*b.h), make_growth(*b.g)};
}

void write_metadata(const ExperimentConfig& config, const std::vector<std::uint64_t>& seeds) {
  json runs = json::array();
  for (std::size_t k = 0; k < seeds.size(); ++k) runs.push_back({{"run", k}, {"seed", seeds[k]}});
  json meta{{"config", to_json(config)},
            {"version", kVersion},
            {"rng", kRngName},
            {"seed_derivation", "seed_k = splitmix64(master ^ splitmix64(k))"},
            {"compiler", __VERSION__},
            {"created", utc_timestamp()},
            {"runs", runs}};
  write_file(config.output / "metadata.json", meta.dump(2) + "\n");
}

std::string render_report(const ExperimentConfig& config, const Aggregates& agg) {
  std::ostringstream os;
  os << "scenario: " << to_string(config.scenario) << "\n";
  for (const auto& [k, v] : agg.values) os << k << ": " << v << "\n";
  for (const auto& [what, ok] : agg.checks) os << (ok ? "PASS" : "FAIL") << "  " << what << "\n";
  os << "overall: " << (agg.passed() ? "PASS" : "FAIL") << "\n";
  return os.str();
}

std::string aggregate_csv(const Aggregates& agg) {
  std::string s = "metric,value\n";
  for (const auto& [k, v] : agg.values) s += k + "," + v + "\n";
  return s;
}

// Scenario bodies. Each fills the per-run summary table and the aggregates.

struct RunSummary {
  std::vector<std::string> cells;
  bool pass = true;
  std::optional<Index> convergence;
};

Index final_block_start(const RunData& data) {
  const Index steps = data.ledger.steps();
  if (!data.blocks || steps == 0) return steps;
  return data.blocks->block_start(data.blocks->block_of(steps));
}

RunSummary summarize(const ExperimentConfig& config, const RunData& data) {
  RunSummary s;
  const auto& ledger = data.ledger;
  const std::size_t evop_stream = ledger.streams() - 1;
  const Index steps = ledger.steps();
  switch (config.scenario) {
    case Scenario::kPSharpRegretSwing: {
      const std::size_t f = member_index(data, config.target);
      const auto competitors = members_except(data, f);
      std::optional<double> worst;
      Index worst_block = 0;
      for (Index k = config.checks.from_block; k <= data.blocks->finite_blocks(); ++k) {
        const Index end = data.blocks->block_end(k);
        if (end > steps) break;
        const auto r = try_regret(ledger, f, competitors, end);
        const double ratio = r ? *r / static_cast<double>(end) : -1.0;
        if (!worst || ratio < *worst) {
          worst = ratio;
          worst_block = k;
        }
      }
      s.pass = worst && *worst >= config.checks.swing_ratio;
      s.cells = {optional_cell(worst), worst ? std::to_string(worst_block) : "",
                 s.pass ? "1" : "0"};
      break;
    }
    case Scenario::kImpossibility: {
      std::vector<std::size_t> pool;
      for (std::size_t i = 0; i < evop_stream; ++i) pool.push_back(i);
      std::optional<double> best;
      for (Index k = 1; k <= data.blocks->finite_blocks(); ++k) {
        const Index end = data.blocks->block_end(k);
        if (end > steps) break;
        const auto r = try_regret(ledger, evop_stream, pool, end);
        if (r && (!best || *r / static_cast<double>(end) > *best)) {
          best = *r / static_cast<double>(end);
        }
      }
      s.pass = best && *best >= config.checks.avg_regret_threshold;
      s.cells = {optional_cell(best), s.pass ? "1" : "0"};
      break;
    }
    case Scenario::kEvOpConvergence:
    case Scenario::kBoundVsEmpirical:
    case Scenario::kCustom: {
      if (!config.target.empty()) {
        const std::size_t f = member_index(data, config.target);
        s.convergence = convergence_step(ledger.stream(evop_stream), ledger.stream(f), config.tolerance);
      }
      if (config.scenario == Scenario::kEvOpConvergence) {
        s.pass = s.convergence && *s.convergence <= final_block_start(data);
        s.cells = {optional_cell(s.convergence), std::to_string(final_block_start(data)),
                   s.pass ? "1" : "0"};
      } else {
        s.cells = {optional_cell(s.convergence)};
        for (std::size_t i = 0; i < ledger.streams(); ++i) {
          s.cells.push_back(format_double(ledger.cumulative_loss(i, steps)));
        }
      }
      break;
    }
    case Scenario::kConcentration:
      break;
  }
  return s;
}

std::vector<std::string> summary_header(const ExperimentConfig& config,
                                        const std::vector<std::string>& names) {
  std::vector<std::string> h{"run", "seed", "steps", "truncated"};
  switch (config.scenario) {
    case Scenario::kPSharpRegretSwing:
      h.insert(h.end(), {"min_swing_ratio", "min_swing_block", "pass"});
      break;
    case Scenario::kImpossibility:
      h.insert(h.end(), {"max_average_regret", "pass"});
      break;
    case Scenario::kEvOpConvergence:
      h.insert(h.end(), {"convergence_step", "final_block_start", "converged"});
      break;
    case Scenario::kBoundVsEmpirical:
    case Scenario::kCustom:
      h.push_back("convergence_step");
      for (const auto& n : names) h.push_back("loss_" + n);
      break;
    case Scenario::kConcentration:
      break;
  }
  return h;
}

CommandResult run_concentration(const ExperimentConfig& config) {
  std::filesystem::create_directories(config.output);
  const auto result = verify(config);
  write_file(config.output / "report.txt", result.report);
  write_metadata(config, {config.master_seed});
  return result;
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::unique_ptr<Environment> make_environment(const EnvironmentConfig& c, std::uint64_t seed) {
  if (c.kind == "psharp") return make_psharp(c.psharp, seed);
  if (c.kind == "iid") {
    const auto& d = c.delay;
    DelaySchedule delay = d.kind == "linear"    ? DelaySchedule::linear(d.scale)
                          : d.kind == "batched" ? DelaySchedule::batched(d.ratio)
                          : d.kind == "table"   ? DelaySchedule::table(d.table)
                                                : DelaySchedule::constant(d.value);
    return make_iid_bernoulli(c.q, std::move(delay), seed);
  }
  if (c.kind == "deterministic") {
    const auto schedule = RevealSchedule::parse(c.schedule);
    if (!c.path.empty()) return make_deterministic(c.path, schedule, Alphabet(c.alphabet));
    return make_deterministic(c.sequence, schedule, Alphabet(c.alphabet));
  }
  throw ConfigError("unknown environment kind '" + c.kind + "'");
}

ForecasterPool make_pool(const std::vector<MemberConfig>& members) {
  std::vector<ForecasterPool::Member> out;
  for (const auto& m : members) {
    ForecasterPtr f;
    if (m.kind == "constant") {
      f = constant(Prediction(std::span<const double>(m.value)));
    } else if (m.kind == "empirical_frequency") {
      f = empirical_frequency(m.a, m.b, Outcome{m.symbol});
    } else {
      throw std::invalid_argument("unknown forecaster kind '" + m.kind + "'");
    }
    if (!m.defined_on.empty()) f = abstaining(f, step_predicate(m.defined_on), m.defined_on);
    out.push_back({m.name, f});
  }
  return ForecasterPool(std::move(out));
}

GrowthFunction make_growth(const GrowthConfig& c) {
  if (c.kind == "affine") return GrowthFunction::affine(c.slope, c.offset);
  if (c.kind == "successor") return GrowthFunction::successor();
  if (c.kind == "psharp_reveal") return GrowthFunction::psharp_reveal(c.base);
  if (c.kind == "table") return GrowthFunction::table(c.values);
  throw ConfigError("unknown growth kind '" + c.kind + "'");
}

RunData simulate(const ExperimentConfig& config, std::uint64_t run) {
  if (!config.environment) throw ConfigError("simulation needs an environment");
  const std::uint64_t seed = derive_seed(config.master_seed, run);
  auto env = make_environment(*config.environment, seed);
  auto pool = make_pool(config.pool);
  const LossSpec loss = squared_error(config.loss_positive, env->alphabet().symbols());
  std::vector<std::string> names;
  for (const auto& m : pool.members()) names.push_back(m.name);
  names.push_back("evop");
  RunData data{run, seed, names, RunLedger(names, loss), {}, std::nullopt, false};
  IncrementalEvOp evop(EvOpConfig(loss, std::move(pool), config.epsilon));
  for (Index n = 1; n <= config.horizon; ++n) {
    const auto obs = env->step();
    if (!obs) {
      data.truncated = true;
      break;
    }
    const Decision d = evop.observe(*obs);
    auto predictions = evop.current_predictions();
    predictions.push_back(d.prediction);
    data.ledger.record(predictions, env->truth(n));
    data.choices.push_back(d.choice);
  }
  if (const BlockLayout* b = env->blocks()) data.blocks = *b;
  return data;
}

std::vector<Index> snapshot_steps(const RunData& data) {
  const Index steps = data.ledger.steps();
  std::vector<Index> out;
  if (steps == 0) return out;
  if (data.blocks) {
    for (Index k = 1; k <= data.blocks->finite_blocks(); ++k) {
      const Index end = data.blocks->block_end(k);
      if (end > steps) break;
      out.push_back(end);
    }
  } else {
    for (Index d = 1; d <= steps; d *= 10) {
      out.push_back(d);
      if (d > steps / 10) break;
    }
  }
  if (out.empty() || out.back() != steps) out.push_back(steps);
  return out;
}

std::vector<Index> csv_rows(const RunData& data, bool per_step) {
  const Index steps = data.ledger.steps();
  std::vector<Index> out;
  if (steps == 0) return out;
  if (per_step) {
    for (Index n = 1; n <= steps; ++n) out.push_back(n);
    return out;
  }
  std::set<Index> rows{1, steps};
  for (const Index n : snapshot_steps(data)) rows.insert(n);
  for (Index n = 2; n <= steps; ++n) {
    bool changed = data.choices[n - 1] != data.choices[n - 2];
    for (std::size_t s = 0; !changed && s < data.ledger.streams(); ++s) {
      changed = data.ledger.prediction(s, n) != data.ledger.prediction(s, n - 1);
    }
    if (changed) rows.insert(n);
  }
  return {rows.begin(), rows.end()};
}

void write_run_csv(std::ostream& os, const RunData& data, bool per_step) {
  const auto& ledger = data.ledger;
  const std::size_t members = ledger.streams() - 1;
  std::vector<std::string> header{"n"};
  for (std::size_t i = 0; i < members; ++i) {
    header.push_back("pred_" + ledger.name(i));
    header.push_back("loss_" + ledger.name(i));
  }
  header.push_back("evop_choice");
  header.push_back("evop_pred");
  os << join(header);
  for (const Index n : csv_rows(data, per_step)) {
    std::vector<std::string> row{std::to_string(n)};
    for (std::size_t i = 0; i < members; ++i) {
      row.push_back(format_prediction(ledger.prediction(i, n)));
      row.push_back(format_double(ledger.cumulative_loss(i, n)));
    }
    row.push_back(std::to_string(data.choices[n - 1]));
    row.push_back(format_prediction(ledger.prediction(members, n)));
    os << join(row);
  }
}

void write_regret_csv(std::ostream& os, const RunData& data) {
  const auto& ledger = data.ledger;
  const std::size_t members = ledger.streams() - 1;
  std::vector<std::string> header{"block", "n", "coin"};
  for (std::size_t s = 0; s < ledger.streams(); ++s) header.push_back("loss_" + ledger.name(s));
  for (std::size_t s = 0; s < ledger.streams(); ++s) header.push_back("regret_" + ledger.name(s));
  os << join(header);
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < members; ++i) pool.push_back(i);
  for (const Index n : snapshot_steps(data)) {
    std::vector<std::string> row;
    const bool at_block_end = data.blocks && data.blocks->block_end(data.blocks->block_of(n)) == n;
    row.push_back(at_block_end ? std::to_string(data.blocks->block_of(n)) : "");
    row.push_back(std::to_string(n));
    row.push_back(std::string(1, ledger.truth(n).symbol));
    for (std::size_t s = 0; s < ledger.streams(); ++s) {
      row.push_back(format_double(ledger.cumulative_loss(s, n)));
    }
    for (std::size_t s = 0; s < ledger.streams(); ++s) {
      const auto competitors = s == members ? pool : members_except(data, s);
      row.push_back(optional_cell(try_regret(ledger, s, competitors, n)));
    }
    os << join(row);
  }
}

CommandResult run(const ExperimentConfig& config) {
  validate(config);
  if (config.scenario == Scenario::kConcentration) return run_concentration(config);
  std::filesystem::create_directories(config.output);

  std::vector<std::string> names;
  for (const auto& m : config.pool) names.push_back(m.name);
  names.push_back("evop");
  Table summary{summary_header(config, names), {}};
  std::vector<std::uint64_t> seeds;
  std::vector<RunSummary> runs;
  for (std::uint64_t k = 0; k < config.seed_count; ++k) {
    const RunData data = simulate(config, k);
    seeds.push_back(data.seed);
    {
      std::ostringstream os;
      write_run_csv(os, data, config.per_step);
      write_file(config.output / ("run_" + std::to_string(k) + ".csv"), os.str());
    }
    {
      std::ostringstream os;
      write_regret_csv(os, data);
      write_file(config.output / ("regret_" + std::to_string(k) + ".csv"), os.str());
    }
    RunSummary s = summarize(config, data);
    std::vector<std::string> row{std::to_string(k), std::to_string(data.seed),
                                 std::to_string(data.ledger.steps()), data.truncated ? "1" : "0"};
    row.insert(row.end(), s.cells.begin(), s.cells.end());
    summary.rows.push_back(std::move(row));
    runs.push_back(std::move(s));
  }

  Aggregates agg;
  const auto count = static_cast<double>(runs.size());
  const auto passing = static_cast<double>(
      std::count_if(runs.begin(), runs.end(), [](const RunSummary& r) { return r.pass; }));
  agg.add("runs", std::to_string(runs.size()));
  switch (config.scenario) {
    case Scenario::kPSharpRegretSwing:
      agg.add("swing_fraction", format_double(passing / count));
      agg.check("regret of " + config.target + " >= " + short_double(config.checks.swing_ratio) +
                    " * S_k at every block end k >= " + std::to_string(config.checks.from_block) +
                    " in every run",
                passing == count);
      break;
    case Scenario::kImpossibility:
      agg.add("fraction_above_threshold", format_double(passing / count));
      agg.check("max average regret of evop >= " + short_double(config.checks.avg_regret_threshold) +
                    " in at least " + short_double(config.checks.required_fraction) + " of runs",
                passing / count >= config.checks.required_fraction);
      break;
    case Scenario::kEvOpConvergence:
    case Scenario::kBoundVsEmpirical:
    case Scenario::kCustom: {
      std::vector<Index> steps;
      for (const auto& r : runs) {
        if (r.convergence) steps.push_back(*r.convergence);
      }
      if (!config.target.empty()) {
        agg.add("convergence_fraction", format_double(static_cast<double>(steps.size()) / count));
        agg.add("median_convergence_step", steps.empty() ? "" : format_double(median(steps)));
      }
      if (config.scenario == Scenario::kEvOpConvergence) {
        agg.add("converged_by_final_block_fraction", format_double(passing / count));
        agg.check("evop matches " + config.target + " throughout the final block in at least " +
                      short_double(config.checks.required_fraction) + " of runs",
                  passing / count >= config.checks.required_fraction);
      }
      if (config.scenario == Scenario::kBoundVsEmpirical) {
        const auto& b = *config.bound;
        const auto failures = static_cast<double>(runs.size() - steps.size());
        // Laplace estimate, so that a perfect record still gives p in (0, 1).
        const double p = (failures + 1.0) / (count + 2.0);
        const auto theory = steps_for_probability(b.params, make_growth_pair(b), p, b.cap);
        agg.add("target_failure_probability", format_double(p));
        agg.add("theory_t", std::to_string(theory.t));
        agg.add("theory_steps", to_string(theory.n));
        bool valid = true;
        const auto* n_theory = std::get_if<BigInt>(&theory.n);
        for (std::size_t k = 0; k < runs.size(); ++k) {
          const bool ok = !runs[k].convergence || !n_theory || *n_theory >= *runs[k].convergence;
          valid = valid && ok;
        }
        agg.check("theoretical steps >= empirical convergence step in every run", valid);
      }
      break;
    }
    case Scenario::kConcentration:
      break;
  }

  write_file(config.output / "summary.csv", summary.str());
  write_file(config.output / "aggregate.csv", aggregate_csv(agg));
  const std::string report = render_report(config, agg);
  write_file(config.output / "report.txt", report);
  write_metadata(config, seeds);
  return {agg.passed(), report};
}

CommandResult bound(const ExperimentConfig& config) {
  if (!config.bound) throw ConfigError("bound needs a 'bound' section");
  const auto& b = *config.bound;
  const GrowthFunctions funcs = make_growth_pair(b);
  std::ostringstream os;
  const auto& p = b.params;
  os << "rho: " << short_double(p.rho) << "\n"
     << "kappa: " << short_double(p.kappa) << "\n"
     << "epsilon: " << short_double(p.epsilon) << "\n"
     << "m: " << p.m << "\n"
     << "z: " << p.z << "\n"
     << "pool_size: " << p.pool_size << "\n"
     << "b: " << format_double(p.b()) << "\n"
     << "alpha: " << format_double(p.alpha()) << "\n"
     << "c: " << format_double(p.c()) << "\n"
     << "h: " << funcs.h.description() << "\n"
     << "g: " << funcs.g.description() << "\n";
  const auto steps = steps_for_probability(p, funcs, b.p, b.cap);
  os << "steps_for_probability(p=" << short_double(b.p) << ", cap=" << b.cap.str()
     << "): t=" << steps.t << " N=" << to_string(steps.n) << "\n";
  for (const auto& horizon : b.horizons) {
    const std::uint64_t t = max_iterations_within(funcs, horizon);
    os << "convergence_probability(T=" << horizon.str() << "): t=" << t
       << " probability=" << format_double(convergence_probability(p, funcs, horizon)) << "\n";
  }
  return {true, os.str()};
}

CommandResult verify(const ExperimentConfig& config) {
  if (!config.concentration) throw ConfigError("verify needs a 'concentration' section");
  const auto& c = *config.concentration;
  std::ostringstream os;
  os << "generator: " << c.generator << "\n"
     << "increments: " << c.increments << "\n"
     << "trials: " << c.trials << "\n";
  std::string outcome;
  try {
    const auto report =
        verify_concentration(make_generator(c), c.increments, c.trials, c.lambdas, config.master_seed);
    os << "lambda,empirical,bound,std_error,pass\n";
    for (const auto& t : report.checks) {
      os << format_double(t.lambda) << "," << format_double(t.empirical) << ","
         << format_double(t.bound) << "," << format_double(t.std_error) << ","
         << (t.pass ? "1" : "0") << "\n";
    }
    outcome = report.all_pass() ? "pass" : "fail";
  } catch (const GeneratorContractViolation& e) {
    os << "contract violation: " << e.what() << "\n";
    outcome = "violation";
  }
  const bool ok = outcome == c.expect;
  os << "outcome: " << outcome << " (expected " << c.expect << ")\n"
     << "overall: " << (ok ? "PASS" : "FAIL") << "\n";
  return {ok, os.str()};
}

CommandResult compare(const std::filesystem::path& a, const std::filesystem::path& b) {
  namespace fs = std::filesystem;
  auto listing = [](const fs::path& root) {
    if (!fs::is_directory(root)) throw IoError(root.string() + " is not a directory");
    std::set<std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
      if (!e.is_regular_file()) continue;
      const auto rel = fs::relative(e.path(), root).generic_string();
      if (rel != "metadata.json") files.insert(rel);
    }
    return files;
  };
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot read " + p.string());
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  const auto fa = listing(a);
  const auto fb = listing(b);
  std::ostringstream os;
  bool same = true;
  std::set<std::string> all = fa;
  all.insert(fb.begin(), fb.end());
  for (const auto& f : all) {
    if (!fa.count(f) || !fb.count(f)) {
      os << "only in " << (fa.count(f) ? a : b).string() << ": " << f << "\n";
      same = false;
    } else if (slurp(a / f) != slurp(b / f)) {
      os << "differs: " << f << "\n";
      same = false;
    }
  }
  os << "compared " << all.size() << " files: " << (same ? "identical" : "different") << "\n";
  return {same, os.str()};
}

}  // namespace evop::harness
