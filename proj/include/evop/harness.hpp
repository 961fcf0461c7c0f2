#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "evop/bounds.hpp"
#include "evop/environments.hpp"
#include "evop/evop.hpp"
#include "evop/forecasters.hpp"
#include "evop/loss.hpp"
#include "evop/metrics.hpp"

namespace evop::harness {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Scenario {
  kPSharpRegretSwing,
  kImpossibility,
  kEvOpConvergence,
  kConcentration,
  kBoundVsEmpirical,
  kCustom,
};

std::string to_string(Scenario s);

struct DelayConfig {
  std::string kind = "constant";  // constant | linear | batched | table
  Index value = 0;
  double scale = 1.0;
  double ratio = 2.0;
  std::vector<Index> table;
};

struct EnvironmentConfig {
  std::string kind;  // psharp | iid | deterministic
  PSharpParams psharp;
  double q = 0.5;
  DelayConfig delay;
  std::filesystem::path path;
  std::vector<Outcome> sequence;
  std::string schedule = "immediate";
  std::string alphabet = "HT";
};

struct MemberConfig {
  std::string name;
  std::string kind;  // constant | empirical_frequency
  std::vector<double> value;
  double a = 1.0;
  double b = 1.0;
  char symbol = 'H';
  /// "", "even", "odd", "after:N" or "before:N".
  std::string defined_on;
};

struct Checks {
  double swing_ratio = 0.14;
  Index from_block = 2;
  double avg_regret_threshold = 0.1;
  double required_fraction = 0.95;
};

struct GrowthConfig {
  std::string kind;  // affine | successor | psharp_reveal | table
  BigInt slope = 1;
  BigInt offset = 0;
  std::uint64_t base = 10;
  std::vector<BigInt> values;
};

struct BoundConfig {
  BoundParams params;
  std::optional<GrowthConfig> h;
  std::optional<GrowthConfig> g;
  double p = 0.5;
  BigInt cap = BigInt(1000000000000ull);
  std::vector<BigInt> horizons;
};

struct ConcentrationConfig {
  std::string generator = "psharp";  // zero | psharp | negative_control | contract_violation
  std::size_t increments = 100;
  std::uint64_t trials = 100000;
  std::vector<double> lambdas{1.0, 2.0, 5.0, 10.0};
  double a = 2.0;
  double v = 0.25;
  double coin_bias = 0.5;
  /// What a correct implementation should report: pass | fail | violation.
  std::string expect = "pass";
};

struct ExperimentConfig {
  Scenario scenario = Scenario::kCustom;
  std::optional<EnvironmentConfig> environment;
  std::vector<MemberConfig> pool;
  std::string loss_positive = "H";
  double epsilon = 0.5;
  Index horizon = 0;
  std::uint64_t seed_count = 1;
  std::uint64_t master_seed = 0;
  std::filesystem::path output = "out";
  std::string target;
  double tolerance = 1e-9;
  Checks checks;
  std::optional<BoundConfig> bound;
  std::optional<ConcentrationConfig> concentration;
  bool per_step = false;
};

/// Relative paths inside the document resolve against `base_dir`.
ExperimentConfig parse_config(const nlohmann::json& doc,
                              const std::filesystem::path& base_dir = ".");
ExperimentConfig load_config(const std::filesystem::path& path);
/// Scenario-specific required fields; throws ConfigError.
void validate(const ExperimentConfig& config);
/// Effective configuration as JSON, echoed into metadata.
nlohmann::json to_json(const ExperimentConfig& config);

std::unique_ptr<Environment> make_environment(const EnvironmentConfig& config, std::uint64_t seed);
ForecasterPool make_pool(const std::vector<MemberConfig>& members);
GrowthFunction make_growth(const GrowthConfig& config);

/// One seeded run: the ledger holds the pool members followed by "evop".
struct RunData {
  std::uint64_t run = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> names;
  RunLedger ledger;
  std::vector<std::size_t> choices;
  std::optional<BlockLayout> blocks;
  bool truncated = false;
};

RunData simulate(const ExperimentConfig& config, std::uint64_t run);

/// Steps written to run_<k>.csv: every step with --per-step; otherwise the
/// first and last step, block ends (decades when there are no blocks), and
/// every step where some prediction or the EvOp choice changed.
std::vector<Index> csv_rows(const RunData& data, bool per_step);
/// Block ends, or decades 10^j, up to the last step, plus the last step.
std::vector<Index> snapshot_steps(const RunData& data);

void write_run_csv(std::ostream& os, const RunData& data, bool per_step);
void write_regret_csv(std::ostream& os, const RunData& data);

std::string format_double(double x);

struct CommandResult {
  bool passed = true;
  std::string report;
};

/// run subcommand: writes run_<k>.csv, regret_<k>.csv, summary.csv,
/// aggregate.csv, report.txt and metadata.json into config.output.
CommandResult run(const ExperimentConfig& config);
/// bound subcommand.
CommandResult bound(const ExperimentConfig& config);
/// verify subcommand.
CommandResult verify(const ExperimentConfig& config);
/// Byte comparison of every file in two output directories except
/// metadata.json.
CommandResult compare(const std::filesystem::path& a, const std::filesystem::path& b);

}  // namespace evop::harness
