#pragma once

// Experiment orchestration: configuration, the online protocol loop,
// repetitions with independent seeded streams, aggregation and output.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "cppl/environments.hpp"
#include "cppl/policies.hpp"

namespace cppl {

enum class EnvironmentKind { kSynthetic, kAlgoSelect };
enum class OutputFormat { kCsv, kJson };

struct ExperimentConfig {
  EnvironmentKind environment = EnvironmentKind::kSynthetic;
  int n = 20;
  int d = 5;
  int k = 5;
  int T = 2000;
  double lambda = 10.0;
  std::string runtimes_path;
  std::string instance_features_path;
  std::string solver_features_path;

  PolicyKind policy = PolicyKind::kCppl;
  PolicyParams params;
  FeedbackMode feedback = FeedbackMode::kWinner;

  int repetitions = 1;
  std::uint64_t seed = 0;
  std::string output_path;
  OutputFormat format = OutputFormat::kCsv;
  int threads = 1;  // 0 = hardware concurrency
};

// Throws ConfigError on any violated constraint.
void validate(const ExperimentConfig& config);

void to_json(nlohmann::json& j, const ExperimentConfig& config);
// Missing keys keep their defaults; unknown keys are rejected.
void from_json(const nlohmann::json& j, ExperimentConfig& config);
ExperimentConfig load_config(const std::string& path);

std::string to_string(EnvironmentKind kind);
std::string to_string(FeedbackMode mode);
std::string to_string(OutputFormat format);
EnvironmentKind parse_environment_kind(const std::string& s);
FeedbackMode parse_feedback_mode(const std::string& s);
OutputFormat parse_output_format(const std::string& s);

// Loads the three CSV files named in the config and replaces the instance
// features by their preprocessed reduction.
struct PreparedTable {
  RuntimeTable table;
  std::vector<int> kept_features;
};
PreparedTable prepare_runtime_table(const ExperimentConfig& config);

// Observe -> choose -> feedback -> update for rounds 1..T, recording regret.
RegretTrace run_loop(Environment& env, Policy& policy, int T, int k, FeedbackMode mode);

// Seeds: repetition seed = config.seed + rep_index; environment and policy
// streams are derived from it independently.
std::uint64_t repetition_seed(const ExperimentConfig& config, int rep_index);
std::uint64_t environment_seed(const ExperimentConfig& config, int rep_index);
Rng policy_rng(const ExperimentConfig& config, int rep_index);

std::unique_ptr<Environment> make_environment(const ExperimentConfig& config, int rep_index,
                                              const RuntimeTable* table);

RegretTrace run_repetition(const ExperimentConfig& config, int rep_index);
// `table` must come from prepare_runtime_table for algoselect configs.
RegretTrace run_repetition(const ExperimentConfig& config, int rep_index,
                           const RuntimeTable* table);

struct AggregatedResult {
  ExperimentConfig config;
  std::vector<double> mean_cum_regret;
  std::vector<double> std_error;
  std::vector<double> final_regrets;
  std::vector<std::vector<double>> cumulative;  // per repetition
  double wall_seconds = 0.0;

  std::size_t rounds() const { return mean_cum_regret.size(); }
};

// Mean and standard error (sample sd / sqrt(R)) per round.
AggregatedResult aggregate(const std::vector<RegretTrace>& traces);

AggregatedResult run_experiment(const ExperimentConfig& config);

// CSV: `round,mean_cum_regret,stderr` at `path`, plus `<path>.meta.json`
// holding the config echo, per-repetition final regrets and wall time.
// JSON: one document at `path` with all of the above.
void emit_results(const AggregatedResult& result, const std::string& path, OutputFormat format);

struct RegretTable {
  std::vector<int> rounds;
  std::vector<double> mean_cum_regret;
  std::vector<double> std_error;
};
RegretTable read_results_csv(const std::string& path);
RegretTable read_results_json(const std::string& path);

}  // namespace cppl
