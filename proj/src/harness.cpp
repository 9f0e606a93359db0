#include "cppl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include "cppl/errors.hpp"

namespace cppl {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Enum names

std::string to_string(EnvironmentKind kind) {
  return kind == EnvironmentKind::kSynthetic ? "synthetic" : "algoselect";
}
std::string to_string(FeedbackMode mode) {
  return mode == FeedbackMode::kWinner ? "winner" : "ranking";
}
std::string to_string(OutputFormat format) {
  return format == OutputFormat::kCsv ? "csv" : "json";
}

EnvironmentKind parse_environment_kind(const std::string& s) {
  if (s == "synthetic") return EnvironmentKind::kSynthetic;
  if (s == "algoselect") return EnvironmentKind::kAlgoSelect;
  throw ConfigError("unknown environment '" + s + "'");
}
FeedbackMode parse_feedback_mode(const std::string& s) {
  if (s == "winner") return FeedbackMode::kWinner;
  if (s == "ranking") return FeedbackMode::kRanking;
  throw ConfigError("unknown feedback mode '" + s + "'");
}
OutputFormat parse_output_format(const std::string& s) {
  if (s == "csv") return OutputFormat::kCsv;
  if (s == "json") return OutputFormat::kJson;
  throw ConfigError("unknown output format '" + s + "'");
}

// ---------------------------------------------------------------------------
// Config

void validate(const ExperimentConfig& c) {
  if (c.T < 0) throw ConfigError("T must be >= 0");
  if (c.k < 1) throw ConfigError("k must be >= 1");
  if (c.environment == EnvironmentKind::kSynthetic) {
    if (c.d < 1) throw ConfigError("d must be >= 1");
    if (c.k >= c.n) throw ConfigError("k must be < n");
  } else {
    if (c.runtimes_path.empty() || c.instance_features_path.empty() ||
        c.solver_features_path.empty()) {
      throw ConfigError("algoselect needs --runtimes, --instance-features and --solver-features");
    }
    if (!(c.lambda >= 0.0)) throw ConfigError("lambda must be nonnegative");
  }
  validate(c.params.estimator);
  if (!(c.params.omega >= 0.0)) throw ConfigError("omega must be >= 0");
  if (!(c.params.epsilon >= 0.0 && c.params.epsilon <= 1.0)) {
    throw ConfigError("epsilon must lie in [0, 1]");
  }
  if (c.params.mm_max_iters < 1) throw ConfigError("mm_max_iters must be >= 1");
  if (!(c.params.mm_tol > 0.0)) throw ConfigError("mm_tol must be positive");
  if (c.repetitions < 1) throw ConfigError("repetitions must be >= 1");
  if (c.threads < 0) throw ConfigError("threads must be >= 0");
}

void to_json(json& j, const ExperimentConfig& c) {
  j = json{{"environment", to_string(c.environment)},
           {"n", c.n},
           {"d", c.d},
           {"k", c.k},
           {"T", c.T},
           {"lambda", c.lambda},
           {"runtimes", c.runtimes_path},
           {"instance_features", c.instance_features_path},
           {"solver_features", c.solver_features_path},
           {"policy", to_string(c.policy)},
           {"gamma1", c.params.estimator.gamma1},
           {"alpha", c.params.estimator.alpha},
           {"ridge", c.params.estimator.ridge},
           {"omega", c.params.omega},
           {"epsilon", c.params.epsilon},
           {"mm_max_iters", c.params.mm_max_iters},
           {"mm_tol", c.params.mm_tol},
           {"feedback", to_string(c.feedback)},
           {"repetitions", c.repetitions},
           {"seed", c.seed},
           {"out", c.output_path},
           {"format", to_string(c.format)},
           {"threads", c.threads}};
}

void from_json(const json& j, ExperimentConfig& c) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const json& v = it.value();
    try {
      if (key == "environment") c.environment = parse_environment_kind(v.get<std::string>());
      else if (key == "n") c.n = v.get<int>();
      else if (key == "d") c.d = v.get<int>();
      else if (key == "k") c.k = v.get<int>();
      else if (key == "T") c.T = v.get<int>();
      else if (key == "lambda") c.lambda = v.get<double>();
      else if (key == "runtimes") c.runtimes_path = v.get<std::string>();
      else if (key == "instance_features") c.instance_features_path = v.get<std::string>();
      else if (key == "solver_features") c.solver_features_path = v.get<std::string>();
      else if (key == "policy") c.policy = parse_policy_kind(v.get<std::string>());
      else if (key == "gamma1") c.params.estimator.gamma1 = v.get<double>();
      else if (key == "alpha") c.params.estimator.alpha = v.get<double>();
      else if (key == "ridge") c.params.estimator.ridge = v.get<double>();
      else if (key == "omega") c.params.omega = v.get<double>();
      else if (key == "epsilon") c.params.epsilon = v.get<double>();
      else if (key == "mm_max_iters") c.params.mm_max_iters = v.get<int>();
      else if (key == "mm_tol") c.params.mm_tol = v.get<double>();
      else if (key == "feedback") c.feedback = parse_feedback_mode(v.get<std::string>());
      else if (key == "repetitions") c.repetitions = v.get<int>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "out") c.output_path = v.get<std::string>();
      else if (key == "format") c.format = parse_output_format(v.get<std::string>());
      else if (key == "threads") c.threads = v.get<int>();
      else throw ConfigError("unknown config key '" + key + "'");
    } catch (const json::exception& e) {
      throw ConfigError("config key '" + key + "': " + e.what());
    }
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
  ExperimentConfig c;
  from_json(j, c);
  return c;
}

// ---------------------------------------------------------------------------
// Running

PreparedTable prepare_runtime_table(const ExperimentConfig& config) {
  PreparedTable out{load_runtime_table(config.runtimes_path, config.instance_features_path,
                                       config.solver_features_path),
                    {}};
  PreprocessResult pre = preprocess_features(out.table.instance_features);
  out.table.instance_features = std::move(pre.reduced);
  out.kept_features = std::move(pre.kept);
  return out;
}

RegretTrace run_loop(Environment& env, Policy& policy, int T, int k, FeedbackMode mode) {
  if (env.capacity() >= 0 && T > env.capacity()) {
    throw ExhaustedEnvironment("T=" + std::to_string(T) + " exceeds the environment's " +
                               std::to_string(env.capacity()) + " rounds");
  }
  RegretTrace trace;
  trace.instantaneous.reserve(static_cast<std::size_t>(T));
  trace.cumulative.reserve(static_cast<std::size_t>(T));
  for (int t = 1; t <= T; ++t) {
    auto [context, truth] = env.round(t);
    PolicyDecision decision = policy.choose(context, k);
    Feedback fb = env.feedback(t, truth, decision.subset, mode);
    trace.push(instant_regret(truth, decision.subset));
    policy.update(Observation{std::move(fb), std::move(decision.subset), std::move(context)});
  }
  return trace;
}

std::uint64_t repetition_seed(const ExperimentConfig& config, int rep_index) {
  return config.seed + static_cast<std::uint64_t>(rep_index);
}

std::uint64_t environment_seed(const ExperimentConfig& config, int rep_index) {
  Rng rng = Rng::derive({repetition_seed(config, rep_index),
                         static_cast<std::uint64_t>(Stream::kEnvironment)});
  return rng();
}

Rng policy_rng(const ExperimentConfig& config, int rep_index) {
  return Rng::derive({repetition_seed(config, rep_index), static_cast<std::uint64_t>(Stream::kPolicy)});
}

std::unique_ptr<Environment> make_environment(const ExperimentConfig& config, int rep_index,
                                              const RuntimeTable* table) {
  const std::uint64_t seed = environment_seed(config, rep_index);
  if (config.environment == EnvironmentKind::kSynthetic) {
    return std::make_unique<SyntheticEnvironment>(
        make_synthetic_scenario(config.n, config.d, config.k, config.T, seed));
  }
  if (table == nullptr) throw ConfigError("algoselect environment needs a runtime table");
  if (config.k >= table->solvers()) {
    throw ConfigError("k must be < number of solvers (" + std::to_string(table->solvers()) + ")");
  }
  if (config.T > table->instances()) {
    throw ExhaustedEnvironment("T=" + std::to_string(config.T) + " exceeds the " +
                               std::to_string(table->instances()) + " available instances");
  }
  return std::make_unique<AlgoSelectEnvironment>(*table, config.lambda, seed);
}

RegretTrace run_repetition(const ExperimentConfig& config, int rep_index,
                           const RuntimeTable* table) {
  validate(config);
  auto env = make_environment(config, rep_index, table);
  auto policy = make_policy(config.policy, env->arms(), env->dim(), policy_rng(config, rep_index),
                            config.params);
  return run_loop(*env, *policy, config.T, config.k, config.feedback);
}

RegretTrace run_repetition(const ExperimentConfig& config, int rep_index) {
  if (config.environment == EnvironmentKind::kAlgoSelect) {
    validate(config);
    const PreparedTable prepared = prepare_runtime_table(config);
    return run_repetition(config, rep_index, &prepared.table);
  }
  return run_repetition(config, rep_index, nullptr);
}

AggregatedResult aggregate(const std::vector<RegretTrace>& traces) {
  AggregatedResult out;
  if (traces.empty()) return out;
  const std::size_t T = traces.front().size();
  const double reps = static_cast<double>(traces.size());
  for (const auto& tr : traces) {
    if (tr.size() != T) throw InvalidArgument("traces differ in length");
    out.cumulative.push_back(tr.cumulative);
    out.final_regrets.push_back(T > 0 ? tr.cumulative.back() : 0.0);
  }
  out.mean_cum_regret.assign(T, 0.0);
  out.std_error.assign(T, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    double sum = 0.0;
    for (const auto& tr : traces) sum += tr.cumulative[t];
    const double mean = sum / reps;
    out.mean_cum_regret[t] = mean;
    if (traces.size() > 1) {
      double ss = 0.0;
      for (const auto& tr : traces) ss += (tr.cumulative[t] - mean) * (tr.cumulative[t] - mean);
      out.std_error[t] = std::sqrt(ss / (reps - 1.0)) / std::sqrt(reps);
    }
  }
  return out;
}

namespace {

[[noreturn]] void rethrow_for_repetition(std::exception_ptr ep, int rep) {
  const std::string prefix = "repetition " + std::to_string(rep) + ": ";
  try {
    std::rethrow_exception(ep);
  } catch (const ExhaustedEnvironment& e) {
    throw ExhaustedEnvironment(prefix + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(prefix + e.what());
  } catch (const IoError& e) {
    throw IoError(prefix + e.what());
  } catch (const NumericOverflow& e) {
    throw NumericOverflow(prefix + e.what());
  } catch (const NumericError& e) {
    throw NumericError(prefix + e.what());
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(prefix + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error(prefix + e.what());
  }
}

}  // namespace

AggregatedResult run_experiment(const ExperimentConfig& config) {
  validate(config);
  const auto start = std::chrono::steady_clock::now();

  PreparedTable prepared;
  const RuntimeTable* table = nullptr;
  if (config.environment == EnvironmentKind::kAlgoSelect) {
    prepared = prepare_runtime_table(config);
    table = &prepared.table;
    // Surface an oversized T before any repetition starts.
    make_environment(config, 0, table);
  }

  const int reps = config.repetitions;
  std::vector<RegretTrace> traces(static_cast<std::size_t>(reps));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(reps));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r = next++; r < reps; r = next++) {
      try {
        traces[static_cast<std::size_t>(r)] = run_repetition(config, r, table);
      } catch (...) {
        errors[static_cast<std::size_t>(r)] = std::current_exception();
      }
    }
  };
  int threads = config.threads == 0 ? static_cast<int>(std::thread::hardware_concurrency())
                                    : config.threads;
  threads = std::clamp(threads, 1, reps);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  for (int r = 0; r < reps; ++r) {
    if (errors[static_cast<std::size_t>(r)]) rethrow_for_repetition(errors[static_cast<std::size_t>(r)], r);
  }

  AggregatedResult result = aggregate(traces);
  result.config = config;
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

// ---------------------------------------------------------------------------
// Output

namespace {

// Shortest representation that parses back to the same double.
std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

json metadata(const AggregatedResult& r) {
  return json{{"config", r.config},
              {"repetitions", r.final_regrets.size()},
              {"rounds", r.rounds()},
              {"final_regrets", r.final_regrets},
              {"wall_time_seconds", r.wall_seconds}};
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << contents;
  out.close();
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace

void emit_results(const AggregatedResult& result, const std::string& path, OutputFormat format) {
  if (format == OutputFormat::kCsv) {
    std::string csv = "round,mean_cum_regret,stderr\n";
    for (std::size_t t = 0; t < result.rounds(); ++t) {
      csv += std::to_string(t + 1) + ',' + format_double(result.mean_cum_regret[t]) + ',' +
             format_double(result.std_error[t]) + '\n';
    }
    write_file(path, csv);
    write_file(path + ".meta.json", metadata(result).dump(2) + "\n");
    return;
  }
  json doc = metadata(result);
  std::vector<int> rounds(result.rounds());
  for (std::size_t t = 0; t < rounds.size(); ++t) rounds[t] = static_cast<int>(t) + 1;
  doc["schema"] = "cppl-regret/1";
  doc["round"] = rounds;
  doc["mean_cum_regret"] = result.mean_cum_regret;
  doc["stderr"] = result.std_error;
  write_file(path, doc.dump(2) + "\n");
}

RegretTable read_results_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != "round,mean_cum_regret,stderr") {
    throw IoError(path + ": unexpected header");
  }
  RegretTable t;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string a, b, c;
    if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, c)) {
      throw IoError(path + ": malformed row '" + line + "'");
    }
    double mean = 0.0, se = 0.0;
    int round = 0;
    auto ok = [](auto r, const std::string& s) { return r.ec == std::errc() && r.ptr == s.data() + s.size(); };
    if (!ok(std::from_chars(a.data(), a.data() + a.size(), round), a) ||
        !ok(std::from_chars(b.data(), b.data() + b.size(), mean), b) ||
        !ok(std::from_chars(c.data(), c.data() + c.size(), se), c)) {
      throw IoError(path + ": malformed row '" + line + "'");
    }
    t.rounds.push_back(round);
    t.mean_cum_regret.push_back(mean);
    t.std_error.push_back(se);
  }
  return t;
}

RegretTable read_results_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    json doc;
    in >> doc;
    RegretTable t;
    t.rounds = doc.at("round").get<std::vector<int>>();
    t.mean_cum_regret = doc.at("mean_cum_regret").get<std::vector<double>>();
    t.std_error = doc.at("stderr").get<std::vector<double>>();
    return t;
  } catch (const json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
}

}  // namespace cppl
