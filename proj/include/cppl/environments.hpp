#pragma once

// Ground-truth worlds for the preselection protocol. An environment reveals a
// context each round, knows the true PL utilities behind it, and answers a
// chosen subset with PL-sampled feedback.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cppl/likelihood.hpp"

namespace cppl {

// ---------------------------------------------------------------------------
// Regret

// (v_best - max_{j in S} v_j) / v_best, computed from log-utilities.
double instant_regret(const UtilityVector& true_utils, const ArmSet& subset);
// Lowest-index arm with the largest utility.
int best_arm(const UtilityVector& utils);

struct RegretTrace {
  std::vector<double> instantaneous;
  std::vector<double> cumulative;

  void push(double r) {
    instantaneous.push_back(r);
    cumulative.push_back((cumulative.empty() ? 0.0 : cumulative.back()) + r);
  }
  std::size_t size() const { return instantaneous.size(); }
};

Feedback sample_feedback(const UtilityVector& true_utils, const ArmSet& subset, FeedbackMode mode,
                         Rng& rng);

// ---------------------------------------------------------------------------
// Synthetic contextual PL world

struct SyntheticScenario {
  int n = 0;
  int d = 0;
  int k = 0;
  int T = 0;
  Vector theta_star;
  std::uint64_t seed = 0;
};

// theta* is drawn i.i.d. U[0, 1]^d from `seed`.
SyntheticScenario make_synthetic_scenario(int n, int d, int k, int T, std::uint64_t seed);
void validate(const SyntheticScenario& scenario);

// Every context entry i.i.d. U[0, 1]; a pure function of (seed, t).
ContextMatrix synthetic_round(const SyntheticScenario& scenario, int t);

UtilityVector true_utilities(const Vector& theta_star, const ContextMatrix& context);

// ---------------------------------------------------------------------------
// Algorithm selection from a runtime table

struct RuntimeTable {
  std::vector<std::string> instance_ids;
  Matrix runtimes;           // instances x solvers, seconds
  Matrix instance_features;  // instances x p
  Matrix solver_features;    // solvers x 4 (alpha, rho, ps, wp)

  int instances() const { return static_cast<int>(runtimes.rows()); }
  int solvers() const { return static_cast<int>(runtimes.cols()); }
};

void validate(const RuntimeTable& table);

// Runtime CSV: `instance_id,solver_0,...`; instance feature CSV:
// `instance_id,f0,...` keyed by the same ids; solver feature CSV:
// `alpha,rho,ps,wp`. Throws IoError on unreadable or malformed files.
RuntimeTable load_runtime_table(const std::string& runtimes_path,
                                const std::string& instance_features_path,
                                const std::string& solver_features_path);
Matrix load_solver_features(const std::string& path);

struct PreprocessResult {
  Matrix reduced;
  std::vector<int> kept;  // surviving raw column indices, ascending
};

inline constexpr double kMinFeatureVariance = 0.01;
inline constexpr double kMaxFeatureCorrelation = 0.95;

// Min-max scaling to [0, 1], a low-variance filter, then greedy removal of
// one member of the most correlated remaining pair while |corr| exceeds the
// threshold. Variance is the population variance of the scaled column.
PreprocessResult preprocess_features(const Matrix& raw,
                                     double min_variance = kMinFeatureVariance,
                                     double max_correlation = kMaxFeatureCorrelation);

// Kronecker product with u varying slowest: out(a * w.size() + b) = u(a) w(b).
Vector kron(const Vector& u, const Vector& w);

// Context for round t (1-based) of a shuffled pass over the instances, plus
// utilities exp(-lambda * runtime).
std::pair<ContextMatrix, UtilityVector> algoselect_round(const RuntimeTable& table,
                                                         const std::vector<int>& order, int t,
                                                         double lambda);

// Random permutation of [0, instances).
std::vector<int> shuffled_order(int instances, Rng& rng);

// ---------------------------------------------------------------------------
// Round-by-round interface used by the harness

class Environment {
 public:
  virtual ~Environment() = default;
  virtual int arms() const = 0;
  virtual int dim() const = 0;
  // Rounds the environment can serve; negative means unbounded.
  virtual int capacity() const = 0;
  // Context and ground-truth utilities for round t (1-based).
  virtual std::pair<ContextMatrix, UtilityVector> round(int t) = 0;
  // Feedback for the subset chosen in round t.
  virtual Feedback feedback(int t, const UtilityVector& true_utils, const ArmSet& subset,
                            FeedbackMode mode) = 0;
};

class SyntheticEnvironment : public Environment {
 public:
  explicit SyntheticEnvironment(SyntheticScenario scenario);
  int arms() const override { return scenario_.n; }
  int dim() const override { return scenario_.d; }
  int capacity() const override { return -1; }
  std::pair<ContextMatrix, UtilityVector> round(int t) override;
  Feedback feedback(int t, const UtilityVector& true_utils, const ArmSet& subset,
                    FeedbackMode mode) override;
  const SyntheticScenario& scenario() const { return scenario_; }

 private:
  SyntheticScenario scenario_;
};

class AlgoSelectEnvironment : public Environment {
 public:
  // `table` must already carry preprocessed instance features.
  AlgoSelectEnvironment(const RuntimeTable& table, double lambda, std::uint64_t seed);
  int arms() const override { return table_->solvers(); }
  int dim() const override {
    return static_cast<int>(table_->instance_features.cols() * table_->solver_features.cols());
  }
  int capacity() const override { return table_->instances(); }
  std::pair<ContextMatrix, UtilityVector> round(int t) override;
  Feedback feedback(int t, const UtilityVector& true_utils, const ArmSet& subset,
                    FeedbackMode mode) override;
  const std::vector<int>& order() const { return order_; }

 private:
  const RuntimeTable* table_;
  double lambda_;
  std::uint64_t seed_;
  std::vector<int> order_;
};

}  // namespace cppl
