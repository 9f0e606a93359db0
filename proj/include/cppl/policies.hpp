#pragma once

// Subset-selection policies: CPPL (UCB on contextual PL utilities), the
// Max-Theta and epsilon-greedy baselines sharing its estimator, and a greedy
// context-free PL baseline fitted with minorization-maximization (MM).

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "cppl/estimator.hpp"

namespace cppl {

struct PolicyDecision {
  ArmSet subset;  // sorted ascending
  Vector scores;  // per-arm values the selection was based on
};

// Indices of the k largest scores, ties broken toward the lower index.
// Returned sorted ascending.
ArmSet top_k(const Vector& scores, int k);

PolicyDecision cppl_choose(const EstimatorState& state, const ContextMatrix& context, int k,
                           double omega);
PolicyDecision max_theta_choose(const EstimatorState& state, const ContextMatrix& context, int k);
PolicyDecision epsilon_greedy_choose(const EstimatorState& state, const ContextMatrix& context,
                                     int k, double epsilon, Rng& rng);

// Uniformly random k-subset of [0, n), sorted ascending.
ArmSet random_subset(int n, int k, Rng& rng);

struct MMObservation {
  ArmSet subset;
  Feedback feedback;
};

// Sufficient statistics of a history for the MM iteration: per-arm stage wins
// and the multiset of stage pools, keyed by sorted pool.
struct StageSummary {
  std::vector<long> wins;
  std::map<ArmSet, long> pools;
  std::vector<bool> seen;

  explicit StageSummary(int n) : wins(n, 0), seen(n, false) {}
  void add(const MMObservation& obs);
};

struct MMState {
  Vector weights;
  std::vector<MMObservation> history;
  // Diagnostics from the last fit.
  std::vector<int> unseen_arms;
  int iterations = 0;
  bool converged = false;

  explicit MMState(int n);
  int arms() const { return static_cast<int>(weights.size()); }
};

// Smallest weight an arm that appears but never wins is allowed to take.
inline constexpr double kMMWeightFloor = 1e-12;

MMState mm_fit(MMState state, int max_iters = 100, double tol = 1e-8);
// MM iterations on precomputed statistics, warm-started from `state.weights`.
void mm_fit_summary(MMState& state, const StageSummary& summary, int max_iters, double tol);
PolicyDecision mm_choose(const MMState& state, int k);

// Online interface used by the harness: choose a subset for the revealed
// context, then learn from the resulting observation.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual PolicyDecision choose(const ContextMatrix& context, int k) = 0;
  virtual void update(const Observation& obs) = 0;
};

enum class PolicyKind { kCppl, kMaxTheta, kEpsilonGreedy, kMM };

std::string to_string(PolicyKind kind);
PolicyKind parse_policy_kind(const std::string& name);

struct PolicyParams {
  EstimatorConfig estimator;
  double omega = 1.0;
  double epsilon = 0.1;
  int mm_max_iters = 100;
  double mm_tol = 1e-8;
};

// Shared by CPPL, Max-Theta and epsilon-greedy: all three learn theta with
// the same averaged SGD and differ only in how they pick the subset.
class EstimatorPolicy : public Policy {
 public:
  EstimatorPolicy(int d, Rng rng, EstimatorConfig config);
  void update(const Observation& obs) override { sgd_update_in_place(state_, obs); }
  const EstimatorState& state() const { return state_; }

 protected:
  EstimatorState state_;
  Rng rng_;
};

class CpplPolicy : public EstimatorPolicy {
 public:
  CpplPolicy(int d, Rng rng, EstimatorConfig config, double omega);
  std::string name() const override { return "cppl"; }
  PolicyDecision choose(const ContextMatrix& context, int k) override;

 private:
  double omega_;
};

class MaxThetaPolicy : public EstimatorPolicy {
 public:
  using EstimatorPolicy::EstimatorPolicy;
  std::string name() const override { return "maxtheta"; }
  PolicyDecision choose(const ContextMatrix& context, int k) override;
};

class EpsilonGreedyPolicy : public EstimatorPolicy {
 public:
  EpsilonGreedyPolicy(int d, Rng rng, EstimatorConfig config, double epsilon);
  std::string name() const override { return "egreedy"; }
  PolicyDecision choose(const ContextMatrix& context, int k) override;

 private:
  double epsilon_;
};

class MMPolicy : public Policy {
 public:
  MMPolicy(int n, int max_iters, double tol);
  std::string name() const override { return "mm"; }
  PolicyDecision choose(const ContextMatrix& context, int k) override;
  void update(const Observation& obs) override;
  const MMState& state() const { return state_; }

 private:
  MMState state_;
  StageSummary summary_;
  int max_iters_;
  double tol_;
};

std::unique_ptr<Policy> make_policy(PolicyKind kind, int n, int d, Rng rng,
                                    const PolicyParams& params);

}  // namespace cppl
