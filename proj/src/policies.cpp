#include "cppl/policies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cppl/errors.hpp"

namespace cppl {

namespace {

void check_k(int k, int n) {
  if (k < 1 || k >= n) {
    throw InvalidArgument("subset size k=" + std::to_string(k) + " must satisfy 1 <= k < n=" +
                          std::to_string(n));
  }
}

}  // namespace

ArmSet top_k(const Vector& scores, int k) {
  const int n = static_cast<int>(scores.size());
  check_k(k, n);
  ArmSet idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), [&](int a, int b) {
    return scores(a) > scores(b) || (scores(a) == scores(b) && a < b);
  });
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

PolicyDecision cppl_choose(const EstimatorState& state, const ContextMatrix& context, int k,
                           double omega) {
  check_k(k, context.arms());
  if (state.t == 0) {
    // No observation yet: no covariance to build widths from.
    return max_theta_choose(state, context, k);
  }
  const ConfidenceWidths cw = confidence_widths(state, context, omega);
  Vector scores = cw.utilities + cw.widths;
  ArmSet subset = top_k(scores, k);
  return {std::move(subset), std::move(scores)};
}

PolicyDecision max_theta_choose(const EstimatorState& state, const ContextMatrix& context, int k) {
  check_k(k, context.arms());
  Vector scores = contextual_utilities(state.theta_bar, context).values();
  ArmSet subset = top_k(scores, k);
  return {std::move(subset), std::move(scores)};
}

ArmSet random_subset(int n, int k, Rng& rng) {
  check_k(k, n);
  ArmSet arms(static_cast<std::size_t>(n));
  std::iota(arms.begin(), arms.end(), 0);
  for (int i = 0; i < k; ++i) {
    const std::size_t j = static_cast<std::size_t>(i) + rng.index(static_cast<std::size_t>(n - i));
    std::swap(arms[static_cast<std::size_t>(i)], arms[j]);
  }
  arms.resize(static_cast<std::size_t>(k));
  std::sort(arms.begin(), arms.end());
  return arms;
}

PolicyDecision epsilon_greedy_choose(const EstimatorState& state, const ContextMatrix& context,
                                     int k, double epsilon, Rng& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InvalidArgument("epsilon must lie in [0, 1]");
  check_k(k, context.arms());
  if (rng.uniform() < epsilon) {
    return {random_subset(context.arms(), k, rng), Vector::Zero(context.arms())};
  }
  return max_theta_choose(state, context, k);
}

void StageSummary::add(const MMObservation& obs) {
  const int n = static_cast<int>(wins.size());
  check_subset(obs.subset, n);
  for (int a : obs.subset) seen[static_cast<std::size_t>(a)] = true;
  auto add_stage = [&](int winner, ArmSet pool) {
    std::sort(pool.begin(), pool.end());
    ++wins[static_cast<std::size_t>(winner)];
    ++pools[std::move(pool)];
  };
  if (const auto* w = std::get_if<Winner>(&obs.feedback)) {
    if (std::find(obs.subset.begin(), obs.subset.end(), w->arm) == obs.subset.end()) {
      throw InvalidArgument("winner is not in the subset");
    }
    if (obs.subset.size() > 1) add_stage(w->arm, obs.subset);
    return;
  }
  const auto& order = std::get<Ranking>(obs.feedback).ordering();
  // The final single-arm stage carries no information and is skipped.
  for (std::size_t p = 0; p + 1 < order.size(); ++p) {
    add_stage(order[p], ArmSet(order.begin() + static_cast<std::ptrdiff_t>(p), order.end()));
  }
}

MMState::MMState(int n) {
  if (n < 1) throw InvalidArgument("MM state needs n >= 1");
  weights = Vector::Constant(n, 1.0 / n);
}

void mm_fit_summary(MMState& state, const StageSummary& summary, int max_iters, double tol) {
  const int n = state.arms();
  if (static_cast<int>(summary.wins.size()) != n) throw InvalidArgument("summary size mismatch");
  const double prior = 1.0 / n;

  state.unseen_arms.clear();
  int n_seen = 0;
  for (int i = 0; i < n; ++i) {
    if (summary.seen[static_cast<std::size_t>(i)]) {
      ++n_seen;
    } else {
      state.unseen_arms.push_back(i);
    }
  }

  // Seen arms share the mass n_seen / n; unseen arms sit at the prior.
  auto normalize = [&](Vector& w) {
    double seen_mass = 0.0;
    for (int i = 0; i < n; ++i) {
      if (summary.seen[static_cast<std::size_t>(i)]) {
        w(i) = std::max(w(i), kMMWeightFloor);
        seen_mass += w(i);
      }
    }
    const double target = static_cast<double>(n_seen) / n;
    for (int i = 0; i < n; ++i) {
      w(i) = summary.seen[static_cast<std::size_t>(i)] ? w(i) * target / seen_mass : prior;
    }
  };

  Vector w = state.weights;
  normalize(w);
  state.iterations = 0;
  state.converged = false;
  if (n_seen == 0 || summary.pools.empty()) {
    state.weights = w;
    state.converged = true;
    return;
  }

  Vector denom(n);
  for (int it = 0; it < max_iters; ++it) {
    denom.setZero();
    for (const auto& [pool, count] : summary.pools) {
      double total = 0.0;
      for (int j : pool) total += w(j);
      const double share = static_cast<double>(count) / total;
      for (int j : pool) denom(j) += share;
    }
    Vector next = w;
    for (int i = 0; i < n; ++i) {
      if (denom(i) > 0.0) next(i) = static_cast<double>(summary.wins[static_cast<std::size_t>(i)]) / denom(i);
    }
    normalize(next);
    const double change = (next - w).cwiseAbs().maxCoeff();
    w = std::move(next);
    state.iterations = it + 1;
    if (change < tol) {
      state.converged = true;
      break;
    }
  }
  state.weights = w;
}

MMState mm_fit(MMState state, int max_iters, double tol) {
  if (state.history.empty()) throw InvalidArgument("mm_fit needs a nonempty history");
  StageSummary summary(state.arms());
  for (const auto& obs : state.history) summary.add(obs);
  mm_fit_summary(state, summary, max_iters, tol);
  return state;
}

PolicyDecision mm_choose(const MMState& state, int k) {
  return {top_k(state.weights, k), state.weights};
}

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kCppl: return "cppl";
    case PolicyKind::kMaxTheta: return "maxtheta";
    case PolicyKind::kEpsilonGreedy: return "egreedy";
    case PolicyKind::kMM: return "mm";
  }
  return "unknown";
}

PolicyKind parse_policy_kind(const std::string& name) {
  if (name == "cppl") return PolicyKind::kCppl;
  if (name == "maxtheta") return PolicyKind::kMaxTheta;
  if (name == "egreedy") return PolicyKind::kEpsilonGreedy;
  if (name == "mm") return PolicyKind::kMM;
  throw ConfigError("unknown policy '" + name + "'");
}

EstimatorPolicy::EstimatorPolicy(int d, Rng rng, EstimatorConfig config)
    : state_(make_estimator(d, rng, config)), rng_(std::move(rng)) {}

CpplPolicy::CpplPolicy(int d, Rng rng, EstimatorConfig config, double omega)
    : EstimatorPolicy(d, std::move(rng), config), omega_(omega) {
  if (!(omega >= 0.0)) throw ConfigError("omega must be nonnegative");
}

PolicyDecision CpplPolicy::choose(const ContextMatrix& context, int k) {
  return cppl_choose(state_, context, k, omega_);
}

PolicyDecision MaxThetaPolicy::choose(const ContextMatrix& context, int k) {
  return max_theta_choose(state_, context, k);
}

EpsilonGreedyPolicy::EpsilonGreedyPolicy(int d, Rng rng, EstimatorConfig config, double epsilon)
    : EstimatorPolicy(d, std::move(rng), config), epsilon_(epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must lie in [0, 1]");
}

PolicyDecision EpsilonGreedyPolicy::choose(const ContextMatrix& context, int k) {
  return epsilon_greedy_choose(state_, context, k, epsilon_, rng_);
}

MMPolicy::MMPolicy(int n, int max_iters, double tol)
    : state_(n), summary_(n), max_iters_(max_iters), tol_(tol) {}

PolicyDecision MMPolicy::choose(const ContextMatrix& context, int k) {
  if (context.arms() != state_.arms()) throw InvalidArgument("context arm count mismatch");
  return mm_choose(state_, k);
}

void MMPolicy::update(const Observation& obs) {
  MMObservation entry{obs.subset, obs.feedback};
  summary_.add(entry);
  state_.history.push_back(std::move(entry));
  mm_fit_summary(state_, summary_, max_iters_, tol_);
}

std::unique_ptr<Policy> make_policy(PolicyKind kind, int n, int d, Rng rng,
                                    const PolicyParams& params) {
  switch (kind) {
    case PolicyKind::kCppl:
      return std::make_unique<CpplPolicy>(d, std::move(rng), params.estimator, params.omega);
    case PolicyKind::kMaxTheta:
      return std::make_unique<MaxThetaPolicy>(d, std::move(rng), params.estimator);
    case PolicyKind::kEpsilonGreedy:
      return std::make_unique<EpsilonGreedyPolicy>(d, std::move(rng), params.estimator,
                                                   params.epsilon);
    case PolicyKind::kMM:
      return std::make_unique<MMPolicy>(n, params.mm_max_iters, params.mm_tol);
  }
  throw ConfigError("unknown policy kind");
}

}  // namespace cppl
