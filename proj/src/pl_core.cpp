#include "cppl/pl_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "cppl/errors.hpp"

namespace cppl {

namespace {

std::vector<int> sorted_copy(const ArmSet& arms) {
  std::vector<int> out(arms);
  std::sort(out.begin(), out.end());
  return out;
}

// Sample an index from unnormalized log-weights.
std::size_t categorical_from_logs(std::span<const double> logs, Rng& rng) {
  const double shift = *std::max_element(logs.begin(), logs.end());
  double total = 0.0;
  for (double l : logs) total += std::exp(l - shift);
  double u = rng.uniform() * total;
  for (std::size_t j = 0; j < logs.size(); ++j) {
    u -= std::exp(logs[j] - shift);
    if (u < 0.0) return j;
  }
  // Rounding left a sliver of mass past the last bucket.
  return logs.size() - 1;
}

void check_ranking_on(const Ranking& ranking, const ArmSet& subset) {
  if (ranking.members() != sorted_copy(subset)) {
    throw InvalidArgument("ranking domain differs from the subset");
  }
}

}  // namespace

Ranking Ranking::from_ordering(std::vector<int> ordering) {
  const std::size_t m = ordering.size();
  std::vector<int> positions(m);
  for (std::size_t p = 0; p < m; ++p) positions[p] = static_cast<int>(p) + 1;
  return from_ranks(std::move(ordering), std::move(positions));
}

Ranking Ranking::from_ranks(std::vector<int> members, std::vector<int> positions) {
  if (members.size() != positions.size()) {
    throw InvalidArgument("ranking: members and positions differ in length");
  }
  const std::size_t m = members.size();
  std::vector<std::size_t> idx(m);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return members[a] < members[b]; });

  Ranking r;
  r.members_.resize(m);
  r.positions_.resize(m);
  r.ordering_.assign(m, -1);
  for (std::size_t j = 0; j < m; ++j) {
    const int arm = members[idx[j]];
    const int pos = positions[idx[j]];
    if (arm < 0) throw InvalidArgument("ranking: negative arm index");
    if (j > 0 && r.members_[j - 1] == arm) {
      throw InvalidArgument("ranking: arm " + std::to_string(arm) + " listed twice");
    }
    if (pos < 1 || pos > static_cast<int>(m) || r.ordering_[pos - 1] != -1) {
      throw InvalidArgument("ranking: positions are not a permutation of 1..m");
    }
    r.members_[j] = arm;
    r.positions_[j] = pos;
    r.ordering_[pos - 1] = arm;
  }
  return r;
}

int Ranking::rank_of(int arm) const {
  auto it = std::lower_bound(members_.begin(), members_.end(), arm);
  if (it == members_.end() || *it != arm) {
    throw InvalidArgument("ranking: arm " + std::to_string(arm) + " is not ranked");
  }
  return positions_[static_cast<std::size_t>(it - members_.begin())];
}

bool Ranking::contains(int arm) const {
  return std::binary_search(members_.begin(), members_.end(), arm);
}

ContextMatrix::ContextMatrix(Matrix columns, int round) : columns_(std::move(columns)), round_(round) {
  if (columns_.rows() < 1 || columns_.cols() < 1) {
    throw InvalidArgument("context matrix needs d >= 1 and n >= 1");
  }
  if (!columns_.allFinite()) throw InvalidArgument("context matrix has non-finite entries");
}

UtilityVector UtilityVector::from_values(const Vector& values) {
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (!(values(i) > 0.0) || !std::isfinite(values(i))) {
      throw InvalidArgument("utilities must be positive and finite");
    }
  }
  return UtilityVector(values.array().log().matrix());
}

UtilityVector UtilityVector::from_logs(Vector logs) {
  if (!logs.allFinite()) throw NumericOverflow("log-utilities must be finite");
  return UtilityVector(std::move(logs));
}

double UtilityVector::value(int i) const { return std::exp(logs_(i)); }

Vector UtilityVector::values() const { return logs_.array().exp().matrix(); }

double log_sum_exp(std::span<const double> xs) {
  if (xs.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(xs.begin(), xs.end());
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

UtilityVector contextual_utilities(const Vector& theta, const ContextMatrix& context) {
  if (theta.size() != context.dim()) {
    throw InvalidArgument("theta has dimension " + std::to_string(theta.size()) +
                          ", context has " + std::to_string(context.dim()));
  }
  return UtilityVector::from_logs(context.matrix().transpose() * theta);
}

void check_subset(const ArmSet& subset, int n) {
  if (subset.empty()) throw InvalidArgument("subset is empty");
  auto sorted = sorted_copy(subset);
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw InvalidArgument("subset has repeated arms");
  }
  if (sorted.front() < 0 || sorted.back() >= n) {
    throw InvalidArgument("subset arm out of range");
  }
}

double log_prob_partial_ranking(const UtilityVector& utilities, const ArmSet& subset,
                                const Ranking& ranking) {
  check_subset(subset, utilities.size());
  check_ranking_on(ranking, subset);
  const auto& order = ranking.ordering();
  std::vector<double> tail(order.size());
  for (std::size_t p = 0; p < order.size(); ++p) tail[p] = utilities.log_value(order[p]);
  double lp = 0.0;
  for (std::size_t p = 0; p < order.size(); ++p) {
    lp += tail[p] - log_sum_exp(std::span<const double>(tail).subspan(p));
  }
  return lp;
}

double prob_partial_ranking(const UtilityVector& utilities, const ArmSet& subset,
                            const Ranking& ranking) {
  return std::exp(log_prob_partial_ranking(utilities, subset, ranking));
}

double prob_full_ranking(const UtilityVector& utilities, const Ranking& ranking) {
  if (static_cast<int>(ranking.size()) != utilities.size()) {
    throw InvalidArgument("full ranking must cover all arms");
  }
  ArmSet all(static_cast<std::size_t>(utilities.size()));
  std::iota(all.begin(), all.end(), 0);
  return prob_partial_ranking(utilities, all, ranking);
}

double prob_top_rank(const UtilityVector& utilities, const ArmSet& subset, int arm) {
  check_subset(subset, utilities.size());
  if (std::find(subset.begin(), subset.end(), arm) == subset.end()) {
    throw InvalidArgument("arm " + std::to_string(arm) + " is not in the subset");
  }
  std::vector<double> logs;
  logs.reserve(subset.size());
  for (int j : subset) logs.push_back(utilities.log_value(j));
  return std::exp(utilities.log_value(arm) - log_sum_exp(logs));
}

Ranking sample_partial_ranking(const UtilityVector& utilities, const ArmSet& subset, Rng& rng) {
  check_subset(subset, utilities.size());
  std::vector<int> remaining(subset);
  std::vector<int> ordering;
  ordering.reserve(subset.size());
  std::vector<double> logs;
  while (remaining.size() > 1) {
    logs.clear();
    for (int j : remaining) logs.push_back(utilities.log_value(j));
    const std::size_t pick = categorical_from_logs(logs, rng);
    ordering.push_back(remaining[pick]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  ordering.push_back(remaining.front());
  return Ranking::from_ordering(std::move(ordering));
}

int sample_winner(const UtilityVector& utilities, const ArmSet& subset, Rng& rng) {
  check_subset(subset, utilities.size());
  if (subset.size() == 1) return subset.front();
  std::vector<double> logs;
  logs.reserve(subset.size());
  for (int j : subset) logs.push_back(utilities.log_value(j));
  return subset[categorical_from_logs(logs, rng)];
}

}  // namespace cppl
