#pragma once

// Plackett-Luce model: rankings, ranking/top-rank probabilities, contextual
// utilities and exact samplers. Arms are 0-based throughout.

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "cppl/rng.hpp"

namespace cppl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using ArmSet = std::vector<int>;

// A bijection from a set of arms S onto positions 1..|S|.
//
// Stored as the sorted member list plus a parallel array of positions, so the
// rank of any member is an O(log |S|) lookup and the bijection is checked once
// at construction. The induced ordering (position -> arm) is kept alongside.
class Ranking {
 public:
  // ordering[p] is the arm placed at position p + 1.
  static Ranking from_ordering(std::vector<int> ordering);
  // positions[j] (1-based) is the rank of members[j].
  static Ranking from_ranks(std::vector<int> members, std::vector<int> positions);

  std::size_t size() const { return members_.size(); }
  const std::vector<int>& members() const { return members_; }
  const std::vector<int>& positions() const { return positions_; }
  const std::vector<int>& ordering() const { return ordering_; }
  int arm_at(int position) const { return ordering_.at(position - 1); }
  int rank_of(int arm) const;
  bool contains(int arm) const;

  friend bool operator==(const Ranking&, const Ranking&) = default;

 private:
  Ranking() = default;
  std::vector<int> members_;
  std::vector<int> positions_;
  std::vector<int> ordering_;
};

// d x n block of joint feature vectors; column i belongs to arm i.
class ContextMatrix {
 public:
  ContextMatrix(Matrix columns, int round = 1);

  int dim() const { return static_cast<int>(columns_.rows()); }
  int arms() const { return static_cast<int>(columns_.cols()); }
  int round() const { return round_; }
  const Matrix& matrix() const { return columns_; }
  auto column(int i) const { return columns_.col(i); }

 private:
  Matrix columns_;
  int round_;
};

// Positive PL weights, held as natural logarithms so that large logits stay
// representable; value(i) = exp(log_value(i)).
class UtilityVector {
 public:
  static UtilityVector from_values(const Vector& values);
  static UtilityVector from_logs(Vector logs);

  int size() const { return static_cast<int>(logs_.size()); }
  double value(int i) const;
  double log_value(int i) const { return logs_(i); }
  const Vector& logs() const { return logs_; }
  Vector values() const;

 private:
  explicit UtilityVector(Vector logs) : logs_(std::move(logs)) {}
  Vector logs_;
};

// log(sum(exp(xs))) with the maximum factored out.
double log_sum_exp(std::span<const double> xs);

// v_i = exp(theta' x_i).
UtilityVector contextual_utilities(const Vector& theta, const ContextMatrix& context);

double log_prob_partial_ranking(const UtilityVector& utilities, const ArmSet& subset,
                                const Ranking& ranking);
double prob_partial_ranking(const UtilityVector& utilities, const ArmSet& subset,
                            const Ranking& ranking);
// Ranking must cover all n arms.
double prob_full_ranking(const UtilityVector& utilities, const Ranking& ranking);
double prob_top_rank(const UtilityVector& utilities, const ArmSet& subset, int arm);

// Sequential categorical selection without replacement; realizes the PL
// marginal on `subset` exactly.
Ranking sample_partial_ranking(const UtilityVector& utilities, const ArmSet& subset, Rng& rng);
int sample_winner(const UtilityVector& utilities, const ArmSet& subset, Rng& rng);

// Throws InvalidArgument unless `subset` is nonempty, duplicate-free and
// inside [0, n).
void check_subset(const ArmSet& subset, int n);

}  // namespace cppl
