#include "cppl/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cppl/errors.hpp"

namespace cppl {

namespace {

// One sequential-choice stage: `chosen` is picked out of `pool`.
struct Stage {
  int chosen;
  std::span<const int> pool;
};

// Winner feedback is a single stage over S; a ranking contributes one stage per
// position, the last of which has a single-arm pool.
template <typename Fn>
void for_each_stage(const Observation& obs, Fn&& fn) {
  if (const auto* w = std::get_if<Winner>(&obs.feedback)) {
    fn(Stage{w->arm, std::span<const int>(obs.subset)});
    return;
  }
  const auto& order = std::get<Ranking>(obs.feedback).ordering();
  std::span<const int> all(order);
  for (std::size_t p = 0; p < order.size(); ++p) fn(Stage{order[p], all.subspan(p)});
}

void check_dims(const Vector& theta, const Observation& obs) {
  if (theta.size() != obs.context.dim()) {
    throw InvalidArgument("theta has dimension " + std::to_string(theta.size()) +
                          ", observation context has " + std::to_string(obs.context.dim()));
  }
}

// a_i / b_i and c_i / b_i for one stage, using weights exp(theta'x - m) with m
// the stage's largest logit.
struct StageMoments {
  Vector mean;   // a / b
  Matrix second; // c / b
};

StageMoments stage_moments(const Vector& logits, const Matrix& x, std::span<const int> pool,
                           bool with_second) {
  double m = logits(pool.front());
  for (int l : pool) m = std::max(m, logits(l));
  const Eigen::Index d = x.rows();
  Vector a = Vector::Zero(d);
  Matrix c;
  if (with_second) c = Matrix::Zero(d, d);
  double b = 0.0;
  for (int l : pool) {
    const double w = std::exp(logits(l) - m);
    b += w;
    a.noalias() += w * x.col(l);
    if (with_second) c.selfadjointView<Eigen::Lower>().rankUpdate(x.col(l), w);
  }
  StageMoments out{a / b, Matrix()};
  if (with_second) {
    c.triangularView<Eigen::StrictlyUpper>() = c.transpose();
    out.second = c / b;
  }
  return out;
}

}  // namespace

FeedbackMode mode_of(const Feedback& feedback) {
  return std::holds_alternative<Winner>(feedback) ? FeedbackMode::kWinner : FeedbackMode::kRanking;
}

void validate(const Observation& obs) {
  check_subset(obs.subset, obs.context.arms());
  if (const auto* w = std::get_if<Winner>(&obs.feedback)) {
    if (std::find(obs.subset.begin(), obs.subset.end(), w->arm) == obs.subset.end()) {
      throw InvalidArgument("winner " + std::to_string(w->arm) + " is not in the subset");
    }
    return;
  }
  ArmSet sorted(obs.subset);
  std::sort(sorted.begin(), sorted.end());
  if (std::get<Ranking>(obs.feedback).members() != sorted) {
    throw InvalidArgument("ranking domain differs from the subset");
  }
}

double loglik(const Vector& theta, const Observation& obs) {
  check_dims(theta, obs);
  validate(obs);
  const Vector logits = obs.context.matrix().transpose() * theta;
  double total = 0.0;
  std::vector<double> buf;
  for_each_stage(obs, [&](const Stage& s) {
    buf.clear();
    for (int l : s.pool) buf.push_back(logits(l));
    total += logits(s.chosen) - log_sum_exp(buf);
  });
  return total;
}

Vector grad_loglik(const Vector& theta, const Observation& obs) {
  check_dims(theta, obs);
  validate(obs);
  const Matrix& x = obs.context.matrix();
  const Vector logits = x.transpose() * theta;
  Vector g = Vector::Zero(theta.size());
  for_each_stage(obs, [&](const Stage& s) {
    g += x.col(s.chosen) - stage_moments(logits, x, s.pool, false).mean;
  });
  return g;
}

Matrix hessian_loglik(const Vector& theta, const Observation& obs) {
  return loglik_derivatives(theta, obs).hessian;
}

LikelihoodDerivatives loglik_derivatives(const Vector& theta, const Observation& obs) {
  check_dims(theta, obs);
  validate(obs);
  const Matrix& x = obs.context.matrix();
  const Vector logits = x.transpose() * theta;
  const Eigen::Index d = theta.size();
  LikelihoodDerivatives out{Vector::Zero(d), Matrix::Zero(d, d)};
  for_each_stage(obs, [&](const Stage& s) {
    const StageMoments mom = stage_moments(logits, x, s.pool, true);
    out.gradient += x.col(s.chosen) - mom.mean;
    out.hessian += mom.mean * mom.mean.transpose() - mom.second;
  });
  // The stage terms are symmetric up to rounding; make it exact.
  out.hessian = 0.5 * (out.hessian + out.hessian.transpose()).eval();
  return out;
}

}  // namespace cppl
