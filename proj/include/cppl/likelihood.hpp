#pragma once

// Log-likelihood of one (feedback, subset, context) observation under the
// contextual PL model, with analytic gradient and Hessian.

#include <variant>

#include "cppl/pl_core.hpp"

namespace cppl {

enum class FeedbackMode { kWinner, kRanking };

struct Winner {
  int arm;
  friend bool operator==(const Winner&, const Winner&) = default;
};

using Feedback = std::variant<Winner, Ranking>;

FeedbackMode mode_of(const Feedback& feedback);

struct Observation {
  Feedback feedback;
  ArmSet subset;
  ContextMatrix context;
};

// Throws InvalidArgument if the winner is outside the subset, the ranking
// domain differs from it, or the subset is malformed for the context.
void validate(const Observation& obs);

double loglik(const Vector& theta, const Observation& obs);
Vector grad_loglik(const Vector& theta, const Observation& obs);
Matrix hessian_loglik(const Vector& theta, const Observation& obs);

struct LikelihoodDerivatives {
  Vector gradient;
  Matrix hessian;
};

// Gradient and Hessian in one pass over the stages.
LikelihoodDerivatives loglik_derivatives(const Vector& theta, const Observation& obs);

}  // namespace cppl
