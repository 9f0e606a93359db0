#include "cppl/verify.hpp"

#include <cmath>
#include <sstream>

#include "cppl/estimator.hpp"
#include "cppl/oracles.hpp"
#include "cppl/policies.hpp"

namespace cppl {

namespace {

Matrix random_matrix(int rows, int cols, Rng& rng, double lo, double hi) {
  Matrix m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = rng.uniform(lo, hi);
  return m;
}

Vector random_vector(int n, Rng& rng, double lo, double hi) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.uniform(lo, hi);
  return v;
}

CheckResult check(std::string name, bool ok, double worst) {
  std::ostringstream os;
  os << "worst=" << worst;
  return {std::move(name), ok, os.str()};
}

CheckResult pl_normalization(Rng& rng) {
  double worst = 0.0;
  for (int n = 1; n <= 5; ++n) {
    const Vector v = random_vector(n, rng, 0.1, 3.0);
    const auto u = UtilityVector::from_values(v);
    std::vector<int> all(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
    double total = 0.0;
    for (const auto& perm : oracle::permutations(all)) {
      total += prob_full_ranking(u, Ranking::from_ordering(perm));
    }
    worst = std::max(worst, std::abs(total - 1.0));
  }
  return check("pl: full-ranking probabilities sum to 1", worst < 1e-12, worst);
}

CheckResult gradient_fd(Rng& rng, FeedbackMode mode) {
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const int d = 1 + static_cast<int>(rng.index(6));
    const int n = 6;
    const int m = 1 + static_cast<int>(rng.index(5));
    const ArmSet subset = random_subset(n, m == n ? n - 1 : m, rng);
    ContextMatrix ctx(random_matrix(d, n, rng, -1.0, 1.0));
    Feedback fb = mode == FeedbackMode::kWinner
                      ? Feedback(Winner{subset[rng.index(subset.size())]})
                      : Feedback(sample_partial_ranking(UtilityVector::from_logs(Vector::Zero(n)),
                                                        subset, rng));
    Observation obs{fb, subset, ctx};
    const Vector theta = random_vector(d, rng, -1.0, 1.0);
    const Vector fd = oracle::fd_gradient([&](const Vector& th) { return loglik(th, obs); }, theta, 1e-5);
    worst = std::max(worst, oracle::relative_error(grad_loglik(theta, obs), fd));
  }
  return check(std::string("likelihood: gradient vs finite differences (") +
                   (mode == FeedbackMode::kWinner ? "winner" : "ranking") + ")",
               worst < 1e-5, worst);
}

CheckResult rank_one_identity(Rng& rng) {
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const int d = 4;
    const Matrix a = random_matrix(d, d, rng, -1.0, 1.0);
    const Matrix sigma = a * a.transpose();
    EstimatorState s = make_estimator(random_vector(d, rng, 0.0, 1.0));
    s.t = 10;
    ContextMatrix ctx(random_matrix(d, 6, rng, 0.0, 1.0));
    const ConfidenceWidths cw = confidence_widths(s, sigma, ctx, 1.0);
    const double radius = 2.0 * std::log(10.0) + d + 2.0 * std::sqrt(d * std::log(10.0));
    for (int i = 0; i < 6; ++i) {
      const double info = oracle::rank_one_operator_norm(sigma, ctx.column(i), s.theta_bar);
      const double expected = std::sqrt(radius * info);
      worst = std::max(worst, std::abs(cw.widths(i) - expected) / expected);
    }
  }
  return check("estimator: rank-one width equals eigen operator norm", worst < 1e-8, worst);
}

CheckResult top_k_enumeration(Rng& rng) {
  int mismatches = 0;
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 2 + static_cast<int>(rng.index(9));
    const int k = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(n - 1)));
    const Vector scores = random_vector(n, rng, 0.0, 1.0);
    if (top_k(scores, k) != oracle::best_subset_by_enumeration(scores, k)) ++mismatches;
  }
  return check("policies: top-k equals subset enumeration", mismatches == 0, mismatches);
}

}  // namespace

std::vector<CheckResult> run_verification(std::uint64_t seed) {
  Rng rng = Rng::derive({seed, 0x7e51});
  std::vector<CheckResult> out;
  out.push_back(pl_normalization(rng));
  out.push_back(gradient_fd(rng, FeedbackMode::kWinner));
  out.push_back(gradient_fd(rng, FeedbackMode::kRanking));
  out.push_back(rank_one_identity(rng));
  out.push_back(top_k_enumeration(rng));
  return out;
}

}  // namespace cppl
