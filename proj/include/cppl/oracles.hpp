#pragma once

// Reference computations used to check the library: enumeration, finite
// differences, dense eigen-decompositions and Monte-Carlo samplers. They take
// plain values and avoid the library's own code paths.

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace cppl::oracle {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// All permutations of `items` in lexicographic order.
std::vector<std::vector<int>> permutations(std::vector<int> items);
// All k-subsets of [0, n) in lexicographic order.
std::vector<std::vector<int>> combinations(int n, int k);

// prod_i v[o_i] / sum_{j >= i} v[o_j], computed directly in linear space.
double pl_product(const std::vector<double>& v, const std::vector<int>& ordering);
// Sum of full-ranking probabilities over every ordering of [0, n) that
// places the members of `ordering` in the given relative order.
double linear_extension_sum(const std::vector<double>& v, const std::vector<int>& ordering);

// Direct formulas for the two log-likelihoods.
double loglik_ranking(const Vector& theta, const Matrix& x, const std::vector<int>& ordering);
double loglik_winner(const Vector& theta, const Matrix& x, const std::vector<int>& subset, int winner);

// Central differences.
Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& at, double h);
Matrix fd_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& at, double h);

// Largest eigenvalue of Sigma^1/2 M Sigma^1/2 with M = e^{2 x'theta} x x'.
double rank_one_operator_norm(const Matrix& sigma, const Vector& x, const Vector& theta);

// Lexicographically smallest k-subset maximizing the score sum; sums within
// a relative 1e-12 count as ties.
std::vector<int> best_subset_by_enumeration(const Vector& scores, int k);

// (v_best - max_S v) / v_best from plain utilities.
double regret_formula(const std::vector<double>& v, const std::vector<int>& subset);

// Monte-Carlo tail estimate: fraction of draws >= threshold and its standard error.
struct TailEstimate {
  double p;
  double se;
};
TailEstimate f_tail_mc(int d1, int d2, double threshold, long draws, std::uint64_t seed);
TailEstimate chi2_upper_tail_mc(int d, double x, long draws, std::uint64_t seed);
TailEstimate chi2_two_sided_mc(int d, double x, long draws, std::uint64_t seed);

// ||a - b||_2 / max(||b||_2, 1e-6).
double relative_error(const Matrix& a, const Matrix& b);

// Sample mean and standard error of the mean.
std::pair<double, double> mean_and_stderr(const std::vector<double>& xs);

}  // namespace cppl::oracle
