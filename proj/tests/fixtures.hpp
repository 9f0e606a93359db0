#pragma once

#include <cmath>
#include <vector>

#include "cppl/pl_core.hpp"

namespace cppl::testing {

// Six raw feature columns over 200 rows, t = i / 199:
//   c0 = t          c1 = 5 (constant)       c2 = 2t (scales to exactly c0)
//   c3 = [i == 0]   c4 = sin(3t)            c5 = t^2
// Trace: c1 (variance 0) and c3 (variance 0.004975) fail the variance
// filter. corr(c0, c2) = 1 and both tie on mean |corr| to the rest, so the
// later one, c2, goes. Next corr(c0, c5) = 0.968; c0 is closer to c4 (0.167
// vs 0.085), so c0 goes. corr(c4, c5) = 0.085 stops the loop.
inline Matrix preprocessing_fixture() {
  const int rows = 200;
  Matrix m(rows, 6);
  for (int i = 0; i < rows; ++i) {
    const double t = i / 199.0;
    m(i, 0) = t;
    m(i, 1) = 5.0;
    m(i, 2) = 2.0 * t;
    m(i, 3) = i == 0 ? 1.0 : 0.0;
    m(i, 4) = std::sin(3.0 * t);
    m(i, 5) = t * t;
  }
  return m;
}

inline const std::vector<int> kPreprocessingFixtureKept{4, 5};

inline double population_variance(const Vector& v) {
  return (v.array() - v.mean()).square().mean();
}

inline double abs_correlation(const Vector& a, const Vector& b) {
  const Vector ca = a.array() - a.mean();
  const Vector cb = b.array() - b.mean();
  return std::abs(ca.dot(cb)) / (ca.norm() * cb.norm());
}

}  // namespace cppl::testing
