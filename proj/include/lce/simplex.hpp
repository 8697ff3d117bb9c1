#pragma once

#include <cmath>
#include <vector>

#include "lce/base.hpp"

namespace lce {

// Dense tableau simplex for packing LPs: max c^T x s.t. A x <= b, x >= 0,
// with b >= 0 so the slack basis is feasible. Bland's rule; long double
// arithmetic. Small instances only (the brute-force LP oracles).
inline double simplex_max(const std::vector<std::vector<double>>& a,
                          const std::vector<double>& b, const std::vector<double>& c,
                          std::vector<double>* solution = nullptr) {
  const std::size_t m = a.size();
  const std::size_t n = c.size();
  for (double bi : b) require(bi >= -1e-12, "SimplexForm", "needs b >= 0");
  std::vector<std::vector<long double>> t(m + 1, std::vector<long double>(n + m + 1, 0.0L));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) t[i][j] = a[i][j];
    t[i][n + i] = 1.0L;
    t[i][n + m] = b[i];
  }
  for (std::size_t j = 0; j < n; ++j) t[m][j] = -c[j];
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) basis[i] = n + i;

  const long double eps = 1e-11L;
  for (long iter = 0; iter < 200000; ++iter) {
    std::size_t pivot_col = n + m;
    for (std::size_t j = 0; j < n + m; ++j)
      if (t[m][j] < -eps) {
        pivot_col = j;
        break;  // Bland
      }
    if (pivot_col == n + m) break;  // optimal
    std::size_t pivot_row = m;
    long double best = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (t[i][pivot_col] <= eps) continue;
      long double ratio = t[i][n + m] / t[i][pivot_col];
      if (pivot_row == m || ratio < best - eps ||
          (ratio < best + eps && basis[i] < basis[pivot_row])) {
        pivot_row = i;
        best = ratio;
      }
    }
    require(pivot_row != m, "SimplexUnbounded", "packing LP cannot be unbounded");
    long double pv = t[pivot_row][pivot_col];
    for (auto& x : t[pivot_row]) x /= pv;
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == pivot_row) continue;
      long double f = t[i][pivot_col];
      if (std::fabs(double(f)) < 1e-15) continue;
      for (std::size_t j = 0; j <= n + m; ++j) t[i][j] -= f * t[pivot_row][j];
    }
    basis[pivot_row] = pivot_col;
  }
  if (solution) {
    solution->assign(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      if (basis[i] < n) (*solution)[basis[i]] = double(t[i][n + m]);
  }
  return double(t[m][n + m]);
}

}  // namespace lce
