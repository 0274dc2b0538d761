#include "rht/simplex_lp.hpp"

#include <cmath>
#include <limits>

#include "rht/errors.hpp"

namespace rht {

LpResult solve_box_lp(const std::vector<std::vector<double>>& a, std::span<const double> b,
                      std::span<const double> c, std::span<const double> upper,
                      double feas_tol) {
  const std::size_t m0 = a.size();
  const std::size_t n = c.size();
  for (const auto& row : a)
    if (row.size() != n) throw StructuralError("solve_box_lp: ragged constraint matrix");
  if (b.size() != m0 || upper.size() != n)
    throw StructuralError("solve_box_lp: dimension mismatch");
  for (double bv : b)
    if (bv < 0.0) throw StructuralError("solve_box_lp: negative right hand side");

  // upper bounds become plain rows; every slack then starts basic
  const std::size_t m = m0 + n;
  const std::size_t cols = n + m + 1;
  std::vector<std::vector<double>> t(m + 1, std::vector<double>(cols, 0.0));
  for (std::size_t i = 0; i < m0; ++i) {
    for (std::size_t j = 0; j < n; ++j) t[i][j] = a[i][j];
    t[i][n + i] = 1.0;
    t[i][cols - 1] = b[i];
  }
  for (std::size_t j = 0; j < n; ++j) {
    t[m0 + j][j] = 1.0;
    t[m0 + j][n + m0 + j] = 1.0;
    t[m0 + j][cols - 1] = upper[j];
  }
  for (std::size_t j = 0; j < n; ++j) t[m][j] = -c[j];

  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) basis[i] = n + i;

  const std::size_t max_pivots = 50 * (m + n) + 10000;
  for (std::size_t pivots = 0;; ++pivots) {
    if (pivots > max_pivots) throw Error("solve_box_lp: pivot limit exceeded");
    // Bland: entering variable = smallest index with negative reduced cost
    std::size_t enter = cols;
    for (std::size_t j = 0; j + 1 < cols; ++j) {
      if (t[m][j] < -feas_tol) {
        enter = j;
        break;
      }
    }
    if (enter == cols) break;  // optimal
    // leaving row: minimum ratio, ties by smallest basic variable index
    std::size_t leave = m;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      if (t[i][enter] <= feas_tol) continue;
      double ratio = t[i][cols - 1] / t[i][enter];
      if (ratio < best_ratio - 1e-15 ||
          (std::abs(ratio - best_ratio) <= 1e-15 && (leave == m || basis[i] < basis[leave]))) {
        best_ratio = ratio;
        leave = i;
      }
    }
    if (leave == m) throw Error("solve_box_lp: unbounded (cannot happen with box constraints)");
    // pivot
    double piv = t[leave][enter];
    for (std::size_t j = 0; j < cols; ++j) t[leave][j] /= piv;
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == leave) continue;
      double f = t[i][enter];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < cols; ++j) t[i][j] -= f * t[leave][j];
    }
    basis[leave] = enter;
  }

  LpResult res;
  res.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] < n) res.x[basis[i]] = t[i][cols - 1];
  res.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) res.objective += c[j] * res.x[j];
  for (std::size_t i = 0; i < m0; ++i) {
    double lhs = 0.0;
    for (std::size_t j = 0; j < n; ++j) lhs += a[i][j] * res.x[j];
    if (lhs >= b[i] - 1e-8 * (1.0 + std::abs(b[i]))) res.tight_rows.push_back(i);
  }
  res.optimal = true;
  return res;
}

}  // namespace rht
