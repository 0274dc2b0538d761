#ifndef RHT_SIMPLEX_LP_HPP
#define RHT_SIMPLEX_LP_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace rht {

struct LpResult {
  double objective = 0.0;
  std::vector<double> x;
  // indices of <=-rows that are tight at the optimum
  std::vector<std::size_t> tight_rows;
  bool optimal = false;
};

// Maximize c*x subject to A x <= b, 0 <= x <= upper, by a dense tableau
// simplex with Bland's anti-cycling rule. Requires b >= 0 so the all-slack
// basis is feasible; the problems built here always satisfy that.
LpResult solve_box_lp(const std::vector<std::vector<double>>& a, std::span<const double> b,
                      std::span<const double> c, std::span<const double> upper,
                      double feas_tol = 1e-10);

}  // namespace rht

#endif
