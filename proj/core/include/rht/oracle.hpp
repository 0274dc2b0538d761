#ifndef RHT_ORACLE_HPP
#define RHT_ORACLE_HPP

#include <span>
#include <vector>

#include "rht/families.hpp"
#include "rht/pmf.hpp"
#include "rht/types_method.hpp"

namespace rht {

// Exact finite-n optimum of the type-I error under a type-II budget.
// The budget is passed in the log domain so exp(-nR) survives large n.
struct OracleResult {
  double alpha = 0.0;
  double log_alpha = 0.0;
  double log_complement = 0.0;  // log(1 - alpha)
  PerTypeTest test;
  // composite case: grid members whose beta constraint is tight
  std::vector<std::size_t> binding_members;
};

// Neyman-Pearson over type classes for a simple alternative: accept classes
// in descending likelihood-ratio order, randomizing exactly one boundary
// class (the first at the critical ratio in lexicographic count order).
OracleResult np_simple(const JointPmf& p, const JointPmf& q, int n, double log_mu,
                       std::size_t cap = kDefaultTypeCap);
OracleResult np_simple(const Pmf& p, const Pmf& q, int n, double log_mu,
                       std::size_t cap = kDefaultTypeCap);

// Linear program over per-type tests with one beta constraint per grid
// member: a certified lower bound on the composite optimum (exact when the
// grid contains every binding member).
OracleResult composite_lp(const JointPmf& p, const FamilySpec& family, int n, double log_mu,
                          std::span<const JointPmf> members, std::size_t cap = kDefaultTypeCap);

// Simplex-lattice grids over the family's free factors, always including
// the null's own projection onto the family.
std::vector<JointPmf> family_member_grid(const JointPmf& p, const FamilySpec& family,
                                         int points_per_axis);

struct FitPoint {
  int n = 0;
  double log_alpha = 0.0;
  double log_complement = 0.0;
};

enum class FitMode { kErrorExponent, kStrongConverse };

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double log_n_coeff = 0.0;
  double residual_rms = 0.0;
  int points_used = 0;
};

// Least-squares fit of -log alpha (or -log(1-alpha)) against n, optionally
// with a log n regressor absorbing the polynomial prefactor. Points with
// alpha in {0,1} are excluded; fewer than three usable points is an error.
FitResult exponent_fit(std::span<const FitPoint> points, FitMode mode, bool include_log_n = true);

// Convenience overload taking plain (n, alpha) pairs.
FitResult exponent_fit(std::span<const std::pair<int, double>> points, FitMode mode,
                       bool include_log_n = true);

}  // namespace rht

#endif
