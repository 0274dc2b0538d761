#ifndef RHT_FAMILIES_HPP
#define RHT_FAMILIES_HPP

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rht/pmf.hpp"
#include "rht/renyi.hpp"
#include "rht/xreal.hpp"

namespace rht {

// Composite alternative-hypothesis family against a null joint distribution.
//
// Variants and their (open) order-validity intervals:
//   Singleton              {Q}                                   (0, inf)
//   FixedMarginalProduct   {T_X x Q_Y}, axis 0 fixed             (0, inf)
//   GeneralProduct         k permutation-invariant free factors
//                          plus an optional unconstrained tail   (k/(k+1), inf)
//   MarkovRecovery         {P_XY x Q_{Z|Y}}, axes (X,Y,Z)        (0, inf)
//   MarkovAll              {Q_Y x Q_{X|Y} x Q_{Z|Y}}             (2/3, inf)
class FamilySpec {
 public:
  enum class Kind { kSingleton, kFixedMarginalProduct, kGeneralProduct, kMarkovRecovery, kMarkovAll };

  static FamilySpec singleton(JointPmf member);
  static FamilySpec fixed_marginal_product(Pmf fixed_axis0);
  static FamilySpec general_product(int free_factors, bool unconstrained_tail);
  static FamilySpec markov_recovery();
  static FamilySpec markov_all();

  Kind kind() const { return kind_; }
  const JointPmf& member() const;
  const Pmf& fixed_marginal() const;
  int free_factors() const { return free_factors_; }
  bool unconstrained_tail() const { return unconstrained_tail_; }

  // Open validity interval (a, b); b is +inf for every concrete family.
  double order_lower() const;
  double order_upper() const;
  // s = 1 is always admissible; otherwise s must lie in (a, b).
  bool order_valid(const RenyiOrder& s) const;
  void require_order(const RenyiOrder& s) const;

  // Shape/support compatibility with a given null distribution.
  void validate_against(const JointPmf& null_dist) const;

  std::string variant_name() const;

 private:
  explicit FamilySpec(Kind kind) : kind_(kind) {}
  Kind kind_;
  std::optional<JointPmf> member_;
  std::optional<Pmf> fixed_marginal_;
  int free_factors_ = 0;
  bool unconstrained_tail_ = false;
};

using FamilyFactor = std::variant<Pmf, Channel>;

struct MinimizerResult {
  // Headline value of the operation that produced the result. Equal to
  // `divergence` except for the conditional-entropy kinds, which report the
  // entropy form log|X| - D.
  XReal value = XReal::finite(0.0);
  // D_s(P || argmin) for the assembled argmin below.
  XReal divergence = XReal::finite(0.0);
  JointPmf argmin;
  std::vector<std::pair<std::string, FamilyFactor>> factors;
  int iterations = 0;
  bool converged = true;
  bool order_in_validity = true;
};

struct AltMinOptions {
  double tol = 1e-12;
  int max_sweeps = 10000;
};

// Exact minimization of D_s(P_XY || T_X x Q_Y) over Q_Y via the closed-form
// optimizer Qhat_Y(y) ~ P_Y(y) g_s(P_{X|Y=y} || T_X)^(1/s). s = 1 returns
// Qhat = P_Y with the Kullback-Leibler value.
MinimizerResult sibson_minimize(const JointPmf& p_xy, const Pmf& t_x, const RenyiOrder& s);

enum class MeasureKind {
  kMutualInfoFixedMarginals,   // D_s(P_XY || P_X x P_Y)
  kMutualInfoSibson,           // min_{Q_Y} D_s(P_XY || P_X x Q_Y)
  kCondEntropyFixedMarginal,   // log|X| - D_s(P_XY || U_X x P_Y)
  kCondEntropyArimoto,         // log|X| - min_{Q_Y} D_s(P_XY || U_X x Q_Y)
  kCondMutualInfoFixedAll,     // D_s(P_XYZ || P_Y x P_{X|Y} x P_{Z|Y})
  kCondMutualInfoRecovery,     // min_{Q_{Z|Y}} D_s(P_XYZ || P_XY x Q_{Z|Y})
};

MinimizerResult closed_form_measure(MeasureKind kind, const JointPmf& p, const RenyiOrder& s);

// Direct nested-sum evaluation of the recovery conditional mutual
// information; an independent code path from the per-y minimization above.
XReal cond_mutual_info_recovery_value(const JointPmf& p_xyz, const RenyiOrder& s);

// Gallager exponent function, normalized so that
// s/(s-1) * gallager_e0((s-1)/s, P_X, W) equals the Sibson mutual
// information of the joint P_X x W. Domain rho < 1.
double gallager_e0(double rho, const Pmf& p_x, const Channel& w);

// Block-coordinate descent for GeneralProduct families: every block update
// is the exact closed-form optimizer against the product of the remaining
// blocks (exponent 1/s).
MinimizerResult alt_min_product(const JointPmf& p, const FamilySpec& family, const RenyiOrder& s,
                                const AltMinOptions& options = {});

// Block-coordinate descent over (Q_Y, Q_{X|Y}, Q_{Z|Y}) for MarkovAll.
MinimizerResult alt_min_markov(const JointPmf& p_xyz, const RenyiOrder& s,
                               const AltMinOptions& options = {});

// D_s(P || family): dispatches to the exact or iterative minimizer that the
// family admits.
MinimizerResult family_divergence(const JointPmf& p, const FamilySpec& family, const RenyiOrder& s,
                                  const AltMinOptions& options = {});

}  // namespace rht

#endif
