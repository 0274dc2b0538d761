#ifndef RHT_EXPONENTS_HPP
#define RHT_EXPONENTS_HPP

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "rht/families.hpp"
#include "rht/pmf.hpp"

namespace rht {

// phi(s) = (s-1) D_s(P || family) with a synchronized evaluation cache.
// Threshold, variance and the s=1 minimizer are computed eagerly so a
// constructed curve can be shared across threads.
class PhiCurve {
 public:
  // Orders are clipped to this value when the validity interval is unbounded.
  static constexpr double kOrderClip = 64.0;

  PhiCurve(JointPmf null_dist, FamilySpec family, AltMinOptions options = {});

  const JointPmf& null_dist() const { return null_; }
  const FamilySpec& family() const { return family_; }
  double order_lower() const { return family_.order_lower(); }
  double order_upper() const { return family_.order_upper(); }
  double order_upper_clipped() const;

  // D_s(P || family); throws OrderError outside the validity interval and
  // SupportError if the divergence is infinite (cannot happen for valid
  // full-support inputs).
  double divergence(double s) const;
  double phi(double s) const;
  // Central difference with one level of Richardson extrapolation.
  double phi_prime(double s) const;

  double threshold() const { return threshold_; }
  double variance() const { return variance_; }
  const MinimizerResult& kl_minimizer() const { return *kl_min_; }

 private:
  struct Cache {
    std::mutex mutex;
    std::map<double, double> values;  // s -> D_s
  };

  JointPmf null_;
  FamilySpec family_;
  AltMinOptions options_;
  std::shared_ptr<const MinimizerResult> kl_min_;
  double threshold_;
  double variance_;
  std::unique_ptr<Cache> cache_;
};

// psi(s) = s phi'(s) - phi(s); continuous and nondecreasing on the validity
// interval.
double psi(const PhiCurve& curve, double s);

// Limit of psi at c, by one-sided evaluation at the interval endpoints
// (epsilon = 1e-4 at the lower end, clip at 64 for an unbounded upper end,
// where the result is a lower estimate).
double critical_rate(const PhiCurve& curve, double c);

struct SecondOrderSample {
  double r;
  double alpha;
};

struct ExponentReport {
  double rate = 0.0;
  double value = 0.0;
  double s_hat = 1.0;
  // True when the rate falls in the critical-rate window where the value
  // is the exact exponent, not only a one-sided bound.
  bool equality_guaranteed = false;
  double threshold = 0.0;
  double variance = 0.0;
  std::vector<SecondOrderSample> second_order;
};

// Hoeffding error exponent at rate R: sup over s in (a,1) of
// (1-s)/s (D_s - R), solved through psi(s) = R when R > R_a.
ExponentReport error_exponent(const PhiCurve& curve, double rate);

// Han-Kobayashi strong converse exponent at rate R: sup over s in (1,b) of
// (s-1)/s (R - D_s).
ExponentReport sc_exponent(const PhiCurve& curve, double rate);

// Limit of the optimal type-I error when the type-II budget decays as
// exp(-n D - sqrt(n) r): the normal CDF at r / sqrt(V).
double second_order_alpha(const PhiCurve& curve, double r);

double threshold_rate(const PhiCurve& curve);

// Standard normal CDF via the complementary error function.
double normal_cdf(double x);

// Direct golden-section maximization of the exponent objective on a dense
// bracket; cross-check for the psi-bisection path.
double grid_sup_exponent(const PhiCurve& curve, double rate, bool error_side,
                         int grid_points = 512);

}  // namespace rht

#endif
