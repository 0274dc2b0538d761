#include "rht/exponents.hpp"

#include <algorithm>
#include <cmath>

#include "rht/errors.hpp"
#include "rht/logsum.hpp"

namespace rht {

namespace {

constexpr double kEdgeEps = 1e-4;
constexpr double kBisectTol = 1e-10;
constexpr int kBisectMaxIter = 200;

double objective(const PhiCurve& curve, double s, double rate) {
  // ((s-1) R - phi(s)) / s, valid on both sides of 1
  return ((s - 1.0) * rate - curve.phi(s)) / s;
}

// Golden-section maximization of a unimodal function on [lo, hi].
template <typename F>
double golden_max(F f, double lo, double hi, int iters = 200) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - gr * (hi - lo);
  double d = lo + gr * (hi - lo);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters && hi - lo > 1e-13 * (1.0 + std::abs(lo) + std::abs(hi)); ++i) {
    if (fc > fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - gr * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + gr * (hi - lo);
      fd = f(d);
    }
  }
  return std::max(fc, fd);
}

}  // namespace

PhiCurve::PhiCurve(JointPmf null_dist, FamilySpec family, AltMinOptions options)
    : null_(std::move(null_dist)),
      family_(std::move(family)),
      options_(options),
      cache_(std::make_unique<Cache>()) {
  family_.validate_against(null_);
  auto kl = family_divergence(null_, family_, RenyiOrder::one(), options_);
  if (kl.divergence.is_infinite())
    throw SupportError("PhiCurve: the family cannot reproduce the support of the null");
  threshold_ = kl.divergence.value();
  variance_ = loglik_variance(null_.flatten(), kl.argmin.flatten());
  kl_min_ = std::make_shared<const MinimizerResult>(std::move(kl));
}

double PhiCurve::order_upper_clipped() const {
  return std::min(order_upper(), kOrderClip);
}

double PhiCurve::divergence(double s) const {
  RenyiOrder order = RenyiOrder::of(s);
  if (order.is_one()) return threshold_;
  family_.require_order(order);
  {
    std::lock_guard<std::mutex> lock(cache_->mutex);
    auto it = cache_->values.find(s);
    if (it != cache_->values.end()) return it->second;
  }
  MinimizerResult res = family_divergence(null_, family_, order, options_);
  if (res.divergence.is_infinite())
    throw SupportError("PhiCurve: infinite divergence inside the validity interval");
  double v = res.divergence.value();
  std::lock_guard<std::mutex> lock(cache_->mutex);
  cache_->values.emplace(s, v);
  return v;
}

double PhiCurve::phi(double s) const { return (s - 1.0) * divergence(s); }

double PhiCurve::phi_prime(double s) const {
  const double a = order_lower();
  const double b = order_upper();
  double dist = s - a;
  if (std::isfinite(b)) dist = std::min(dist, b - s);
  if (!(dist > 0.0)) throw OrderError("phi_prime: order outside the validity interval");
  double h = std::max(1e-5, 1e-4 * dist);
  h = std::min(h, 0.25 * dist);
  auto diff = [&](double step) { return (phi(s + step) - phi(s - step)) / (2.0 * step); };
  double d1 = diff(h);
  double d2 = diff(h / 2.0);
  return (4.0 * d2 - d1) / 3.0;  // one Richardson level
}

double psi(const PhiCurve& curve, double s) {
  return s * curve.phi_prime(s) - curve.phi(s);
}

double critical_rate(const PhiCurve& curve, double c) {
  const double a = curve.order_lower();
  const double b = curve.order_upper_clipped();
  if (c <= a) return psi(curve, a + kEdgeEps);
  if (c >= b) return psi(curve, b);
  return psi(curve, c);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double threshold_rate(const PhiCurve& curve) { return curve.threshold(); }

double second_order_alpha(const PhiCurve& curve, double r) {
  double v = curve.variance();
  if (!(v > 0.0))
    throw DegenerateError(
        "second_order_alpha: zero likelihood-ratio variance; the limit is a step function");
  return normal_cdf(r / std::sqrt(v));
}

double grid_sup_exponent(const PhiCurve& curve, double rate, bool error_side, int grid_points) {
  const double eps = 1e-7;
  double lo = error_side ? curve.order_lower() + eps : 1.0 + eps;
  double hi = error_side ? 1.0 - eps : curve.order_upper_clipped();
  if (!(hi > lo)) return 0.0;
  double best = 0.0;
  double best_s = lo;
  for (int i = 0; i <= grid_points; ++i) {
    double s = lo + (hi - lo) * i / grid_points;
    double v = objective(curve, s, rate);
    if (v > best) {
      best = v;
      best_s = s;
    }
  }
  // refine around the best grid point
  double span = (hi - lo) / grid_points;
  double rlo = std::max(lo, best_s - span);
  double rhi = std::min(hi, best_s + span);
  double refined = golden_max([&](double s) { return objective(curve, s, rate); }, rlo, rhi);
  return std::max(best, std::max(refined, 0.0));
}

namespace {

ExponentReport make_report(const PhiCurve& curve, double rate) {
  ExponentReport rep;
  rep.rate = rate;
  rep.threshold = curve.threshold();
  rep.variance = curve.variance();
  return rep;
}

// Bisection for psi(s) = R on [lo, hi]; psi is nondecreasing.
double bisect_psi(const PhiCurve& curve, double rate, double lo, double hi) {
  double flo = psi(curve, lo) - rate;
  double fhi = psi(curve, hi) - rate;
  if (flo > 0.0) return lo;
  if (fhi < 0.0) return hi;
  for (int i = 0; i < kBisectMaxIter; ++i) {
    double mid = 0.5 * (lo + hi);
    double fm = psi(curve, mid) - rate;
    if (std::abs(fm) <= kBisectTol) return mid;
    if (fm < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

ExponentReport error_exponent(const PhiCurve& curve, double rate) {
  if (rate < 0.0) throw OrderError("error_exponent: rate must be nonnegative");
  ExponentReport rep = make_report(curve, rate);
  if (rate >= rep.threshold) {
    rep.value = 0.0;
    rep.s_hat = 1.0;
    rep.equality_guaranteed = true;  // the Hoeffding bound is exactly zero here
    return rep;
  }
  const double a = curve.order_lower();
  const double lo = a + kEdgeEps;
  const double r_a = psi(curve, lo);
  if (rate > r_a) {
    double s_hat = bisect_psi(curve, rate, lo, 1.0 - 1e-9);
    rep.s_hat = s_hat;
    rep.value = std::max(0.0, (1.0 - s_hat) / s_hat * (curve.divergence(s_hat) - rate));
    rep.equality_guaranteed = true;
    return rep;
  }
  rep.value = grid_sup_exponent(curve, rate, /*error_side=*/true);
  rep.s_hat = a + kEdgeEps;
  rep.equality_guaranteed = false;  // below the critical rate only the lower bound is known
  return rep;
}

ExponentReport sc_exponent(const PhiCurve& curve, double rate) {
  if (rate < 0.0) throw OrderError("sc_exponent: rate must be nonnegative");
  ExponentReport rep = make_report(curve, rate);
  if (rate <= rep.threshold) {
    rep.value = 0.0;
    rep.s_hat = 1.0;
    rep.equality_guaranteed = true;
    return rep;
  }
  const double b = curve.order_upper_clipped();
  const double r_b = psi(curve, b);
  if (rate < r_b) {
    double s_hat = bisect_psi(curve, rate, 1.0 + 1e-9, b);
    rep.s_hat = s_hat;
    rep.value = std::max(0.0, (s_hat - 1.0) / s_hat * (rate - curve.divergence(s_hat)));
    rep.equality_guaranteed = true;
    return rep;
  }
  // beyond the (estimated) critical rate only the grid lower bound is safe
  rep.value = grid_sup_exponent(curve, rate, /*error_side=*/false);
  rep.s_hat = b;
  rep.equality_guaranteed = false;
  return rep;
}

}  // namespace rht
