#ifndef RHT_RENYI_HPP
#define RHT_RENYI_HPP

#include <span>

#include "rht/pmf.hpp"
#include "rht/xreal.hpp"

namespace rht {

// Divergence order s in [0, +inf]. The limit cases 0, 1 and +inf are tagged
// states; construction snaps |s-1| < 1e-9 to the s=1 branch so the (s-1)
// denominators are never evaluated near one.
class RenyiOrder {
 public:
  enum class Tag { kZero, kOne, kInfinity, kGeneral };

  static RenyiOrder of(double s);
  static RenyiOrder zero() { return RenyiOrder(Tag::kZero, 0.0); }
  static RenyiOrder one() { return RenyiOrder(Tag::kOne, 1.0); }
  static RenyiOrder infinity() { return RenyiOrder(Tag::kInfinity, 0.0); }

  Tag tag() const { return tag_; }
  bool is_zero() const { return tag_ == Tag::kZero; }
  bool is_one() const { return tag_ == Tag::kOne; }
  bool is_infinity() const { return tag_ == Tag::kInfinity; }
  bool is_general() const { return tag_ == Tag::kGeneral; }
  // The numeric order; throws for the +inf tag.
  double value() const;

 private:
  RenyiOrder(Tag tag, double v) : tag_(tag), value_(v) {}
  Tag tag_;
  double value_;
};

// Power sum sum_{x: P(x)>0} P(x)^s Q(x)^(1-s) for s in (0,1) u (1,inf).
// Q is any nonnegative function on the alphabet of P (not necessarily
// normalized). Returns +inf when s > 1 and Q vanishes somewhere on supp P.
XReal g_s(const Pmf& p, std::span<const double> q, const RenyiOrder& s);

// log g_s as a raw double (+inf on support violation for s > 1, -inf when
// the sum vanishes for s < 1). Building block for the log-domain paths.
double log_g_s(const Pmf& p, std::span<const double> q, const RenyiOrder& s);
double log_g_s(std::span<const double> p, std::span<const double> q, double s);

// Renyi divergence of order s, all limits included. Result in nats.
XReal renyi_divergence(const Pmf& p, std::span<const double> q, const RenyiOrder& s);
XReal renyi_divergence(const Pmf& p, const Pmf& q, const RenyiOrder& s);
XReal renyi_divergence(const JointPmf& p, const JointPmf& q, const RenyiOrder& s);

// Kullback-Leibler divergence (the s=1 branch), in nats.
XReal kl_divergence(const Pmf& p, std::span<const double> q);

// Variance of the logarithmic likelihood ratio under P. Requires
// supp P within supp Q.
double loglik_variance(const Pmf& p, const Pmf& q);
double loglik_variance(const JointPmf& p, const JointPmf& q);

}  // namespace rht

#endif
