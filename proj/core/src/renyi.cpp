#include "rht/renyi.hpp"

#include <cmath>
#include <sstream>

#include "rht/errors.hpp"
#include "rht/logsum.hpp"

namespace rht {

namespace {

void check_q(std::span<const double> q) {
  for (double v : q)
    if (!(v >= 0.0)) throw StructuralError("Q must be a nonnegative function");
}

void check_same_alphabet(std::size_t p, std::size_t q) {
  if (p != q) {
    std::ostringstream os;
    os << "alphabet mismatch: |P| = " << p << ", |Q| = " << q;
    throw StructuralError(os.str());
  }
}

}  // namespace

RenyiOrder RenyiOrder::of(double s) {
  if (!(s >= 0.0)) throw OrderError("Renyi order must be nonnegative");
  if (std::isinf(s)) return infinity();
  if (s == 0.0) return zero();
  if (std::abs(s - 1.0) < 1e-9) return one();
  return RenyiOrder(Tag::kGeneral, s);
}

double RenyiOrder::value() const {
  if (tag_ == Tag::kInfinity) throw OrderError("RenyiOrder::value: order is +infinity");
  return value_;
}

double log_g_s(std::span<const double> p, std::span<const double> q, double s) {
  // log-sum-exp over the support of P; terms are s*log P + (1-s)*log Q.
  double m = kNegInf;
  std::size_t terms = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) {
      if (s > 1.0) return kPosInf;  // support violation
      continue;                     // the limit drops the term for s < 1
    }
    double t = s * std::log(p[i]) + (1.0 - s) * std::log(q[i]);
    m = std::max(m, t);
    ++terms;
  }
  if (terms == 0) return kNegInf;  // disjoint supports, g = 0
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0 && s < 1.0) continue;
    sum += std::exp(s * std::log(p[i]) + (1.0 - s) * std::log(q[i]) - m);
  }
  return m + std::log(sum);
}

double log_g_s(const Pmf& p, std::span<const double> q, const RenyiOrder& s) {
  check_same_alphabet(p.size(), q.size());
  check_q(q);
  if (!s.is_general())
    throw OrderError("g_s is defined for s in (0,1) u (1,inf); use renyi_divergence for limits");
  return log_g_s(p.probs(), q, s.value());
}

XReal g_s(const Pmf& p, std::span<const double> q, const RenyiOrder& s) {
  double lg = log_g_s(p, q, s);
  if (lg == kPosInf) return XReal::infinity();
  if (lg == kNegInf) return XReal::finite(0.0);
  return XReal::finite(std::exp(lg));
}

XReal kl_divergence(const Pmf& p, std::span<const double> q) {
  check_same_alphabet(p.size(), q.size());
  check_q(q);
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return XReal::infinity();
    d += p[i] * (std::log(p[i]) - std::log(q[i]));
  }
  return XReal::finite(d);
}

XReal renyi_divergence(const Pmf& p, std::span<const double> q, const RenyiOrder& s) {
  check_same_alphabet(p.size(), q.size());
  check_q(q);
  switch (s.tag()) {
    case RenyiOrder::Tag::kOne:
      return kl_divergence(p, q);
    case RenyiOrder::Tag::kZero: {
      double mass = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] > 0.0) mass += q[i];
      if (!(mass > 0.0)) return XReal::infinity();
      return XReal::finite(-std::log(mass));
    }
    case RenyiOrder::Tag::kInfinity: {
      double best = kNegInf;
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        if (q[i] <= 0.0) return XReal::infinity();
        best = std::max(best, std::log(p[i]) - std::log(q[i]));
      }
      return XReal::finite(best);
    }
    case RenyiOrder::Tag::kGeneral: {
      double sv = s.value();
      double lg = log_g_s(p.probs(), q, sv);
      if (lg == kPosInf) return XReal::infinity();          // s > 1, support violated
      if (lg == kNegInf) return XReal::infinity();          // s < 1, disjoint supports
      return XReal::finite(lg / (sv - 1.0));
    }
  }
  throw Error("unreachable");
}

XReal renyi_divergence(const Pmf& p, const Pmf& q, const RenyiOrder& s) {
  return renyi_divergence(p, q.probs(), s);
}

XReal renyi_divergence(const JointPmf& p, const JointPmf& q, const RenyiOrder& s) {
  if (p.shape() != q.shape()) throw StructuralError("renyi_divergence: joint shape mismatch");
  return renyi_divergence(p.flatten(), q.probs(), s);
}

double loglik_variance(const Pmf& p, const Pmf& q) {
  check_same_alphabet(p.size(), q.size());
  XReal d = kl_divergence(p, q.probs());
  if (d.is_infinite())
    throw SupportError("loglik_variance: supp P is not contained in supp Q");
  double mean = d.value();
  double v = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    double dev = std::log(p[i]) - std::log(q[i]) - mean;
    v += p[i] * dev * dev;
  }
  return v;
}

double loglik_variance(const JointPmf& p, const JointPmf& q) {
  if (p.shape() != q.shape()) throw StructuralError("loglik_variance: joint shape mismatch");
  return loglik_variance(p.flatten(), q.flatten());
}

}  // namespace rht
