#ifndef RHT_XREAL_HPP
#define RHT_XREAL_HPP

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace rht {

// Extended real used for divergence values: either a finite double or +inf.
// The infinite case is a tagged state, not a floating sentinel, so callers
// must branch explicitly before touching the numeric value.
class XReal {
 public:
  constexpr XReal() = default;

  static XReal finite(double v) {
    if (!std::isfinite(v)) throw std::invalid_argument("XReal::finite: value is not finite");
    XReal x;
    x.value_ = v;
    return x;
  }
  static constexpr XReal infinity() {
    XReal x;
    x.infinite_ = true;
    return x;
  }

  constexpr bool is_infinite() const { return infinite_; }
  constexpr bool is_finite() const { return !infinite_; }

  double value() const {
    if (infinite_) throw std::logic_error("XReal::value: value is +infinity");
    return value_;
  }
  constexpr double value_or(double if_infinite) const { return infinite_ ? if_infinite : value_; }

  friend bool operator==(const XReal& a, const XReal& b) {
    if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
    return a.value_ == b.value_;
  }
  friend bool operator<(const XReal& a, const XReal& b) {
    if (a.infinite_) return false;
    if (b.infinite_) return true;
    return a.value_ < b.value_;
  }
  friend bool operator<=(const XReal& a, const XReal& b) { return a == b || a < b; }
  friend bool operator>(const XReal& a, const XReal& b) { return b < a; }
  friend bool operator>=(const XReal& a, const XReal& b) { return b <= a; }

  friend XReal operator+(const XReal& a, const XReal& b) {
    if (a.infinite_ || b.infinite_) return infinity();
    return finite(a.value_ + b.value_);
  }
  friend XReal operator-(const XReal& a, double b) {
    if (a.infinite_) return infinity();
    return finite(a.value_ - b);
  }

  friend std::ostream& operator<<(std::ostream& os, const XReal& x) {
    if (x.infinite_) return os << "inf";
    return os << x.value_;
  }

 private:
  double value_ = 0.0;
  bool infinite_ = false;
};

}  // namespace rht

#endif
