#ifndef RHT_PMF_HPP
#define RHT_PMF_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace rht {

inline constexpr double kNormalizationTol = 1e-12;

// Probability mass function over a finite ordered alphabet. Immutable after
// construction. Construction rejects tables whose mass is outside the
// tolerance instead of renormalizing them.
class Pmf {
 public:
  explicit Pmf(std::vector<double> probs);

  static Pmf uniform(std::size_t size);
  // Scales a nonnegative weight vector to unit mass. For values produced by
  // internal solvers, where drift is roundoff rather than user error.
  static Pmf normalized(std::vector<double> weights);

  std::size_t size() const { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }
  std::span<const double> probs() const { return p_; }
  bool full_support() const;

 private:
  struct Unchecked {};
  Pmf(std::vector<double> probs, Unchecked) : p_(std::move(probs)) {}
  std::vector<double> p_;
};

// Joint distribution over a Cartesian product of finite axes, stored flat in
// row-major order (axis 0 slowest).
class JointPmf {
 public:
  JointPmf(std::vector<std::size_t> shape, std::vector<double> probs,
           std::vector<std::string> axis_names = {});

  static JointPmf from_pmf(const Pmf& p, std::string axis_name = "a0");
  static JointPmf normalized(std::vector<std::size_t> shape, std::vector<double> weights,
                             std::vector<std::string> axis_names = {});
  // Product of independent single-axis factors.
  static JointPmf product(std::span<const Pmf> factors, std::vector<std::string> axis_names = {});

  std::size_t rank() const { return shape_.size(); }
  const std::vector<std::size_t>& shape() const { return shape_; }
  const std::vector<std::string>& axis_names() const { return axis_names_; }
  std::size_t size() const { return p_.size(); }
  double operator[](std::size_t flat) const { return p_[flat]; }
  std::span<const double> probs() const { return p_; }

  std::size_t flat_index(std::span<const std::size_t> idx) const;
  std::vector<std::size_t> unflatten(std::size_t flat) const;

  Pmf marginal(std::size_t axis) const;
  // Marginal over a subset of axes, kept in the given order.
  JointPmf marginal_axes(std::span<const std::size_t> axes) const;
  // Distribution of the remaining axes given a value on `axis`. Throws
  // StructuralError if the conditioning event has zero mass.
  std::vector<double> conditional_given(std::size_t axis, std::size_t value) const;
  double axis_mass(std::size_t axis, std::size_t value) const;

  // Whole table as a single-axis pmf over the flattened product alphabet.
  Pmf flatten() const;
  // Merge all axes from `from_axis` on into one trailing axis.
  JointPmf group_trailing_axes(std::size_t from_axis) const;

 private:
  struct Unchecked {};
  JointPmf(std::vector<std::size_t> shape, std::vector<double> probs,
           std::vector<std::string> names, Unchecked);
  void check_axis(std::size_t axis) const;

  std::vector<std::size_t> shape_;
  std::vector<std::size_t> strides_;
  std::vector<std::string> axis_names_;
  std::vector<double> p_;
};

// Row-stochastic matrix: one Pmf over the output alphabet per input letter.
class Channel {
 public:
  Channel(std::size_t in_size, std::size_t out_size, std::vector<double> row_major);

  static Channel uniform(std::size_t in_size, std::size_t out_size);
  static Channel normalized(std::size_t in_size, std::size_t out_size,
                            std::vector<double> row_major_weights);

  std::size_t in_size() const { return in_; }
  std::size_t out_size() const { return out_; }
  double at(std::size_t x, std::size_t y) const { return w_[x * out_ + y]; }
  std::span<const double> row(std::size_t x) const {
    return {w_.data() + x * out_, out_};
  }

 private:
  struct Unchecked {};
  Channel(std::size_t in, std::size_t out, std::vector<double> w, Unchecked)
      : in_(in), out_(out), w_(std::move(w)) {}
  std::size_t in_;
  std::size_t out_;
  std::vector<double> w_;
};

}  // namespace rht

#endif
