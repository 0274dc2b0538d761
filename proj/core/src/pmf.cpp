#include "rht/pmf.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "rht/errors.hpp"

namespace rht {

namespace {

void check_table(std::span<const double> p, const char* what) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) {
      std::ostringstream os;
      os << what << ": negative or NaN probability " << v;
      throw StructuralError(os.str());
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kNormalizationTol) {
    std::ostringstream os;
    os << what << ": probabilities sum to " << sum << ", outside tolerance "
       << kNormalizationTol;
    throw StructuralError(os.str());
  }
}

std::vector<double> scale_to_unit(std::vector<double> w, const char* what) {
  double sum = 0.0;
  for (double v : w) {
    if (!(v >= 0.0)) throw StructuralError(std::string(what) + ": negative weight");
    sum += v;
  }
  if (!(sum > 0.0)) throw StructuralError(std::string(what) + ": zero total weight");
  for (double& v : w) v /= sum;
  return w;
}

std::vector<std::size_t> make_strides(const std::vector<std::size_t>& shape) {
  std::vector<std::size_t> s(shape.size(), 1);
  for (std::size_t i = shape.size(); i-- > 1;) s[i - 1] = s[i] * shape[i];
  return s;
}

std::vector<std::string> default_names(std::size_t rank) {
  std::vector<std::string> names(rank);
  for (std::size_t i = 0; i < rank; ++i) names[i] = "a" + std::to_string(i);
  return names;
}

}  // namespace

Pmf::Pmf(std::vector<double> probs) : p_(std::move(probs)) {
  if (p_.empty()) throw StructuralError("Pmf: empty alphabet");
  check_table(p_, "Pmf");
}

Pmf Pmf::uniform(std::size_t size) {
  if (size == 0) throw StructuralError("Pmf::uniform: empty alphabet");
  return Pmf(std::vector<double>(size, 1.0 / static_cast<double>(size)), Unchecked{});
}

Pmf Pmf::normalized(std::vector<double> weights) {
  return Pmf(scale_to_unit(std::move(weights), "Pmf::normalized"), Unchecked{});
}

bool Pmf::full_support() const {
  for (double v : p_)
    if (v <= 0.0) return false;
  return true;
}

JointPmf::JointPmf(std::vector<std::size_t> shape, std::vector<double> probs,
                   std::vector<std::string> axis_names)
    : shape_(std::move(shape)), axis_names_(std::move(axis_names)), p_(std::move(probs)) {
  if (shape_.empty()) throw StructuralError("JointPmf: no axes");
  std::size_t total = 1;
  for (std::size_t d : shape_) {
    if (d == 0) throw StructuralError("JointPmf: empty axis");
    total *= d;
  }
  if (p_.size() != total)
    throw StructuralError("JointPmf: table size does not match the axis shape");
  if (axis_names_.empty()) axis_names_ = default_names(shape_.size());
  if (axis_names_.size() != shape_.size())
    throw StructuralError("JointPmf: axis name count does not match the shape");
  check_table(p_, "JointPmf");
  strides_ = make_strides(shape_);
}

JointPmf::JointPmf(std::vector<std::size_t> shape, std::vector<double> probs,
                   std::vector<std::string> names, Unchecked)
    : shape_(std::move(shape)), axis_names_(std::move(names)), p_(std::move(probs)) {
  if (axis_names_.empty()) axis_names_ = default_names(shape_.size());
  strides_ = make_strides(shape_);
}

JointPmf JointPmf::from_pmf(const Pmf& p, std::string axis_name) {
  return JointPmf({p.size()}, {p.probs().begin(), p.probs().end()}, {std::move(axis_name)},
                  Unchecked{});
}

JointPmf JointPmf::normalized(std::vector<std::size_t> shape, std::vector<double> weights,
                              std::vector<std::string> axis_names) {
  auto w = scale_to_unit(std::move(weights), "JointPmf::normalized");
  return JointPmf(std::move(shape), std::move(w), std::move(axis_names), Unchecked{});
}

JointPmf JointPmf::product(std::span<const Pmf> factors, std::vector<std::string> axis_names) {
  if (factors.empty()) throw StructuralError("JointPmf::product: no factors");
  std::vector<std::size_t> shape;
  shape.reserve(factors.size());
  std::size_t total = 1;
  for (const Pmf& f : factors) {
    shape.push_back(f.size());
    total *= f.size();
  }
  std::vector<double> p(total, 1.0);
  std::size_t repeat = total;
  for (const Pmf& f : factors) {
    repeat /= f.size();
    std::size_t pos = 0;
    while (pos < total) {
      for (std::size_t v = 0; v < f.size(); ++v)
        for (std::size_t r = 0; r < repeat; ++r) p[pos++] *= f[v];
    }
  }
  return JointPmf(std::move(shape), std::move(p), std::move(axis_names), Unchecked{});
}

std::size_t JointPmf::flat_index(std::span<const std::size_t> idx) const {
  if (idx.size() != shape_.size()) throw StructuralError("JointPmf: index rank mismatch");
  std::size_t flat = 0;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= shape_[i]) throw StructuralError("JointPmf: index out of range");
    flat += idx[i] * strides_[i];
  }
  return flat;
}

std::vector<std::size_t> JointPmf::unflatten(std::size_t flat) const {
  std::vector<std::size_t> idx(shape_.size());
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    idx[i] = flat / strides_[i];
    flat %= strides_[i];
  }
  return idx;
}

void JointPmf::check_axis(std::size_t axis) const {
  if (axis >= shape_.size()) throw StructuralError("JointPmf: axis out of range");
}

Pmf JointPmf::marginal(std::size_t axis) const {
  check_axis(axis);
  std::vector<double> m(shape_[axis], 0.0);
  for (std::size_t flat = 0; flat < p_.size(); ++flat)
    m[(flat / strides_[axis]) % shape_[axis]] += p_[flat];
  return Pmf::normalized(std::move(m));
}

JointPmf JointPmf::marginal_axes(std::span<const std::size_t> axes) const {
  if (axes.empty()) throw StructuralError("JointPmf::marginal_axes: no axes");
  std::vector<std::size_t> out_shape;
  std::vector<std::string> out_names;
  for (std::size_t a : axes) {
    check_axis(a);
    out_shape.push_back(shape_[a]);
    out_names.push_back(axis_names_[a]);
  }
  auto out_strides = make_strides(out_shape);
  std::size_t total = 1;
  for (std::size_t d : out_shape) total *= d;
  std::vector<double> m(total, 0.0);
  for (std::size_t flat = 0; flat < p_.size(); ++flat) {
    std::size_t of = 0;
    for (std::size_t i = 0; i < axes.size(); ++i)
      of += ((flat / strides_[axes[i]]) % shape_[axes[i]]) * out_strides[i];
    m[of] += p_[flat];
  }
  return JointPmf::normalized(std::move(out_shape), std::move(m), std::move(out_names));
}

double JointPmf::axis_mass(std::size_t axis, std::size_t value) const {
  check_axis(axis);
  if (value >= shape_[axis]) throw StructuralError("JointPmf: axis value out of range");
  double mass = 0.0;
  for (std::size_t flat = 0; flat < p_.size(); ++flat)
    if ((flat / strides_[axis]) % shape_[axis] == value) mass += p_[flat];
  return mass;
}

std::vector<double> JointPmf::conditional_given(std::size_t axis, std::size_t value) const {
  check_axis(axis);
  if (value >= shape_[axis]) throw StructuralError("JointPmf: axis value out of range");
  std::size_t total = p_.size() / shape_[axis];
  std::vector<double> cond;
  cond.reserve(total);
  double mass = 0.0;
  for (std::size_t flat = 0; flat < p_.size(); ++flat) {
    if ((flat / strides_[axis]) % shape_[axis] == value) {
      cond.push_back(p_[flat]);
      mass += p_[flat];
    }
  }
  if (!(mass > 0.0))
    throw StructuralError("JointPmf::conditional_given: conditioning event has zero mass");
  for (double& v : cond) v /= mass;
  return cond;
}

Pmf JointPmf::flatten() const { return Pmf::normalized({p_.begin(), p_.end()}); }

JointPmf JointPmf::group_trailing_axes(std::size_t from_axis) const {
  check_axis(from_axis);
  if (from_axis == 0) throw StructuralError("JointPmf::group_trailing_axes: nothing left in front");
  std::vector<std::size_t> shape(shape_.begin(), shape_.begin() + from_axis);
  std::vector<std::string> names(axis_names_.begin(), axis_names_.begin() + from_axis);
  std::size_t tail = 1;
  std::string tail_name;
  for (std::size_t i = from_axis; i < shape_.size(); ++i) {
    tail *= shape_[i];
    if (!tail_name.empty()) tail_name += "*";
    tail_name += axis_names_[i];
  }
  shape.push_back(tail);
  names.push_back(tail_name);
  return JointPmf(std::move(shape), p_, std::move(names), Unchecked{});
}

Channel::Channel(std::size_t in_size, std::size_t out_size, std::vector<double> row_major)
    : in_(in_size), out_(out_size), w_(std::move(row_major)) {
  if (in_ == 0 || out_ == 0) throw StructuralError("Channel: empty alphabet");
  if (w_.size() != in_ * out_) throw StructuralError("Channel: matrix size mismatch");
  for (std::size_t x = 0; x < in_; ++x) check_table(row(x), "Channel row");
}

Channel Channel::uniform(std::size_t in_size, std::size_t out_size) {
  if (in_size == 0 || out_size == 0) throw StructuralError("Channel: empty alphabet");
  return Channel(in_size, out_size,
                 std::vector<double>(in_size * out_size, 1.0 / static_cast<double>(out_size)),
                 Unchecked{});
}

Channel Channel::normalized(std::size_t in_size, std::size_t out_size,
                            std::vector<double> row_major_weights) {
  if (row_major_weights.size() != in_size * out_size)
    throw StructuralError("Channel::normalized: matrix size mismatch");
  for (std::size_t x = 0; x < in_size; ++x) {
    double sum = 0.0;
    for (std::size_t y = 0; y < out_size; ++y) {
      double v = row_major_weights[x * out_size + y];
      if (!(v >= 0.0)) throw StructuralError("Channel::normalized: negative weight");
      sum += v;
    }
    if (!(sum > 0.0)) throw StructuralError("Channel::normalized: zero row");
    for (std::size_t y = 0; y < out_size; ++y) row_major_weights[x * out_size + y] /= sum;
  }
  return Channel(in_size, out_size, std::move(row_major_weights), Unchecked{});
}

}  // namespace rht
