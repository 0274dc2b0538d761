#include "rht/types_method.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "rht/errors.hpp"
#include "rht/logsum.hpp"

namespace rht {

namespace {

double log_factorial(int k) { return std::lgamma(static_cast<double>(k) + 1.0); }

double log_multinomial(int n, std::span<const int> counts) {
  double v = log_factorial(n);
  for (int c : counts) v -= log_factorial(c);
  return v;
}

std::vector<double> log_table_of(const JointPmf& p) {
  std::vector<double> lp(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) lp[i] = p[i] > 0.0 ? std::log(p[i]) : kNegInf;
  return lp;
}

}  // namespace

std::size_t count_types(std::size_t alphabet_size, int n, std::size_t cap) {
  if (alphabet_size == 0 || n < 1) throw StructuralError("count_types: need d >= 1 and n >= 1");
  // C(n+d-1, d-1) evaluated in the log domain to detect cap violations early
  double lc = std::lgamma(static_cast<double>(n) + alphabet_size) -
              log_factorial(n) - log_factorial(static_cast<int>(alphabet_size) - 1);
  if (lc > std::log(static_cast<double>(cap)) + 1e-9) {
    std::ostringstream os;
    os << "type enumeration would produce about " << std::exp(lc)
       << " classes, above the cap " << cap;
    throw CapacityError(os.str());
  }
  return static_cast<std::size_t>(std::llround(std::exp(lc)));
}

std::vector<TypeClass> enumerate_types(std::size_t alphabet_size, int n, std::size_t cap) {
  std::size_t expected = count_types(alphabet_size, n, cap);
  std::vector<TypeClass> out;
  out.reserve(expected);
  std::vector<int> counts(alphabet_size, 0);
  // ascending lexicographic generation
  auto emit = [&]() {
    out.push_back(TypeClass{n, counts, log_multinomial(n, counts)});
  };
  std::size_t d = alphabet_size;
  // iterative odometer over the first d-1 positions; the last takes the rest
  std::vector<int> head(d > 0 ? d - 1 : 0, 0);
  while (true) {
    int used = 0;
    for (std::size_t i = 0; i < head.size(); ++i) used += head[i];
    if (used <= n) {
      for (std::size_t i = 0; i < head.size(); ++i) counts[i] = head[i];
      counts[d - 1] = n - used;
      emit();
    }
    // advance
    std::size_t pos = head.size();
    while (pos > 0) {
      --pos;
      int room = n;
      for (std::size_t i = 0; i < pos; ++i) room -= head[i];
      if (head[pos] < room) {
        ++head[pos];
        for (std::size_t i = pos + 1; i < head.size(); ++i) head[i] = 0;
        break;
      }
      if (pos == 0) {
        if (out.size() != expected) {
          std::ostringstream os;
          os << "enumerate_types: generated " << out.size() << ", expected " << expected;
          throw Error(os.str());
        }
        return out;
      }
    }
    if (head.empty()) {
      // single-letter alphabet: exactly one type
      return out;
    }
  }
}

std::vector<int> marginal_counts(const TypeClass& joint, std::span<const std::size_t> shape,
                                 std::span<const std::size_t> axes) {
  std::vector<std::size_t> strides(shape.size(), 1);
  for (std::size_t i = shape.size(); i-- > 1;) strides[i - 1] = strides[i] * shape[i];
  std::size_t out_size = 1;
  for (std::size_t a : axes) out_size *= shape[a];
  std::vector<std::size_t> out_strides(axes.size(), 1);
  for (std::size_t i = axes.size(); i-- > 1;) out_strides[i - 1] = out_strides[i] * shape[axes[i]];
  std::vector<int> m(out_size, 0);
  for (std::size_t c = 0; c < joint.counts.size(); ++c) {
    if (joint.counts[c] == 0) continue;
    std::size_t of = 0;
    for (std::size_t i = 0; i < axes.size(); ++i)
      of += ((c / strides[axes[i]]) % shape[axes[i]]) * out_strides[i];
    m[of] += joint.counts[c];
  }
  return m;
}

TypeSystem::TypeSystem(std::size_t alphabet_size, int n, std::size_t cap)
    : alphabet_(alphabet_size), n_(n), types_(enumerate_types(alphabet_size, n, cap)) {
  log_type_count_ = std::log(static_cast<double>(types_.size()));
  for (std::size_t i = 0; i < types_.size(); ++i) index_.emplace(types_[i].counts, i);
}

std::size_t TypeSystem::index_of(const std::vector<int>& counts) const {
  auto it = index_.find(counts);
  if (it == index_.end()) throw StructuralError("TypeSystem: unknown type");
  return it->second;
}

double TypeSystem::log_seq_prob(std::span<const double> log_p, std::size_t ti) const {
  const TypeClass& t = types_[ti];
  if (log_p.size() != alphabet_) throw StructuralError("TypeSystem: alphabet mismatch");
  double v = 0.0;
  for (std::size_t c = 0; c < alphabet_; ++c) {
    if (t.counts[c] == 0) continue;
    if (log_p[c] == kNegInf) return kNegInf;
    v += t.counts[c] * log_p[c];
  }
  return v;
}

double TypeSystem::log_class_mass(std::span<const double> log_p, std::size_t ti) const {
  double v = log_seq_prob(log_p, ti);
  return v == kNegInf ? kNegInf : v + types_[ti].log_multiplicity;
}

UniversalDistribution::UniversalDistribution(std::size_t alphabet_size, int n, std::size_t cap)
    : types_(std::make_shared<const TypeSystem>(alphabet_size, n, cap)) {}

double UniversalDistribution::log_seq_prob(std::size_t ti) const {
  return -types_->log_type_count() - types_->type(ti).log_multiplicity;
}

double UniversalDistribution::log_seq_prob(const TypeClass& t) const {
  return -types_->log_type_count() - t.log_multiplicity;
}

double UniversalDistribution::log_class_mass(std::size_t) const {
  return -types_->log_type_count();
}

UniversalChannel::UniversalChannel(std::size_t in_size, std::size_t out_size, int n,
                                   std::size_t cap)
    : in_(in_size),
      out_(out_size),
      joint_(std::make_shared<const TypeSystem>(in_size * out_size, n, cap)) {
  // group joint types by input marginal
  std::array<std::size_t, 2> shape{in_, out_};
  std::array<std::size_t, 1> in_axis{0};
  std::map<std::vector<int>, std::size_t> group_count;
  std::vector<std::vector<int>> marginals(joint_->size());
  for (std::size_t i = 0; i < joint_->size(); ++i) {
    marginals[i] = marginal_counts(joint_->type(i), shape, in_axis);
    ++group_count[marginals[i]];
  }
  log_weight_.resize(joint_->size());
  for (std::size_t i = 0; i < joint_->size(); ++i) {
    double log_mult_in = log_multinomial(n, marginals[i]);
    log_weight_[i] =
        log_mult_in - std::log(static_cast<double>(group_count[marginals[i]]));
  }
}

double UniversalChannel::log_seq_prob(std::size_t joint_index) const {
  return log_weight_[joint_index] - joint_->type(joint_index).log_multiplicity;
}

std::vector<int> UniversalChannel::input_marginal(std::size_t joint_index) const {
  std::array<std::size_t, 2> shape{in_, out_};
  std::array<std::size_t, 1> in_axis{0};
  return marginal_counts(joint_->type(joint_index), shape, in_axis);
}

double UniversalChannel::row_normalization(const std::vector<int>& input_counts) const {
  double log_mult_in = log_multinomial(joint_->n(), input_counts);
  double acc = kNegInf;
  for (std::size_t i = 0; i < joint_->size(); ++i)
    if (input_marginal(i) == input_counts) acc = log_add(acc, log_weight_[i] - log_mult_in);
  return std::exp(acc);
}

FamilyUniversal::FamilyUniversal(const JointPmf& null_dist, const FamilySpec& family, int n,
                                 std::size_t cap) {
  family.validate_against(null_dist);
  const auto& shape = null_dist.shape();
  types_ = std::make_shared<const TypeSystem>(null_dist.size(), n, cap);
  const std::size_t nt = types_->size();
  log_u_seq_.assign(nt, kNegInf);
  log_null_seq_.assign(nt, kNegInf);

  const auto log_null = log_table_of(null_dist);
  for (std::size_t i = 0; i < nt; ++i) log_null_seq_[i] = types_->log_seq_prob(log_null, i);

  switch (family.kind()) {
    case FamilySpec::Kind::kSingleton: {
      const auto log_q = log_table_of(family.member());
      for (std::size_t i = 0; i < nt; ++i) log_u_seq_[i] = types_->log_seq_prob(log_q, i);
      log_v_ = 0.0;
      break;
    }
    case FamilySpec::Kind::kFixedMarginalProduct: {
      // T_X^{x n} on axis 0 and a universal distribution on the rest
      std::size_t tail = null_dist.size() / shape[0];
      double log_tail_types = std::log(static_cast<double>(count_types(tail, n, cap)));
      const Pmf& t = family.fixed_marginal();
      std::array<std::size_t, 2> grouped_shape{shape[0], tail};
      std::array<std::size_t, 1> axis0{0}, axis1{1};
      for (std::size_t i = 0; i < nt; ++i) {
        const TypeClass& tc = types_->type(i);
        auto cx = marginal_counts(tc, grouped_shape, axis0);
        auto cy = marginal_counts(tc, grouped_shape, axis1);
        double v = 0.0;
        bool dead = false;
        for (std::size_t x = 0; x < cx.size() && !dead; ++x) {
          if (cx[x] == 0) continue;
          if (!(t[x] > 0.0)) dead = true;
          else v += cx[x] * std::log(t[x]);
        }
        if (dead) continue;
        log_u_seq_[i] = v - log_tail_types - log_multinomial(n, cy);
      }
      log_v_ = log_tail_types;
      break;
    }
    case FamilySpec::Kind::kGeneralProduct: {
      std::vector<std::size_t> all_axes(shape.size());
      for (std::size_t a = 0; a < shape.size(); ++a) all_axes[a] = a;
      double lv = 0.0;
      for (std::size_t a = 0; a < shape.size(); ++a)
        lv += std::log(static_cast<double>(count_types(shape[a], n, cap)));
      log_v_ = lv;
      for (std::size_t i = 0; i < nt; ++i) {
        const TypeClass& tc = types_->type(i);
        double v = 0.0;
        for (std::size_t a = 0; a < shape.size(); ++a) {
          std::array<std::size_t, 1> axis{a};
          auto ca = marginal_counts(tc, shape, axis);
          v += -std::log(static_cast<double>(count_types(shape[a], n, cap))) -
               log_multinomial(n, ca);
        }
        log_u_seq_[i] = v;
      }
      break;
    }
    case FamilySpec::Kind::kMarkovRecovery: {
      std::array<std::size_t, 2> xy_axes{0, 1};
      std::array<std::size_t, 2> yz_axes{1, 2};
      const JointPmf pxy = null_dist.marginal_axes(xy_axes);
      const auto log_pxy = log_table_of(pxy);
      UniversalChannel uc(shape[1], shape[2], n, cap);
      for (std::size_t i = 0; i < nt; ++i) {
        const TypeClass& tc = types_->type(i);
        auto cxy = marginal_counts(tc, shape, xy_axes);
        double v = 0.0;
        bool dead = false;
        for (std::size_t c = 0; c < cxy.size() && !dead; ++c) {
          if (cxy[c] == 0) continue;
          if (log_pxy[c] == kNegInf) dead = true;
          else v += cxy[c] * log_pxy[c];
        }
        if (dead) continue;
        auto cyz = marginal_counts(tc, shape, yz_axes);
        std::size_t yz_index = uc.joint_types().index_of(cyz);
        log_u_seq_[i] = v + uc.log_seq_prob(yz_index);
      }
      log_v_ = uc.joint_types().log_type_count();
      break;
    }
    case FamilySpec::Kind::kMarkovAll: {
      std::array<std::size_t, 1> y_axis{1};
      std::array<std::size_t, 2> yx_axes{1, 0};
      std::array<std::size_t, 2> yz_axes{1, 2};
      double log_y_types = std::log(static_cast<double>(count_types(shape[1], n, cap)));
      UniversalChannel ux(shape[1], shape[0], n, cap);
      UniversalChannel uz(shape[1], shape[2], n, cap);
      for (std::size_t i = 0; i < nt; ++i) {
        const TypeClass& tc = types_->type(i);
        auto cy = marginal_counts(tc, shape, y_axis);
        auto cyx = marginal_counts(tc, shape, yx_axes);
        auto cyz = marginal_counts(tc, shape, yz_axes);
        log_u_seq_[i] = -log_y_types - log_multinomial(n, cy) +
                        ux.log_seq_prob(ux.joint_types().index_of(cyx)) +
                        uz.log_seq_prob(uz.joint_types().index_of(cyz));
      }
      log_v_ = log_y_types + ux.joint_types().log_type_count() +
               uz.joint_types().log_type_count();
      break;
    }
  }
}

double FamilyUniversal::log_u_class(std::size_t ti) const {
  double v = log_u_seq_[ti];
  return v == kNegInf ? kNegInf : v + types_->type(ti).log_multiplicity;
}

double FamilyUniversal::log_null_class(std::size_t ti) const {
  double v = log_null_seq_[ti];
  return v == kNegInf ? kNegInf : v + types_->type(ti).log_multiplicity;
}

double FamilyUniversal::renyi_divergence_vs_null(const RenyiOrder& s) const {
  const std::size_t nt = types_->size();
  if (s.is_one()) {
    double d = 0.0;
    for (std::size_t i = 0; i < nt; ++i) {
      double lpc = log_null_class(i);
      if (lpc == kNegInf) continue;
      if (log_u_seq_[i] == kNegInf)
        throw SupportError("universal object misses part of the null's support");
      d += std::exp(lpc) * (log_null_seq_[i] - log_u_seq_[i]);
    }
    return d;
  }
  if (!s.is_general())
    throw OrderError("renyi_divergence_vs_null: order must be finite and positive");
  const double sv = s.value();
  double acc = kNegInf;
  for (std::size_t i = 0; i < nt; ++i) {
    if (log_null_seq_[i] == kNegInf) continue;
    if (log_u_seq_[i] == kNegInf) {
      if (sv > 1.0)
        throw SupportError("universal object misses part of the null's support");
      continue;
    }
    acc = log_add(acc, types_->type(i).log_multiplicity + sv * log_null_seq_[i] +
                           (1.0 - sv) * log_u_seq_[i]);
  }
  return acc / (sv - 1.0);
}

double lr_threshold(int n, double rate, const RenyiOrder& s, double ds_null_vs_universal,
                    double log_v) {
  if (s.is_one()) return log_v + n * rate;
  if (!s.is_general()) throw OrderError("lr_threshold: order must be finite and positive");
  const double sv = s.value();
  return (log_v + n * rate + (sv - 1.0) * ds_null_vs_universal) / sv;
}

PerTypeTest build_lr_test(const FamilyUniversal& fu, double lambda_n) {
  PerTypeTest test;
  test.n = fu.n();
  test.lambda = lambda_n;
  const std::size_t nt = fu.types().size();
  test.accept.assign(nt, 0.0);
  for (std::size_t i = 0; i < nt; ++i) {
    double lp = fu.log_null_seq(i);
    if (lp == kNegInf) continue;  // never reached under the null; reject
    double lu = fu.log_u_seq(i);
    if (lu == kNegInf || lp - lu >= lambda_n) test.accept[i] = 1.0;
  }
  return test;
}

namespace {

double weighted_class_sum(const PerTypeTest& test, const FamilyUniversal& fu,
                          bool complement, const std::vector<double>* member_log_class) {
  const std::size_t nt = fu.types().size();
  if (test.accept.size() != nt) throw StructuralError("test/type-system size mismatch");
  double acc = kNegInf;
  for (std::size_t i = 0; i < nt; ++i) {
    double w = complement ? 1.0 - test.accept[i] : test.accept[i];
    if (!(w > 0.0)) continue;
    double lc = member_log_class ? (*member_log_class)[i] : fu.log_null_class(i);
    if (lc == kNegInf) continue;
    acc = log_add(acc, lc + std::log(w));
  }
  return acc;
}

}  // namespace

double log_alpha_of_test(const PerTypeTest& test, const FamilyUniversal& fu) {
  return weighted_class_sum(test, fu, /*complement=*/true, nullptr);
}

double log_complement_alpha_of_test(const PerTypeTest& test, const FamilyUniversal& fu) {
  return weighted_class_sum(test, fu, /*complement=*/false, nullptr);
}

double log_beta_iid(const PerTypeTest& test, const FamilyUniversal& fu, const JointPmf& member) {
  if (member.size() != fu.types().alphabet_size())
    throw StructuralError("log_beta_iid: member alphabet mismatch");
  const auto log_q = log_table_of(member);
  const std::size_t nt = fu.types().size();
  std::vector<double> log_class(nt);
  for (std::size_t i = 0; i < nt; ++i) log_class[i] = fu.types().log_class_mass(log_q, i);
  return weighted_class_sum(test, fu, /*complement=*/false, &log_class);
}

double log_beta_universal_bound(const PerTypeTest& test, const FamilyUniversal& fu) {
  const std::size_t nt = fu.types().size();
  double acc = kNegInf;
  for (std::size_t i = 0; i < nt; ++i) {
    double w = test.accept[i];
    if (!(w > 0.0)) continue;
    double lu = fu.log_u_class(i);
    if (lu == kNegInf) continue;
    acc = log_add(acc, lu + std::log(w));
  }
  return acc == kNegInf ? kNegInf : fu.log_v() + acc;
}

}  // namespace rht
