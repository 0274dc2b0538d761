#ifndef RHT_TYPES_METHOD_HPP
#define RHT_TYPES_METHOD_HPP

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "rht/families.hpp"
#include "rht/pmf.hpp"
#include "rht/renyi.hpp"

namespace rht {

inline constexpr std::size_t kDefaultTypeCap = 5'000'000;

// Composition of n over a finite alphabet together with the log of its
// multinomial multiplicity.
struct TypeClass {
  int n = 0;
  std::vector<int> counts;
  double log_multiplicity = 0.0;
};

// Number of compositions C(n+d-1, d-1); throws CapacityError when it
// exceeds the cap.
std::size_t count_types(std::size_t alphabet_size, int n, std::size_t cap = kDefaultTypeCap);

// All compositions in ascending lexicographic order of the counts vector.
std::vector<TypeClass> enumerate_types(std::size_t alphabet_size, int n,
                                       std::size_t cap = kDefaultTypeCap);

// Counts of a joint type folded onto a subset of axes (kept in the given
// order) of a product alphabet with the given shape.
std::vector<int> marginal_counts(const TypeClass& joint, std::span<const std::size_t> shape,
                                 std::span<const std::size_t> axes);

// Shared, immutable enumeration of all length-n types over one alphabet.
class TypeSystem {
 public:
  TypeSystem(std::size_t alphabet_size, int n, std::size_t cap = kDefaultTypeCap);

  int n() const { return n_; }
  std::size_t alphabet_size() const { return alphabet_; }
  std::size_t size() const { return types_.size(); }
  const std::vector<TypeClass>& types() const { return types_; }
  const TypeClass& type(std::size_t i) const { return types_[i]; }
  std::size_t index_of(const std::vector<int>& counts) const;
  double log_type_count() const { return log_type_count_; }

  // log mass of one whole type class under the n-fold product of a
  // single-letter distribution given by its log table.
  double log_class_mass(std::span<const double> log_p, std::size_t type_index) const;
  // log probability of a single sequence in the class under that product.
  double log_seq_prob(std::span<const double> log_p, std::size_t type_index) const;

 private:
  std::size_t alphabet_;
  int n_;
  double log_type_count_;
  std::vector<TypeClass> types_;
  std::map<std::vector<int>, std::size_t> index_;
};

// Uniform mixture over type classes, uniform within each class. Dominates
// every permutation-invariant distribution: Q(x^n) <= |T_n| U^n(x^n).
class UniversalDistribution {
 public:
  UniversalDistribution(std::size_t alphabet_size, int n, std::size_t cap = kDefaultTypeCap);

  int n() const { return types_->n(); }
  const TypeSystem& types() const { return *types_; }
  double log_type_count() const { return types_->log_type_count(); }
  double log_seq_prob(std::size_t type_index) const;
  double log_seq_prob(const TypeClass& t) const;
  double log_class_mass(std::size_t type_index) const;  // equals -log |T_n|

 private:
  std::shared_ptr<const TypeSystem> types_;
};

// Permutation covariant channel built from joint-type weights
//   u(l_XY) = #l_X / |{k_XY : k_X = l_X}|,
// whose output dominates every permutation covariant channel's output up to
// the factor |T_n(X x Y)|.
class UniversalChannel {
 public:
  UniversalChannel(std::size_t in_size, std::size_t out_size, int n,
                   std::size_t cap = kDefaultTypeCap);

  int n() const { return joint_->n(); }
  std::size_t in_size() const { return in_; }
  std::size_t out_size() const { return out_; }
  // joint types over the product alphabet, flat letter = x * out_size + y
  const TypeSystem& joint_types() const { return *joint_; }
  double log_weight(std::size_t joint_index) const { return log_weight_[joint_index]; }
  // log U(y^n | x^n) for any pair of sequences with this joint type
  double log_seq_prob(std::size_t joint_index) const;
  std::vector<int> input_marginal(std::size_t joint_index) const;
  // For tests: per input type, sum over compatible joint types of
  // u(l)/#l_X; equals one by construction.
  double row_normalization(const std::vector<int>& input_counts) const;

 private:
  std::size_t in_;
  std::size_t out_;
  std::shared_ptr<const TypeSystem> joint_;
  std::vector<double> log_weight_;
};

// The universal object of a composite family at blocklength n: per joint
// type, the log sequence probability of U^n, plus the polynomial dominance
// factor v(n) with Q^n <= v(n) U^n for every symmetrized member.
class FamilyUniversal {
 public:
  FamilyUniversal(const JointPmf& null_dist, const FamilySpec& family, int n,
                  std::size_t cap = kDefaultTypeCap);

  int n() const { return types_->n(); }
  const TypeSystem& types() const { return *types_; }
  double log_v() const { return log_v_; }
  double log_u_seq(std::size_t ti) const { return log_u_seq_[ti]; }
  double log_u_class(std::size_t ti) const;
  double log_null_seq(std::size_t ti) const { return log_null_seq_[ti]; }
  double log_null_class(std::size_t ti) const;
  // Exact D_s(P^{x n} || U^n) from the per-type sums.
  double renyi_divergence_vs_null(const RenyiOrder& s) const;

 private:
  std::shared_ptr<const TypeSystem> types_;
  double log_v_ = 0.0;
  std::vector<double> log_u_seq_;
  std::vector<double> log_null_seq_;
};

// Permutation invariant randomized test: acceptance probability per type
// class, aligned with the owning TypeSystem's enumeration order.
struct PerTypeTest {
  int n = 0;
  std::vector<double> accept;
  double lambda = 0.0;
};

// Threshold lambda_n = (log v + n R + (s-1) D_s(P^n || U^n)) / s; the s = 1
// convention drops the divergence term.
double lr_threshold(int n, double rate, const RenyiOrder& s, double ds_null_vs_universal,
                    double log_v);

// Accept exactly the classes where log P^n - log U^n >= lambda_n.
PerTypeTest build_lr_test(const FamilyUniversal& fu, double lambda_n);

// Type-I error of a test against the family's null.
double log_alpha_of_test(const PerTypeTest& test, const FamilyUniversal& fu);
double log_complement_alpha_of_test(const PerTypeTest& test, const FamilyUniversal& fu);
// Type-II error against one explicit i.i.d. member (single-letter table).
double log_beta_iid(const PerTypeTest& test, const FamilyUniversal& fu, const JointPmf& member);
// Certified bound v(n) * sum_l U(class l) t_l on the type-II error over the
// whole symmetrized family.
double log_beta_universal_bound(const PerTypeTest& test, const FamilyUniversal& fu);

}  // namespace rht

#endif
