#include <doctest.h>

#include <cmath>
#include <random>

#include "rht/errors.hpp"
#include "rht/logsum.hpp"
#include "rht/types_method.hpp"
#include "support/test_support.hpp"

using namespace rht;

TEST_CASE("type enumeration") {
  auto t22 = enumerate_types(2, 2);
  REQUIRE(t22.size() == 3);
  CHECK(t22[0].counts == std::vector<int>{0, 2});
  CHECK(t22[1].counts == std::vector<int>{1, 1});
  CHECK(t22[2].counts == std::vector<int>{2, 0});
  CHECK(std::exp(t22[0].log_multiplicity) == doctest::Approx(1.0));
  CHECK(std::exp(t22[1].log_multiplicity) == doctest::Approx(2.0));
  CHECK(std::exp(t22[2].log_multiplicity) == doctest::Approx(1.0));

  CHECK(enumerate_types(1, 9).size() == 1);
  CHECK(enumerate_types(3, 4).size() == 15);
  CHECK(count_types(2, 4096) == 4097);
  CHECK_THROWS_AS(enumerate_types(30, 30), CapacityError);
  CHECK_THROWS_AS(enumerate_types(4, 7, /*cap=*/10), CapacityError);
}

TEST_CASE("log multiplicity identity") {
  std::mt19937 rng(89);
  for (const TypeClass& t : enumerate_types(4, 9)) {
    double ref = std::lgamma(10.0);
    for (int c : t.counts) ref -= std::lgamma(c + 1.0);
    CHECK(std::abs(t.log_multiplicity - ref) <= 1e-9);
  }
  (void)rng;
}

TEST_CASE("universal distribution values") {
  UniversalDistribution u(2, 2);
  // three types; the mixed type holds two sequences
  std::size_t mixed = u.types().index_of({1, 1});
  CHECK(std::exp(u.log_seq_prob(mixed)) == doctest::Approx(1.0 / 6.0).epsilon(1e-13));

  UniversalDistribution u1(5, 1);
  for (std::size_t i = 0; i < u1.types().size(); ++i)
    CHECK(std::exp(u1.log_seq_prob(i)) == doctest::Approx(0.2).epsilon(1e-13));

  // unit mass over classes
  UniversalDistribution u9(3, 9);
  double acc = kNegInf;
  for (std::size_t i = 0; i < u9.types().size(); ++i)
    acc = log_add(acc, u9.log_seq_prob(i) + u9.types().type(i).log_multiplicity);
  CHECK(std::abs(acc) <= 1e-9);
}

TEST_CASE("universal distribution dominance over symmetrized members") {
  // Q = (0.9, 0.1)^{x4}: i.i.d. products are permutation invariant already
  const int n = 4;
  UniversalDistribution u(2, n);
  std::vector<double> lq{std::log(0.9), std::log(0.1)};
  double log_tcount = u.log_type_count();
  CHECK(std::exp(log_tcount) == doctest::Approx(5.0));
  for (std::size_t i = 0; i < u.types().size(); ++i) {
    double lseq = u.types().log_seq_prob(lq, i);
    CHECK(lseq <= log_tcount + u.log_seq_prob(i) + 1e-12);
  }

  // non-i.i.d.: symmetrize random products over all 4! permutations
  std::mt19937 rng(97);
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  const std::size_t seqs = 16;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::vector<double>> factors(n);
    for (auto& f : factors) {
      double a = unif(rng);
      double b = unif(rng);
      f = {a / (a + b), b / (a + b)};
    }
    std::vector<int> perm{0, 1, 2, 3};
    std::vector<double> sym(seqs, 0.0);
    int nperm = 0;
    std::sort(perm.begin(), perm.end());
    do {
      for (std::size_t x = 0; x < seqs; ++x) {
        double pr = 1.0;
        for (int i = 0; i < n; ++i) pr *= factors[i][(x >> perm[i]) & 1];
        sym[x] += pr;
      }
      ++nperm;
    } while (std::next_permutation(perm.begin(), perm.end()));
    for (auto& v : sym) v /= nperm;
    // check per sequence against |T_4| * U
    for (std::size_t x = 0; x < seqs; ++x) {
      int ones = __builtin_popcount(static_cast<unsigned>(x));
      std::size_t ti = u.types().index_of({n - ones, ones});
      CHECK(std::log(sym[x]) <= log_tcount + u.log_seq_prob(ti) + 1e-12);
    }
  }
}

TEST_CASE("universal channel structure") {
  SUBCASE("blocklength one is the uniform channel") {
    UniversalChannel u(2, 2, 1);
    for (std::size_t i = 0; i < u.joint_types().size(); ++i)
      CHECK(std::exp(u.log_seq_prob(i)) == doctest::Approx(0.5).epsilon(1e-13));
  }

  SUBCASE("row normalization holds for every input type") {
    UniversalChannel u(2, 2, 3);
    for (const TypeClass& t : enumerate_types(2, 3))
      CHECK(u.row_normalization(t.counts) == doctest::Approx(1.0).epsilon(1e-9));
    UniversalChannel u23(2, 3, 4);
    for (const TypeClass& t : enumerate_types(2, 4))
      CHECK(u23.row_normalization(t.counts) == doctest::Approx(1.0).epsilon(1e-9));
  }

  SUBCASE("dominance over symmetrized product channels, exhaustive at n = 3") {
    const int n = 3;
    UniversalChannel u(2, 2, n);
    double log_tcount = u.joint_types().log_type_count();
    std::mt19937 rng(101);
    std::uniform_real_distribution<double> unif(0.05, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
      // product channel with position-dependent rows, then symmetrized
      double w[3][2][2];
      for (int i = 0; i < n; ++i)
        for (int x = 0; x < 2; ++x) {
          double a = unif(rng), b = unif(rng);
          w[i][x][0] = a / (a + b);
          w[i][x][1] = b / (a + b);
        }
      std::vector<int> perm{0, 1, 2};
      double sym[8][8] = {};
      int nperm = 0;
      do {
        for (int xs = 0; xs < 8; ++xs)
          for (int ys = 0; ys < 8; ++ys) {
            double pr = 1.0;
            for (int i = 0; i < n; ++i) {
              int xi = (xs >> perm[i]) & 1, yi = (ys >> perm[i]) & 1;
              pr *= w[i][xi][yi];
            }
            sym[xs][ys] += pr;
          }
        ++nperm;
      } while (std::next_permutation(perm.begin(), perm.end()));
      for (int xs = 0; xs < 8; ++xs)
        for (int ys = 0; ys < 8; ++ys) {
          double q = sym[xs][ys] / nperm;
          // joint type of the pair (x^n, y^n) over the 4-letter alphabet
          std::vector<int> counts(4, 0);
          for (int i = 0; i < n; ++i) ++counts[((xs >> i) & 1) * 2 + ((ys >> i) & 1)];
          std::size_t ti = u.joint_types().index_of(counts);
          CHECK(std::log(q) <= log_tcount + u.log_seq_prob(ti) + 1e-12);
        }
    }
  }
}

TEST_CASE("class masses are exactly normalized") {
  std::mt19937 rng(103);
  Pmf p = testsupport::random_pmf(rng, 3);
  TypeSystem ts(3, 9);
  std::vector<double> lp(3);
  for (std::size_t i = 0; i < 3; ++i) lp[i] = std::log(p[i]);
  double acc = kNegInf;
  for (std::size_t i = 0; i < ts.size(); ++i) acc = log_add(acc, ts.log_class_mass(lp, i));
  CHECK(std::abs(acc) <= 1e-9);
}

TEST_CASE("likelihood ratio tests against the family universal") {
  JointPmf p = JointPmf::from_pmf(Pmf({0.9, 0.1}));
  FamilySpec fam = FamilySpec::singleton(JointPmf::from_pmf(Pmf::uniform(2)));

  SUBCASE("extreme thresholds accept everything or nothing") {
    FamilyUniversal fu(p, fam, 2);
    PerTypeTest all = build_lr_test(fu, -1e18);
    PerTypeTest none = build_lr_test(fu, 1e18);
    for (double t : all.accept) CHECK(t == 1.0);
    for (double t : none.accept) CHECK(t == 0.0);
    CHECK(std::exp(log_alpha_of_test(all, fu)) == doctest::Approx(0.0));
    CHECK(std::exp(log_beta_iid(all, fu, fam.member())) == doctest::Approx(1.0));
    CHECK(std::exp(log_alpha_of_test(none, fu)) == doctest::Approx(1.0));
    CHECK(log_beta_iid(none, fu, fam.member()) == kNegInf);
  }

  SUBCASE("intermediate threshold accepts exactly the majority-zero classes") {
    // against the universal distribution of all permutation invariant laws
    FamilyUniversal fu(JointPmf::from_pmf(Pmf({0.9, 0.1})),
                       FamilySpec::general_product(1, false), 2);
    // scores: type (2,0) high, (1,1) middle, (0,2) low; pick lambda between
    PerTypeTest test = build_lr_test(fu, 0.0);
    std::size_t majority = fu.types().index_of({2, 0});
    std::size_t mixed = fu.types().index_of({1, 1});
    std::size_t minority = fu.types().index_of({0, 2});
    CHECK(test.accept[majority] == 1.0);
    CHECK(test.accept[mixed] == 0.0);
    CHECK(test.accept[minority] == 0.0);
  }
}

TEST_CASE("threshold choice certifies the beta budget") {
  std::mt19937 rng(107);
  JointPmf p = testsupport::random_joint(rng, {2, 2});
  FamilySpec fam = FamilySpec::fixed_marginal_product(p.marginal(0));
  for (int n : {3, 6, 9}) {
    FamilyUniversal fu(p, fam, n);
    for (double s : {0.5, 0.8, 1.5}) {
      for (double rate : {0.05, 0.15, 0.4}) {
        double dsn = fu.renyi_divergence_vs_null(RenyiOrder::of(s));
        double lambda = lr_threshold(n, rate, RenyiOrder::of(s), dsn, fu.log_v());
        PerTypeTest test = build_lr_test(fu, lambda);
        CHECK(log_beta_universal_bound(test, fu) <= -n * rate + 1e-9);
      }
    }
    // order-one convention
    double lambda1 = lr_threshold(n, 0.1, RenyiOrder::one(), 0.0, fu.log_v());
    CHECK(lambda1 == doctest::Approx(fu.log_v() + n * 0.1));
  }
  // algebraic spot check: log_v = 0, n = 1, rate = D_s gives lambda = D_s
  double ds = 0.37;
  CHECK(lr_threshold(1, ds, RenyiOrder::of(2.0), ds, 0.0) == doctest::Approx(ds).epsilon(1e-13));
}

TEST_CASE("iid beta never exceeds the universal bound") {
  std::mt19937 rng(109);
  JointPmf p = testsupport::random_joint(rng, {2, 2});
  FamilySpec fam = FamilySpec::fixed_marginal_product(p.marginal(0));
  const int n = 5;
  FamilyUniversal fu(p, fam, n);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    // random test and random family member
    PerTypeTest test;
    test.n = n;
    test.accept.resize(fu.types().size());
    for (auto& t : test.accept) t = unif(rng) < 0.5 ? 1.0 : unif(rng);
    Pmf qy = testsupport::random_pmf(rng, 2);
    std::vector<double> w(4);
    const Pmf& t0 = fam.fixed_marginal();
    for (std::size_t x = 0; x < 2; ++x)
      for (std::size_t y = 0; y < 2; ++y) w[x * 2 + y] = t0[x] * qy[y];
    JointPmf member = JointPmf::normalized({2, 2}, std::move(w));
    CHECK(log_beta_iid(test, fu, member) <= log_beta_universal_bound(test, fu) + 1e-12);
  }
}

TEST_CASE("universal channel dominance on asymmetric alphabets") {
  const int n = 2;
  UniversalChannel u(2, 3, n);
  double log_tcount = u.joint_types().log_type_count();
  std::mt19937 rng(167);
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    // position-dependent product channel, symmetrized over both positions
    double w[2][2][3];
    for (int i = 0; i < n; ++i)
      for (int x = 0; x < 2; ++x) {
        double a = unif(rng), b = unif(rng), c = unif(rng);
        double sum = a + b + c;
        w[i][x][0] = a / sum;
        w[i][x][1] = b / sum;
        w[i][x][2] = c / sum;
      }
    for (int x0 = 0; x0 < 2; ++x0)
      for (int x1 = 0; x1 < 2; ++x1)
        for (int y0 = 0; y0 < 3; ++y0)
          for (int y1 = 0; y1 < 3; ++y1) {
            double q = 0.5 * (w[0][x0][y0] * w[1][x1][y1] + w[0][x1][y1] * w[1][x0][y0]);
            std::vector<int> counts(6, 0);
            ++counts[x0 * 3 + y0];
            ++counts[x1 * 3 + y1];
            std::size_t ti = u.joint_types().index_of(counts);
            CHECK(std::log(q) <= log_tcount + u.log_seq_prob(ti) + 1e-12);
          }
  }
}

TEST_CASE("markov-all universal object dominates iid Markov members per type") {
  std::mt19937 rng(173);
  JointPmf p = testsupport::random_joint(rng, {2, 2, 2});
  FamilySpec fam = FamilySpec::markov_all();
  const int n = 3;
  FamilyUniversal fu(p, fam, n);
  for (int trial = 0; trial < 10; ++trial) {
    Pmf qy = testsupport::random_pmf(rng, 2);
    Channel cx = Channel::normalized(2, 2, testsupport::random_weights(rng, 4));
    Channel cz = Channel::normalized(2, 2, testsupport::random_weights(rng, 4));
    std::vector<double> w(8);
    for (std::size_t x = 0; x < 2; ++x)
      for (std::size_t y = 0; y < 2; ++y)
        for (std::size_t z = 0; z < 2; ++z)
          w[(x * 2 + y) * 2 + z] = qy[y] * cx.at(y, x) * cz.at(y, z);
    JointPmf member = JointPmf::normalized({2, 2, 2}, std::move(w));
    std::vector<double> lq(8);
    for (std::size_t c = 0; c < 8; ++c) lq[c] = std::log(member[c]);
    for (std::size_t t = 0; t < fu.types().size(); ++t) {
      double lmem = fu.types().log_seq_prob(lq, t);
      CHECK(lmem <= fu.log_v() + fu.log_u_seq(t) + 1e-12);
    }
  }
}

TEST_CASE("per-type dominance holds at moderate blocklengths") {
  // iid members of the fixed-marginal family against its universal object:
  // member class mass <= v(n) * universal class mass, type by type
  std::mt19937 rng(149);
  JointPmf p = testsupport::random_joint(rng, {2, 2});
  FamilySpec fam = FamilySpec::fixed_marginal_product(p.marginal(0));
  const int n = 12;
  FamilyUniversal fu(p, fam, n);
  for (int trial = 0; trial < 10; ++trial) {
    Pmf qy = testsupport::random_pmf(rng, 2);
    std::vector<double> w(4);
    for (std::size_t x = 0; x < 2; ++x)
      for (std::size_t y = 0; y < 2; ++y) w[x * 2 + y] = fam.fixed_marginal()[x] * qy[y];
    JointPmf member = JointPmf::normalized({2, 2}, std::move(w));
    std::vector<double> lq(4);
    for (std::size_t c = 0; c < 4; ++c) lq[c] = std::log(member[c]);
    for (std::size_t t = 0; t < fu.types().size(); ++t) {
      double lmem = fu.types().log_seq_prob(lq, t);
      CHECK(lmem <= fu.log_v() + fu.log_u_seq(t) + 1e-12);
    }
  }
}

TEST_CASE("finite-n achievability slack matches the bound") {
  JointPmf p = JointPmf::from_pmf(Pmf({0.5, 0.5}));
  JointPmf q = JointPmf::from_pmf(Pmf({0.25, 0.75}));
  FamilySpec fam = FamilySpec::singleton(q);
  double d = renyi_divergence(p, q, RenyiOrder::one()).value();
  double rate = 0.7 * d;
  for (int n : {8, 16, 32}) {
    FamilyUniversal fu(p, fam, n);
    for (double s : {0.5, 0.8}) {
      double dsn = fu.renyi_divergence_vs_null(RenyiOrder::of(s));
      double lambda = lr_threshold(n, rate, RenyiOrder::of(s), dsn, fu.log_v());
      PerTypeTest test = build_lr_test(fu, lambda);
      double la = log_alpha_of_test(test, fu);
      double ds_single = renyi_divergence(p, q, RenyiOrder::of(s)).value();
      double bound = (1.0 - s) / s * (ds_single - rate) - (1.0 - s) / (s * n) * fu.log_v();
      CHECK(-la / n >= bound - 1e-9);
    }
  }
}
