#include <doctest.h>

#include <cmath>
#include <random>

#include "rht/errors.hpp"
#include "rht/exponents.hpp"
#include "support/test_support.hpp"

using namespace rht;

namespace {

PhiCurve binary_singleton_curve() {
  JointPmf p = JointPmf::from_pmf(Pmf({0.5, 0.5}));
  JointPmf q = JointPmf::from_pmf(Pmf({0.25, 0.75}));
  return PhiCurve(p, FamilySpec::singleton(q));
}

double closed_ds(double s) {
  // D_s for the (1/2,1/2) vs (1/4,3/4) pair
  Pmf p({0.5, 0.5}), q({0.25, 0.75});
  return renyi_divergence(p, q, RenyiOrder::of(s)).value();
}

}  // namespace

TEST_CASE("phi curve basics") {
  PhiCurve curve = binary_singleton_curve();
  CHECK(curve.threshold() == doctest::Approx(0.5 * std::log(4.0 / 3.0)).epsilon(1e-13));
  CHECK(curve.variance() ==
        doctest::Approx(std::pow(std::log(3.0) / 2.0, 2.0)).epsilon(1e-13));
  CHECK(curve.phi(1.0) == doctest::Approx(0.0).epsilon(1e-14));
  // convexity via midpoints
  for (double s : {0.3, 0.8, 1.5, 3.0}) {
    double mid = curve.phi(s);
    double avg = 0.5 * (curve.phi(s - 0.1) + curve.phi(s + 0.1));
    CHECK(mid <= avg + 1e-12);
  }
}

TEST_CASE("numerical derivative matches the analytic one for simple alternatives") {
  // phi(s) = log sum p^s q^{1-s} has the analytic derivative
  // phi'(s) = sum w_s log(p/q) / sum w_s with w_s = p^s q^{1-s}
  PhiCurve curve = binary_singleton_curve();
  Pmf p({0.5, 0.5}), q({0.25, 0.75});
  for (double s : {0.1, 0.35, 0.8, 1.0, 1.4, 3.0, 10.0, 40.0}) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
      double w = std::pow(p[i], s) * std::pow(q[i], 1.0 - s);
      num += w * std::log(p[i] / q[i]);
      den += w;
    }
    double analytic = num / den;
    CHECK(std::abs(curve.phi_prime(s) - analytic) <= 1e-8);
    double psi_analytic = s * analytic - curve.phi(s);
    CHECK(std::abs(psi(curve, s) - psi_analytic) <= 1e-7);
  }
}

TEST_CASE("psi at one equals the threshold divergence") {
  PhiCurve curve = binary_singleton_curve();
  CHECK(std::abs(psi(curve, 1.0) - curve.threshold()) <= 1e-6);

  std::mt19937 rng(67);
  JointPmf p = testsupport::random_joint(rng, {2, 3});
  PhiCurve fam(p, FamilySpec::fixed_marginal_product(p.marginal(0)));
  CHECK(std::abs(psi(fam, 1.0) - fam.threshold()) <= 1e-6);

  // alternating-solver-backed curves behave the same way
  JointPmf p3 = testsupport::random_joint(rng, {2, 2, 2});
  PhiCurve markov(p3, FamilySpec::markov_all());
  CHECK(std::abs(psi(markov, 1.0) - markov.threshold()) <= 1e-6);
  JointPmf p2 = testsupport::random_joint(rng, {2, 2});
  PhiCurve prod(p2, FamilySpec::general_product(1, true));
  CHECK(std::abs(psi(prod, 1.0) - prod.threshold()) <= 1e-6);
}

TEST_CASE("psi vanishes identically when the null is in the family") {
  Pmf p({0.5, 0.5});
  PhiCurve curve(JointPmf::from_pmf(p), FamilySpec::singleton(JointPmf::from_pmf(p)));
  for (double s : {0.2, 0.7, 1.0, 2.0, 10.0})
    CHECK(std::abs(psi(curve, s)) <= 1e-9);
}

TEST_CASE("psi is monotone on the validity interval") {
  PhiCurve curve = binary_singleton_curve();
  std::mt19937 rng(71);
  std::uniform_real_distribution<double> sdist(0.05, 20.0);
  for (int trial = 0; trial < 30; ++trial) {
    double s1 = sdist(rng), s2 = sdist(rng);
    if (s1 > s2) std::swap(s1, s2);
    CHECK(psi(curve, s1) <= psi(curve, s2) + 1e-8);
  }
}

TEST_CASE("critical rates") {
  PhiCurve curve = binary_singleton_curve();
  CHECK(critical_rate(curve, 1.0) == doctest::Approx(curve.threshold()).epsilon(1e-6));
  // full-support singleton: the zero-critical rate is D_0 = 0
  CHECK(std::abs(critical_rate(curve, 0.0)) <= 2e-3);
  // upper critical rate at the clip dominates the max-order divergence
  double d_inf =
      renyi_divergence(Pmf({0.5, 0.5}), Pmf({0.25, 0.75}), RenyiOrder::infinity()).value();
  CHECK(critical_rate(curve, curve.order_upper()) >= d_inf - 1e-6);
}

TEST_CASE("error exponent against a dense grid supremum") {
  PhiCurve curve = binary_singleton_curve();
  const double d = curve.threshold();

  SUBCASE("zero at and above the threshold") {
    auto rep = error_exponent(curve, d);
    CHECK(rep.value == 0.0);
    CHECK(rep.equality_guaranteed);
    CHECK(error_exponent(curve, d * 1.5).value == 0.0);
  }

  SUBCASE("half the threshold matches the dense grid") {
    double rate = 0.5 * d;
    auto rep = error_exponent(curve, rate);
    // independent dense-grid + golden refinement over the closed-form D_s
    double best = 0.0;
    double best_s = 0.5;
    for (int i = 1; i < 20000; ++i) {
      double s = i / 20000.0;
      double v = (1.0 - s) / s * (closed_ds(s) - rate);
      if (v > best) {
        best = v;
        best_s = s;
      }
    }
    double lo = std::max(1e-9, best_s - 1e-4), hi = std::min(1.0 - 1e-9, best_s + 1e-4);
    for (int it = 0; it < 200; ++it) {
      double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
      auto f = [&](double s) { return (1.0 - s) / s * (closed_ds(s) - rate); };
      if (f(m1) < f(m2))
        lo = m1;
      else
        hi = m2;
    }
    double refined = (1.0 - lo) / lo * (closed_ds(lo) - rate);
    best = std::max(best, refined);
    CHECK(rep.value == doctest::Approx(best).epsilon(1e-8));
    CHECK(rep.equality_guaranteed);
  }

  SUBCASE("continuity just below the threshold") {
    double v1 = error_exponent(curve, d - 1e-4).value;
    double v2 = error_exponent(curve, d - 2e-4).value;
    CHECK(v1 > 0.0);
    CHECK(v2 > v1);
    CHECK(v2 - v1 < 1e-4);
  }

  SUBCASE("negative rates are rejected") {
    CHECK_THROWS_AS(error_exponent(curve, -0.1), OrderError);
  }
}

TEST_CASE("strong converse exponent against a dense grid supremum") {
  PhiCurve curve = binary_singleton_curve();
  const double d = curve.threshold();

  SUBCASE("zero at and below the threshold") {
    CHECK(sc_exponent(curve, d).value == 0.0);
    CHECK(sc_exponent(curve, 0.5 * d).value == 0.0);
  }

  SUBCASE("one and a half thresholds matches the dense grid") {
    double rate = 1.5 * d;
    auto rep = sc_exponent(curve, rate);
    double best = 0.0;
    for (int i = 1; i <= 200000; ++i) {
      double s = 1.0 + i * (49.0 / 200000.0);
      double v = (s - 1.0) / s * (rate - closed_ds(s));
      best = std::max(best, v);
    }
    CHECK(rep.value == doctest::Approx(best).epsilon(1e-8));
    CHECK(rep.equality_guaranteed);
  }
}

TEST_CASE("exponents are monotone in the rate") {
  PhiCurve curve = binary_singleton_curve();
  const double d = curve.threshold();
  double prev_e = 1e9, prev_sc = -1.0;
  for (double f : {0.3, 0.5, 0.7, 0.9, 1.1, 1.4, 1.8}) {
    double e = error_exponent(curve, f * d).value;
    double sc = sc_exponent(curve, f * d).value;
    CHECK(e <= prev_e + 1e-12);
    CHECK(sc >= prev_sc - 1e-12);
    prev_e = e;
    prev_sc = sc;
  }
}

TEST_CASE("bisection agrees with the direct golden-section supremum") {
  PhiCurve curve = binary_singleton_curve();
  const double d = curve.threshold();
  for (double f : {0.4, 0.6, 0.8, 0.95}) {
    auto rep = error_exponent(curve, f * d);
    double direct = grid_sup_exponent(curve, f * d, /*error_side=*/true, 4096);
    CHECK(rep.value == doctest::Approx(direct).epsilon(1e-8));
  }
  for (double f : {1.05, 1.2, 1.5, 2.0}) {
    auto rep = sc_exponent(curve, f * d);
    double direct = grid_sup_exponent(curve, f * d, /*error_side=*/false, 4096);
    CHECK(rep.value == doctest::Approx(direct).epsilon(1e-8));
  }
}

TEST_CASE("envelope property of the inner minimizer") {
  std::mt19937 rng(73);
  JointPmf p = testsupport::random_joint(rng, {3, 3});
  FamilySpec fam = FamilySpec::fixed_marginal_product(p.marginal(0));
  PhiCurve curve(p, fam);
  for (double s0 : {0.6, 1.7}) {
    // freeze the minimizer at s0 and differentiate both curves there
    auto frozen = family_divergence(p, fam, RenyiOrder::of(s0));
    auto bar_phi = [&](double s) {
      return (s - 1.0) * renyi_divergence(p, frozen.argmin, RenyiOrder::of(s)).value();
    };
    double h = 1e-5;
    double d_bar = (bar_phi(s0 + h) - bar_phi(s0 - h)) / (2 * h);
    double d_phi = curve.phi_prime(s0);
    CHECK(std::abs(d_bar - d_phi) <= 1e-5);
  }
}

TEST_CASE("taylor expansion of the family divergence at one") {
  std::mt19937 rng(79);
  JointPmf p = testsupport::random_joint(rng, {2, 2});
  FamilySpec fam = FamilySpec::fixed_marginal_product(p.marginal(0));
  PhiCurve curve(p, fam);
  const double d = curve.threshold(), v = curve.variance();
  auto resid = [&](double h) { return curve.divergence(1.0 + h) - d - 0.5 * h * v; };
  // quadratic scaling: r(h/10) is about a hundredth of r(h)
  for (double h : {1e-2, -1e-2}) {
    double big = resid(h), small = resid(h / 10.0);
    CHECK(std::abs(small) <= std::abs(big) / 100.0 * 3.0 + 1e-10);
  }
}

TEST_CASE("second order alpha") {
  PhiCurve curve = binary_singleton_curve();
  CHECK(second_order_alpha(curve, 0.0) == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(second_order_alpha(curve, 50.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(second_order_alpha(curve, -50.0) == doctest::Approx(0.0).epsilon(1e-12));
  double v = std::pow(std::log(3.0) / 2.0, 2.0);
  CHECK(second_order_alpha(curve, 0.5) ==
        doctest::Approx(normal_cdf(0.5 / std::sqrt(v))).epsilon(1e-13));

  Pmf p({0.5, 0.5});
  PhiCurve degenerate(JointPmf::from_pmf(p), FamilySpec::singleton(JointPmf::from_pmf(p)));
  CHECK_THROWS_AS(second_order_alpha(degenerate, 0.0), DegenerateError);
}

TEST_CASE("normal cdf reference values") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(normal_cdf(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-12));
  CHECK(normal_cdf(-1.0) == doctest::Approx(0.15865525393145707).epsilon(1e-12));
  CHECK(normal_cdf(2.0) == doctest::Approx(0.9772498680518208).epsilon(1e-12));
}

TEST_CASE("rates below the lower critical rate fall back to the grid bound") {
  // only product families have a positive lower interval endpoint, so the
  // low-rate regime with no psi root is reachable there
  std::mt19937 rng(151);
  JointPmf p = testsupport::random_joint(rng, {2, 2}, 0.02);
  PhiCurve curve(p, FamilySpec::general_product(1, true));
  double r_a = critical_rate(curve, curve.order_lower());
  if (r_a > 1e-6) {
    auto rep = error_exponent(curve, 0.5 * r_a);
    CHECK_FALSE(rep.equality_guaranteed);
    CHECK(rep.value >= 0.0);
    // still a valid lower bound achieved somewhere on the open interval
    double probe_s = 0.5 * (curve.order_lower() + 1.0);
    double probe = (1.0 - probe_s) / probe_s * (curve.divergence(probe_s) - 0.5 * r_a);
    CHECK(rep.value >= probe - 1e-9);
  }
  auto mid = error_exponent(curve, 0.5 * (r_a + curve.threshold()));
  CHECK(mid.equality_guaranteed);
}

TEST_CASE("threshold rates of the named testing problems") {
  std::mt19937 rng(83);
  SUBCASE("fixed marginal with own marginal: mutual information") {
    JointPmf p = testsupport::random_joint(rng, {2, 3});
    PhiCurve curve(p, FamilySpec::fixed_marginal_product(p.marginal(0)));
    std::array<Pmf, 2> fs{p.marginal(0), p.marginal(1)};
    double mi = renyi_divergence(p, JointPmf::product(fs), RenyiOrder::one()).value();
    CHECK(threshold_rate(curve) == doctest::Approx(mi).epsilon(1e-12));
  }
  SUBCASE("uniform fixed marginal: log|X| minus the conditional entropy") {
    JointPmf p = testsupport::random_joint(rng, {3, 2});
    PhiCurve curve(p, FamilySpec::fixed_marginal_product(Pmf::uniform(3)));
    // H(X|Y) from the joint
    Pmf py = p.marginal(1);
    double hxy = 0.0;
    for (std::size_t y = 0; y < 2; ++y)
      for (std::size_t x = 0; x < 3; ++x) {
        double v = p[x * 2 + y];
        if (v > 0.0) hxy -= v * std::log(v / py[y]);
      }
    CHECK(threshold_rate(curve) == doctest::Approx(std::log(3.0) - hxy).epsilon(1e-12));
  }

  SUBCASE("markov recovery: conditional mutual information") {
    JointPmf p = testsupport::random_joint(rng, {2, 2, 2});
    PhiCurve curve(p, FamilySpec::markov_recovery());
    auto proj = closed_form_measure(MeasureKind::kCondMutualInfoFixedAll, p, RenyiOrder::one());
    CHECK(threshold_rate(curve) == doctest::Approx(proj.value.value()).epsilon(1e-12));
  }
  SUBCASE("null inside the family: zero") {
    std::array<Pmf, 2> fs{Pmf({0.3, 0.7}), Pmf({0.6, 0.4})};
    JointPmf p = JointPmf::product(fs);
    PhiCurve curve(p, FamilySpec::general_product(1, true));
    CHECK(threshold_rate(curve) == doctest::Approx(0.0).epsilon(1e-12));
  }
}
