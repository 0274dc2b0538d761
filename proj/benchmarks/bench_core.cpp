#include <benchmark/benchmark.h>

#include <random>

#include "rht/exponents.hpp"
#include "rht/families.hpp"
#include "rht/oracle.hpp"
#include "rht/types_method.hpp"

namespace {

rht::JointPmf random_joint(std::mt19937& rng, std::vector<std::size_t> shape) {
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  std::size_t total = 1;
  for (auto s : shape) total *= s;
  std::vector<double> w(total);
  for (auto& v : w) v = unif(rng);
  return rht::JointPmf::normalized(std::move(shape), std::move(w));
}

void BM_RenyiDivergence(benchmark::State& state) {
  std::mt19937 rng(1);
  std::size_t d = static_cast<std::size_t>(state.range(0));
  rht::JointPmf p = random_joint(rng, {d});
  rht::JointPmf q = random_joint(rng, {d});
  rht::RenyiOrder s = rht::RenyiOrder::of(1.7);
  for (auto _ : state) {
    auto v = rht::renyi_divergence(p, q, s);
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_RenyiDivergence)->RangeMultiplier(4)->Range(4, 1024);

void BM_SibsonMinimize(benchmark::State& state) {
  std::mt19937 rng(2);
  std::size_t d = static_cast<std::size_t>(state.range(0));
  rht::JointPmf p = random_joint(rng, {d, d});
  rht::Pmf t = p.marginal(0);
  rht::RenyiOrder s = rht::RenyiOrder::of(2.0);
  for (auto _ : state) {
    auto res = rht::sibson_minimize(p, t, s);
    benchmark::DoNotOptimize(res.divergence);
  }
}
BENCHMARK(BM_SibsonMinimize)->RangeMultiplier(2)->Range(2, 32);

void BM_AltMinProduct(benchmark::State& state) {
  std::mt19937 rng(3);
  std::size_t d = static_cast<std::size_t>(state.range(0));
  rht::JointPmf p = random_joint(rng, {d, d});
  rht::FamilySpec fam = rht::FamilySpec::general_product(1, true);
  rht::RenyiOrder s = rht::RenyiOrder::of(1.5);
  for (auto _ : state) {
    auto res = rht::alt_min_product(p, fam, s);
    benchmark::DoNotOptimize(res.iterations);
  }
}
BENCHMARK(BM_AltMinProduct)->RangeMultiplier(2)->Range(2, 16);

void BM_TypeEnumeration(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto types = rht::enumerate_types(4, n);
    benchmark::DoNotOptimize(types.size());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_TypeEnumeration)->RangeMultiplier(2)->Range(8, 128)->Complexity();

void BM_NeymanPearson(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  rht::Pmf p({0.5, 0.5}), q({0.25, 0.75});
  double d = rht::renyi_divergence(p, q, rht::RenyiOrder::one()).value();
  for (auto _ : state) {
    auto res = rht::np_simple(p, q, n, -0.8 * d * n);
    benchmark::DoNotOptimize(res.alpha);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_NeymanPearson)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

void BM_ErrorExponent(benchmark::State& state) {
  std::mt19937 rng(4);
  rht::JointPmf p = random_joint(rng, {3, 3});
  rht::PhiCurve curve(p, rht::FamilySpec::fixed_marginal_product(p.marginal(0)));
  double rate = 0.6 * curve.threshold();
  for (auto _ : state) {
    auto rep = rht::error_exponent(curve, rate);
    benchmark::DoNotOptimize(rep.value);
  }
}
BENCHMARK(BM_ErrorExponent);

}  // namespace

BENCHMARK_MAIN();
