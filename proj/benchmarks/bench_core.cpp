// Microbenchmarks for the numeric kernels: Lambert evaluation, the top-k
// simplex projections across dimensions, and the variable-fixing knapsack
// solver against a sort-and-scan baseline.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <benchmark/benchmark.h>

#include <sdca/bipartite.hpp>
#include <sdca/entropy_prox.hpp>
#include <sdca/knapsack.hpp>
#include <sdca/lambert.hpp>
#include <sdca/random.hpp>
#include <sdca/topk_simplex.hpp>

namespace {

std::vector<double> random_vector(int n, double lo, double hi,
                                  std::uint64_t seed) {
  sdca::Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.next_uniform(lo, hi);
  return v;
}

void bm_lambert(benchmark::State& state) {
  const auto ts = random_vector(4096, -700.0, 700.0, 11);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sdca::lambert_v(ts[i]));
    i = (i + 1) & 4095;
  }
}
BENCHMARK(bm_lambert);

void bm_topk_alpha(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const auto b = random_vector(m, -2.0, 2.0, 12);
  const int k = std::max(1, m / 10);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sdca::project_topk_alpha(b, k, 1.0));
  }
  state.SetComplexityN(m);
}
BENCHMARK(bm_topk_alpha)->RangeMultiplier(4)->Range(8, 8192)->Complexity();

void bm_bipartite(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const auto b = random_vector(m, -1.0, 2.0, 13);
  const auto bbar = random_vector(m, -1.0, 2.0, 14);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sdca::project_bipartite(b, bbar, 1.0));
  }
  state.SetComplexityN(m);
}
BENCHMARK(bm_bipartite)->RangeMultiplier(4)->Range(8, 4096)->Complexity();

void bm_topk_entropy_prox(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const auto b = random_vector(m, -4.0, 4.0, 15);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sdca::prox_topk_entropy_dual(b, 0.5, 3));
  }
  state.SetComplexityN(m);
}
BENCHMARK(bm_topk_entropy_prox)->RangeMultiplier(4)->Range(8, 4096)->Complexity();

// Sort-and-scan baseline for the box-constrained knapsack, for comparison
// with the variable-fixing solver.
std::vector<double> knapsack_sorted(const std::vector<double>& b, double lo,
                                    double hi, double radius) {
  std::vector<double> breaks;
  breaks.reserve(2 * b.size());
  for (double v : b) {
    breaks.push_back(v - hi);
    breaks.push_back(v - lo);
  }
  std::sort(breaks.begin(), breaks.end());
  auto mass = [&](double t) {
    double s = 0.0;
    for (double v : b) s += std::clamp(v - t, lo, hi);
    return s;
  };
  std::size_t lo_i = 0, hi_i = breaks.size() - 1;
  while (lo_i + 1 < hi_i) {
    const std::size_t mid = (lo_i + hi_i) / 2;
    (mass(breaks[mid]) >= radius ? lo_i : hi_i) = mid;
  }
  double t = breaks[lo_i];
  const double m0 = mass(breaks[lo_i]);
  const double m1 = mass(breaks[hi_i]);
  if (m0 != m1) t += (m0 - radius) / (m0 - m1) * (breaks[hi_i] - breaks[lo_i]);
  std::vector<double> x(b.size());
  for (std::size_t j = 0; j < b.size(); ++j) x[j] = std::clamp(b[j] - t, lo, hi);
  return x;
}

void bm_knapsack_fixing(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const auto b = random_vector(m, -2.0, 2.0, 16);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sdca::solve_knapsack(b, 0.0, 1.0, 1.0, true));
  }
  state.SetComplexityN(m);
}
BENCHMARK(bm_knapsack_fixing)->RangeMultiplier(4)->Range(8, 8192)->Complexity();

void bm_knapsack_sorted(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const auto b = random_vector(m, -2.0, 2.0, 16);
  for (auto _ : state) {
    benchmark::DoNotOptimize(knapsack_sorted(b, 0.0, 1.0, 1.0));
  }
  state.SetComplexityN(m);
}
BENCHMARK(bm_knapsack_sorted)->RangeMultiplier(4)->Range(8, 8192)->Complexity();

}  // namespace

BENCHMARK_MAIN();
