#include <benchmark/benchmark.h>

#include "pclqr/basis.hpp"
#include "pclqr/galerkin.hpp"
#include "pclqr/numerics.hpp"
#include "pclqr/rng.hpp"
#include "pclqr/stability.hpp"
#include "pclqr/synthesis.hpp"

namespace {

using namespace pclqr;

UncertainLTI bench_system(int n, int m, int n_ord) {
  SplitMix64 gen(7);
  UncertainLTI sys;
  sys.n = n;
  sys.m = m;
  sys.basis.model_order = n_ord;
  sys.basis.approx_order = n_ord;
  for (int i = 0; i <= n_ord; ++i) {
    Matrix a(n, n), b(n, m);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) a(r, c) = gen.uniform_pm1();
      for (int c = 0; c < m; ++c) b(r, c) = gen.uniform_pm1();
    }
    if (i == 0) {
      a *= 0.8 / spectrum(a).spectral_radius;
    } else {
      a *= 0.05;
    }
    sys.A.push_back(a);
    sys.B.push_back(b);
  }
  return sys;
}

CostWeights bench_weights(int n, int m) {
  CostWeights w;
  w.Q = Matrix::Identity(n, n);
  w.R = Matrix::Identity(m, m);
  return w;
}

void BM_MomentTensor6(benchmark::State& state) {
  BasisSpec spec;
  const int max_index = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto tensor = moment_tensor(spec, 6, max_index);
    benchmark::DoNotOptimize(tensor.entries().data());
  }
}
BENCHMARK(BM_MomentTensor6)->Arg(3)->Arg(5)->Arg(7);

void BM_BuildReduced(benchmark::State& state) {
  const int order = static_cast<int>(state.range(0));
  auto sys = bench_system(4, 2, 5);
  auto w = bench_weights(4, 2);
  for (auto _ : state) {
    auto red = build_reduced(sys, w, order);
    benchmark::DoNotOptimize(red.A.data());
  }
}
BENCHMARK(BM_BuildReduced)->Arg(3)->Arg(5)->Arg(7);

void BM_AssembleW(benchmark::State& state) {
  const int order = static_cast<int>(state.range(0));
  auto sys = bench_system(4, 2, 5);
  auto coeffs = closed_loop_coeffs(sys, std::nullopt);
  EmsOperator op(coeffs, sys.basis, order);
  Matrix p = Matrix::Identity(op.dimension(), op.dimension());
  for (auto _ : state) {
    Matrix w = op.apply(p);
    benchmark::DoNotOptimize(w.data());
  }
}
BENCHMARK(BM_AssembleW)->Arg(1)->Arg(3)->Arg(5);

void BM_Dare(benchmark::State& state) {
  const int order = static_cast<int>(state.range(0));
  auto sys = bench_system(4, 2, 5);
  auto red = build_reduced(sys, bench_weights(4, 2), order);
  for (auto _ : state) {
    auto sol = dare(red.A, red.B, red.Q, red.R);
    benchmark::DoNotOptimize(sol.P.data());
  }
}
BENCHMARK(BM_Dare)->Arg(1)->Arg(3)->Arg(7);

void BM_Synthesize(benchmark::State& state) {
  const int order = static_cast<int>(state.range(0));
  auto sys = bench_system(4, 2, 5);
  auto w = bench_weights(4, 2);
  for (auto _ : state) {
    auto result = synthesize(sys, w, order, false);
    benchmark::DoNotOptimize(result.K.data());
  }
}
BENCHMARK(BM_Synthesize)->Arg(3)->Arg(7);

void BM_CertifyEms(benchmark::State& state) {
  const int order = static_cast<int>(state.range(0));
  auto sys = bench_system(3, 1, 2);
  for (auto _ : state) {
    auto cert = certify_ems(sys, std::nullopt, order);
    benchmark::DoNotOptimize(cert.margin);
  }
}
BENCHMARK(BM_CertifyEms)->Arg(0)->Arg(2)->Arg(4);

}  // namespace

BENCHMARK_MAIN();
