// Serial reference vs OpenMP kernels. Arg 0 = serial, 1 = parallel.
#include <benchmark/benchmark.h>

#include <random>

#include "rvlab/harness.hpp"
#include "rvlab/hartree.hpp"
#include "rvlab/vlasov.hpp"
#include "rvlab/wigner_weyl.hpp"

using namespace rvlab;

namespace {

Exec exec_of(const benchmark::State& s) { return s.range(0) == 0 ? Exec::serial : Exec::parallel; }

PhaseSpaceDensity density() {
  PresetParams p;
  p.name = "modulated-gaussian";
  p.modulation_amplitude = 0.5;
  return build_initial(p, TorusGrid(2, 16, 10.0), VelocityGrid(2, 64, 6.0));
}

OrbitalEnsemble ensemble(int n, int M) {
  const TorusGrid g(2, n, 10.0);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  Matrix X(g.size(), M);
  for (Eigen::Index j = 0; j < M; ++j)
    for (Eigen::Index i = 0; i < X.rows(); ++i) X(i, j) = cplx(normal(rng), normal(rng));
  Eigen::HouseholderQR<Matrix> qr(X);
  OrbitalEnsemble ens{g, epsilon_of(M, 2), double(M), std::vector<double>(M, 1.0), Matrix()};
  ens.psi = qr.householderQ() * Matrix::Identity(g.size(), M) / std::sqrt(g.cell());
  return ens;
}

void BM_x_advect(benchmark::State& s) {
  auto f = density();
  for (auto _ : s) {
    x_advect(f, 1e-3, exec_of(s));
    benchmark::DoNotOptimize(f.f.data());
  }
}

void BM_v_advect(benchmark::State& s) {
  auto f = density();
  const auto K = build_kernel(2, 0.0, 1.0, f.xg, KernelMode::spectral_symbol);
  const auto E = force(K, f.density());
  for (auto _ : s) {
    v_advect(f, E, 1e-3, exec_of(s));
    benchmark::DoNotOptimize(f.f.data());
  }
}

void BM_vlasov_step(benchmark::State& s) {
  auto f = density();
  const auto K = build_kernel(2, 0.0, 1.0, f.xg, KernelMode::spectral_symbol);
  VlasovConfig cfg;
  cfg.exec = exec_of(s);
  for (auto _ : s) {
    vlasov_step(f, K, 1e-3, cfg);
    benchmark::DoNotOptimize(f.f.data());
  }
}

void BM_kinetic_half_step(benchmark::State& s) {
  auto ens = ensemble(32, 64);
  for (auto _ : s) {
    kinetic_half_step(ens, 1e-2, exec_of(s));
    benchmark::DoNotOptimize(ens.psi.data());
  }
}

void BM_hartree_fock_substep(benchmark::State& s) {
  auto ens = ensemble(24, 64);
  const auto K = build_kernel(2, 0.0, 1.0, ens.grid, KernelMode::spectral_symbol);
  const ExchangeOperator X(K);
  for (auto _ : s) {
    meanfield_exchange_step(ens, K, 1e-2, HartreeMode::hartree_fock, &X, exec_of(s));
    benchmark::DoNotOptimize(ens.psi.data());
  }
}

void BM_wigner_transform(benchmark::State& s) {
  const auto ens = ensemble(16, 64);
  const auto A = to_matrix(ens);
  for (auto _ : s) benchmark::DoNotOptimize(wigner_transform(A, ens.eps, exec_of(s)).W.f.data());
}

}  // namespace

BENCHMARK(BM_x_advect)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_v_advect)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_vlasov_step)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_kinetic_half_step)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_hartree_fock_substep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_wigner_transform)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
