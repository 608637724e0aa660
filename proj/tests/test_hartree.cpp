#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "rvlab/error.hpp"
#include "rvlab/hartree.hpp"

using namespace rvlab;

namespace {

constexpr double kPi = std::numbers::pi;

OrbitalEnsemble wave_packet(const TorusGrid& g, double eps, double N) {
  OrbitalEnsemble e{g, eps, N, {N}, Matrix(g.size(), 1)};
  const Lattice lat = g.lattice();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto x = lat.unflatten(i);
    const double dx = g.node(x[0]) - 0.4 * g.L, dy = g.node(x[1]) - 0.55 * g.L;
    e.psi(i, 0) = std::exp(-(dx * dx + dy * dy) / 2.0) * std::polar(1.0, 2 * kPi * (2 * dx + dy) / g.L);
  }
  e.psi /= std::sqrt(g.cell()) * e.psi.norm();
  return e;
}

OrbitalEnsemble random_state(const TorusGrid& g, int M, double N, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> normal;
  // smooth random orbitals: a few low Fourier modes
  Matrix X = Matrix::Zero(g.size(), M);
  const Lattice lat = g.lattice();
  for (int j = 0; j < M; ++j)
    for (int m = 0; m < 6; ++m) {
      const int k0 = static_cast<int>(rng() % 5) - 2, k1 = static_cast<int>(rng() % 5) - 2;
      const cplx c(normal(rng), normal(rng));
      for (std::size_t i = 0; i < g.size(); ++i) {
        const auto x = lat.unflatten(i);
        X(i, j) += c * std::polar(1.0, 2 * kPi * (k0 * x[0] + k1 * x[1]) / double(g.n));
      }
    }
  Eigen::HouseholderQR<Matrix> qr(X);
  OrbitalEnsemble e{g, epsilon_of(N, g.d), N, {}, Matrix()};
  e.psi = qr.householderQ() * Matrix::Identity(g.size(), M) / std::sqrt(g.cell());
  for (int j = 0; j < M; ++j) e.occ.push_back(N / M);
  return e;
}

// exp(-i t T / eps) psi with T = sqrt(1 - eps^2 Laplacian) assembled as a dense
// matrix from an explicit DFT basis.
Matrix dense_free_flow(const TorusGrid& g, double eps, double t, const Matrix& psi) {
  const auto n = static_cast<Eigen::Index>(g.size());
  const Lattice lat = g.lattice();
  Matrix F(n, n);
  std::vector<double> sym(static_cast<std::size_t>(n));
  for (Eigen::Index m = 0; m < n; ++m) {
    const auto km = lat.unflatten(static_cast<std::size_t>(m));
    double k2 = 0;
    for (int a = 0; a < g.d; ++a) k2 += std::pow(lat.wavenumber(km[a]), 2);
    sym[static_cast<std::size_t>(m)] = std::sqrt(1 + eps * eps * k2) / eps;
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto xj = lat.unflatten(static_cast<std::size_t>(j));
      double ph = 0;
      for (int a = 0; a < g.d; ++a) ph += double(km[a]) * xj[a] / g.n;
      F(m, j) = std::polar(1.0 / std::sqrt(double(n)), -2 * kPi * ph);
    }
  }
  Matrix T = F.adjoint() * Eigen::VectorXd::Map(sym.data(), n).cast<cplx>().asDiagonal() * F;
  Eigen::SelfAdjointEigenSolver<Matrix> es(T);
  const Eigen::VectorXcd ph = (es.eigenvalues().cast<cplx>() * cplx(0, -t)).array().exp();
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint() * psi;
}

double evolve_error(const OrbitalEnsemble& e, const InteractionKernel& K, double T, double dt, HartreeMode mode) {
  HartreeStepperConfig cfg;
  cfg.dt = dt;
  cfg.mode = mode;
  cfg.monitor_every = 1000000;
  cfg.unitarity_tol = 1.0;
  const auto r = evolve(e, K, T, cfg);
  const Matrix ref = dense_free_flow(e.grid, e.eps, T, e.psi);
  return (r.final_state.psi - ref).cwiseAbs().maxCoeff() / ref.cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("free evolution matches the dense matrix exponential") {
  const TorusGrid g(2, 12, 8.0);
  const auto e = wave_packet(g, 0.3, 1.0);
  const auto K0 = build_kernel(2, 0.0, 0.0, g, KernelMode::spectral_symbol);
  CHECK(evolve_error(e, K0, 0.3, 0.1, HartreeMode::hartree) < 1e-12);
}

TEST_CASE("a single Hartree-Fock orbital feels no self-interaction") {
  // direct and exchange terms cancel for one orbital: the flow is free up to the splitting error
  const TorusGrid g(2, 16, 8.0);
  const auto e = wave_packet(g, 0.3, 1.0);
  const auto K = build_kernel(2, 0.0, 1.0, g, KernelMode::spectral_symbol);
  const double e1 = evolve_error(e, K, 0.2, 0.02, HartreeMode::hartree_fock);
  const double e2 = evolve_error(e, K, 0.2, 0.01, HartreeMode::hartree_fock);
  CHECK(e2 < 1e-3);
  CHECK(e1 / e2 > 3.5);
  // Hartree alone keeps the self-interaction
  CHECK(evolve_error(e, K, 0.2, 0.01, HartreeMode::hartree) > 10 * e2);
}

TEST_CASE("uniform plane-wave states are stationary up to their phases") {
  const TorusGrid g(2, 8, 6.0);
  OrbitalEnsemble e{g, 0.5, 1.0, {1.0}, Matrix::Constant(g.size(), 1, 1.0 / std::sqrt(g.volume()))};
  const auto K = build_kernel(2, 0.0, 2.0, g, KernelMode::spectral_symbol);
  HartreeStepperConfig cfg;
  cfg.dt = 0.05;
  const auto r = evolve(e, K, 0.5, cfg);
  const cplx phase = std::polar(1.0, -0.5 / 0.5);
  CHECK((r.final_state.psi - phase * e.psi).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("exchange energy equals the expectation of the exchange operator") {
  const TorusGrid g(2, 8, 5.0);
  const auto e = random_state(g, 3, 3.0, 7);
  const auto K = build_kernel(2, 0.0, 1.0, g, KernelMode::spectral_symbol);
  const ExchangeOperator X(K);
  const Matrix Xpsi = X.apply(e);
  double expect = 0;
  for (int j = 0; j < e.rank(); ++j) expect += e.occ[j] * g.cell() * e.psi.col(j).dot(Xpsi.col(j)).real();
  const auto en = hf_energy(e, K, HartreeMode::hartree_fock);
  CHECK(en.exchange == doctest::Approx(-0.5 * expect).epsilon(1e-12));
  CHECK(hf_energy(e, K, HartreeMode::hartree).exchange == 0.0);
}

TEST_CASE("conservation laws of the split-step Hartree-Fock flow") {
  const TorusGrid g(2, 12, 6.0);
  const auto e = random_state(g, 6, 6.0, 11);
  const auto K = build_kernel(2, 0.0, 1.0, g, KernelMode::spectral_symbol);
  auto drift = [&](double dt) {
    HartreeStepperConfig cfg;
    cfg.dt = dt;
    cfg.mode = HartreeMode::hartree_fock;
    const auto r = evolve(e, K, 0.4, cfg);
    double worst = 0;
    for (const auto& d : r.series) worst = std::max(worst, std::abs(d.e_hf - r.series.front().e_hf));
    CHECK(std::abs(r.series.back().trace - 6.0) < 1e-12);
    CHECK(r.series.back().ortho_drift < 1e-8);
    return worst;
  };
  const double ratio = drift(0.02) / drift(0.01);
  CHECK(ratio > 3.5);
  CHECK(ratio < 4.5);
}

TEST_CASE("serial and parallel kernels agree") {
  const TorusGrid g(2, 8, 6.0);
  const auto e = random_state(g, 4, 4.0, 3);
  const auto K = build_kernel(2, 0.0, 1.0, g, KernelMode::spectral_symbol);
  HartreeStepperConfig a, b;
  a.exec = Exec::serial;
  b.exec = Exec::parallel;
  a.mode = b.mode = HartreeMode::hartree_fock;
  const auto ra = evolve(e, K, 0.1, a), rb = evolve(e, K, 0.1, b);
  CHECK((ra.final_state.psi - rb.final_state.psi).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("monitoring rejects excessive overlap drift and flags strong attraction") {
  const TorusGrid g(2, 8, 6.0);
  const auto e = random_state(g, 4, 4.0, 5);
  const auto K = build_kernel(2, 0.0, 1.0, g, KernelMode::spectral_symbol);
  HartreeStepperConfig cfg;
  cfg.mode = HartreeMode::hartree_fock;
  cfg.unitarity_tol = 1e-30;
  CHECK_THROWS_AS(evolve(e, K, 0.1, cfg), StepRejected);

  const TorusGrid g3(3, 4, 4.0);
  const auto e3 = random_state(g3, 2, 2.0, 9);
  const auto attract = build_kernel(3, 1.0, -100.0, g3, KernelMode::spectral_symbol);
  CHECK_FALSE(coulomb_smallness_ok(attract, e3, 1.0));
  HartreeStepperConfig c3;
  c3.unitarity_tol = 1e9;
  const auto r = evolve(e3, attract, 0.0, c3);
  CHECK(r.warnings.size() == 1);
  CHECK(coulomb_smallness_ok(build_kernel(3, 1.0, 1.0, g3, KernelMode::spectral_symbol), e3, 1.0));
}
