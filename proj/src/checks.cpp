#include "rvlab/checks.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>

#include "rvlab/analysis.hpp"
#include "rvlab/harness.hpp"
#include "rvlab/hartree.hpp"
#include "rvlab/vlasov.hpp"
#include "rvlab/wigner_weyl.hpp"

namespace rvlab {

namespace {

double rel_drift(double now, double ref) { return std::abs(now - ref) / std::max(std::abs(ref), 1e-300); }

void transform_checks(std::mt19937_64& rng, std::vector<CheckResult>& out) {
  const TorusGrid g(2, 8, 10.0);
  const double eps = 0.25;
  std::normal_distribution<double> normal;
  OperatorMatrix A{g, Matrix(g.size(), g.size())};
  for (Eigen::Index i = 0; i < A.A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.A.cols(); ++j) A.A(i, j) = cplx(normal(rng), normal(rng));
  A.A = (A.A + A.A.adjoint()).eval();
  const auto W = wigner_transform(A, eps);
  const auto B = weyl_quantize(W.W, eps);
  const double err = (B.A - A.A).cwiseAbs().maxCoeff() / A.A.cwiseAbs().maxCoeff();
  out.push_back({"transform round trip", err, 1e-10, err <= 1e-10});
  double integral = 0;
  for (double v : W.W.f) integral += v;
  integral *= g.cell() * W.W.vg.cell();
  const double bridge = rel_drift(integral, std::pow(eps, g.d) * A.trace());
  out.push_back({"mass bridge", bridge, 1e-10, bridge <= 1e-10});
}

void inequality_checks(std::mt19937_64& rng, int count, std::vector<CheckResult>& out) {
  const TorusGrid xg(2, 4, 1.0);
  const VelocityGrid vg(2, 16, 4.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int failures = 0;
  double worst = 0;
  for (int k = 0; k < count; ++k) {
    PhaseSpaceDensity f(xg, vg);
    for (auto& v : f.f) v = u(rng);
    for (const auto& r : moment_inequality_suite(f)) {
      if (!r.pass) ++failures;
      if (r.rhs > 0) worst = std::max(worst, r.lhs / r.rhs);
    }
  }
  out.push_back({"moment inequalities (worst lhs/rhs)", worst, 1.0, failures == 0});
}

void vlasov_checks(bool quick, std::vector<CheckResult>& out) {
  const TorusGrid xg(2, 16, 10.0);
  const VelocityGrid vg(2, 32, 6.0);
  const auto f0 = build_initial(PresetParams{}, xg, vg);
  VlasovConfig cfg;
  cfg.dt = quick ? 5e-3 : 1e-3;
  const double T = quick ? 0.05 : 0.2;

  const auto K = build_kernel(2, 0.0, 1.0, xg, KernelMode::spectral_symbol);
  const auto r = evolve(f0, K, T, cfg);
  const auto& a = r.series.front();
  const auto& b = r.series.back();
  out.push_back({"vlasov mass drift", rel_drift(b.mass, a.mass), 1e-12, rel_drift(b.mass, a.mass) <= 1e-12});
  out.push_back({"vlasov L2 drift", rel_drift(b.l2, a.l2), 1e-6, rel_drift(b.l2, a.l2) <= 1e-6});

  const auto K0 = build_kernel(2, 0.0, 0.0, xg, KernelMode::spectral_symbol);
  const auto r0 = evolve(f0, K0, T, cfg);
  double m = 0;
  for (std::size_t k = 0; k < cfg.moments.size(); ++k)
    m = std::max(m, rel_drift(r0.series.back().moments[k], r0.series.front().moments[k]));
  out.push_back({"free-flow moment drift", m, 1e-10, m <= 1e-10});
}

void hartree_checks(std::mt19937_64& rng, bool quick, std::vector<CheckResult>& out) {
  const TorusGrid g(2, 16, 10.0);
  const int M = 4;
  std::normal_distribution<double> normal;
  Matrix X(g.size(), M);
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < M; ++j) X(i, j) = cplx(normal(rng), normal(rng));
  Eigen::HouseholderQR<Matrix> qr(X);
  OrbitalEnsemble ens{g, epsilon_of(M, 2), double(M), std::vector<double>(M, 1.0), Matrix()};
  ens.psi = qr.householderQ() * Matrix::Identity(g.size(), M) / std::sqrt(g.cell());

  HartreeStepperConfig cfg;
  cfg.mode = HartreeMode::hartree_fock;
  cfg.dt = 0.01;
  const auto K = build_kernel(2, 0.0, 1.0, g, KernelMode::spectral_symbol);
  const auto r = evolve(ens, K, quick ? 0.05 : 0.2, cfg);
  const double tr = rel_drift(r.series.back().trace, double(M));
  out.push_back({"hartree-fock trace", tr, 1e-12, tr <= 1e-12});
  const double od = r.series.back().ortho_drift;
  out.push_back({"hartree-fock overlap drift", od, 1e-6, od <= 1e-6});
}

}  // namespace

std::vector<CheckResult> run_check_suite(std::uint64_t seed, bool quick) {
  std::mt19937_64 rng(seed);
  std::vector<CheckResult> out;
  transform_checks(rng, out);
  inequality_checks(rng, quick ? 10 : 100, out);
  vlasov_checks(quick, out);
  hartree_checks(rng, quick, out);
  return out;
}

void print_checks(std::ostream& os, const std::vector<CheckResult>& results) {
  for (const auto& r : results)
    os << (r.pass ? "PASS " : "FAIL ") << r.name << ": " << std::setprecision(4) << r.value << " (limit " << r.limit
       << ")\n";
}

}  // namespace rvlab
