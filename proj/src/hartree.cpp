#include "rvlab/hartree.hpp"

#include <cmath>
#include <memory>
#include <sstream>

#include "rvlab/error.hpp"
#include "rvlab/log.hpp"

namespace rvlab {

HartreeMode parse_hartree_mode(const std::string& s) {
  if (s == "hartree") return HartreeMode::hartree;
  if (s == "hartree-fock") return HartreeMode::hartree_fock;
  throw ConfigError("hartree mode must be hartree or hartree-fock, got '" + s + "'");
}

std::string to_string(HartreeMode m) { return m == HartreeMode::hartree ? "hartree" : "hartree-fock"; }

namespace {

std::vector<double> dispersion(const TorusGrid& g, double eps) {
  const RField k2 = wavenumber_squared(g.lattice());
  std::vector<double> t(k2.size());
  for (std::size_t i = 0; i < k2.size(); ++i) t[i] = std::sqrt(1.0 + eps * eps * k2[i]);
  return t;
}

// Multiplies every orbital by a diagonal in Fourier space.
void fourier_diagonal(Matrix& psi, const TorusGrid& g, const std::vector<cplx>& sym, Exec exec) {
  const auto dims = g.dims();
  const auto size = static_cast<Eigen::Index>(g.size());
  const int M = static_cast<int>(psi.cols());
  const double inv = 1.0 / static_cast<double>(size);
  if (M == 0) return;
  if (exec == Exec::serial) {
    fft::transform(psi.data(), dims, fft::kForward, M, 1, static_cast<int>(size));
    for (int j = 0; j < M; ++j)
      for (Eigen::Index i = 0; i < size; ++i) psi(i, j) *= sym[static_cast<std::size_t>(i)] * inv;
    fft::transform(psi.data(), dims, fft::kBackward, M, 1, static_cast<int>(size));
    return;
  }
#pragma omp parallel for schedule(static)
  for (int j = 0; j < M; ++j) {
    cplx* col = psi.col(j).data();
    fft::forward(col, dims);
    for (Eigen::Index i = 0; i < size; ++i) col[i] *= sym[static_cast<std::size_t>(i)] * inv;
    fft::transform(col, dims, fft::kBackward);
  }
}

void potential_phase(OrbitalEnsemble& ens, const InteractionKernel& K, double tau, Exec exec) {
  if (K.gamma == 0.0 || tau == 0.0) return;
  const RField V = convolve_potential(K, density_of(ens));
  std::vector<cplx> ph(V.size());
  for (std::size_t i = 0; i < V.size(); ++i) ph[i] = std::polar(1.0, -tau * V[i] / ens.eps);
  const int M = ens.rank();
  const auto size = ens.psi.rows();
  if (exec == Exec::serial) {
    for (int j = 0; j < M; ++j)
      for (Eigen::Index i = 0; i < size; ++i) ens.psi(i, j) *= ph[static_cast<std::size_t>(i)];
    return;
  }
#pragma omp parallel for schedule(static)
  for (int j = 0; j < M; ++j)
    for (Eigen::Index i = 0; i < size; ++i) ens.psi(i, j) *= ph[static_cast<std::size_t>(i)];
}

Matrix density_matrix(const OrbitalEnsemble& ens) {
  Matrix scaled = ens.psi;
  for (int j = 0; j < ens.rank(); ++j) scaled.col(j) *= ens.occ[j];
  Matrix omega = scaled * ens.psi.adjoint();
  return omega;
}

}  // namespace

ExchangeOperator::ExchangeOperator(const InteractionKernel& K) {
  const Lattice lat = K.grid.lattice();
  const auto n = static_cast<Eigen::Index>(lat.size());
  Kmat.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    auto xj = lat.unflatten(static_cast<std::size_t>(j));
    for (Eigen::Index i = 0; i < n; ++i) {
      auto xi = lat.unflatten(static_cast<std::size_t>(i));
      Kmat(i, j) = K.at_offset({xi[0] - xj[0], xi[1] - xj[1], xi[2] - xj[2]});
    }
  }
}

Matrix ExchangeOperator::matrix(const OrbitalEnsemble& ens) const {
  Matrix omega = density_matrix(ens);
  omega.array() *= Kmat.array().cast<cplx>();
  omega *= ens.grid.cell() / ens.N;
  return omega;
}

Matrix ExchangeOperator::apply(const OrbitalEnsemble& ens) const { return matrix(ens) * ens.psi; }

void kinetic_half_step(OrbitalEnsemble& ens, double dt, Exec exec) {
  if (dt == 0.0) return;
  const auto t = dispersion(ens.grid, ens.eps);
  std::vector<cplx> sym(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) sym[i] = std::polar(1.0, -0.5 * dt * t[i] / ens.eps);
  fourier_diagonal(ens.psi, ens.grid, sym, exec);
}

void meanfield_exchange_step(OrbitalEnsemble& ens, const InteractionKernel& K, double dt, HartreeMode mode,
                             const ExchangeOperator* X, Exec exec) {
  if (K.gamma == 0.0 || dt == 0.0) return;
  if (mode == HartreeMode::hartree) {
    potential_phase(ens, K, dt, exec);
    return;
  }
  std::unique_ptr<ExchangeOperator> own;
  if (!X) {
    own = std::make_unique<ExchangeOperator>(K);
    X = own.get();
  }
  potential_phase(ens, K, 0.5 * dt, exec);
  // i eps d/dt psi = -X[psi] psi: X evaluated at an explicit-midpoint predictor, then
  // psi <- exp(i dt X_mid / eps) psi by a Taylor series run to round-off, so the update is unitary
  const cplx c(0.0, dt / ens.eps);
  OrbitalEnsemble mid = ens;
  mid.psi += (0.5 * c) * X->apply(ens);
  const Matrix G = X->matrix(mid);
  Matrix term = ens.psi;
  const double scale = ens.psi.cwiseAbs().maxCoeff();
  for (int k = 1; k <= 40; ++k) {
    term = (c / double(k)) * (G * term);
    ens.psi += term;
    if (term.cwiseAbs().maxCoeff() <= 1e-17 * scale) break;
  }
  potential_phase(ens, K, 0.5 * dt, exec);
}

HartreeEnergy hf_energy(const OrbitalEnsemble& ens, const InteractionKernel& K, HartreeMode mode,
                        const ExchangeOperator* X) {
  HartreeEnergy e;
  const auto t = dispersion(ens.grid, ens.eps);
  const auto dims = ens.grid.dims();
  const double nd = static_cast<double>(ens.grid.size());
  const double w = ens.grid.cell();
  for (int j = 0; j < ens.rank(); ++j) {
    CField c(ens.psi.col(j).data(), ens.psi.col(j).data() + ens.psi.rows());
    fft::forward(c.data(), dims);
    double s = 0;
    for (std::size_t i = 0; i < c.size(); ++i) s += std::norm(c[i]) * t[i];
    e.kinetic += ens.occ[static_cast<std::size_t>(j)] * w * s / nd;
  }
  if (K.gamma == 0.0) return e;
  const RField rho = density_of(ens);
  const RField V = convolve_potential(K, rho);
  double s = 0;
  for (std::size_t i = 0; i < rho.size(); ++i) s += V[i] * rho[i];
  e.direct = 0.5 * ens.N * w * s;
  if (mode == HartreeMode::hartree_fock) {
    std::unique_ptr<ExchangeOperator> own;
    if (!X) {
      own = std::make_unique<ExchangeOperator>(K);
      X = own.get();
    }
    const Matrix omega = density_matrix(ens);
    const double x = (X->Kmat.array() * omega.array().abs2()).sum();
    e.exchange = -0.5 / ens.N * w * w * x;
  }
  return e;
}

bool coulomb_smallness_ok(const InteractionKernel& K, const OrbitalEnsemble& ens, double gamma_cr) {
  if (!(K.d == 3 && K.a == 1.0 && K.gamma < 0)) return true;
  return std::abs(K.gamma) < ens.N * ens.eps / (gamma_cr * std::pow(ens.trace(), 2.0 / 3.0));
}

HartreeStepper::HartreeStepper(OrbitalEnsemble ens, const InteractionKernel& K, const HartreeStepperConfig& cfg)
    : ens_(std::move(ens)), K_(&K), cfg_(cfg) {
  if (!(cfg_.dt > 0)) throw ArgumentError("time step must be > 0");
  if (!coulomb_smallness_ok(K, ens_, cfg_.gamma_cr)) {
    std::ostringstream ss;
    ss << "attractive Coulomb coupling |gamma| = " << std::abs(K.gamma)
       << " violates the smallness condition with gamma_cr = " << cfg_.gamma_cr;
    warnings_.push_back(ss.str());
    log::warn(ss.str());
  }
  if (cfg_.mode == HartreeMode::hartree_fock && K.gamma != 0.0) X_ = std::make_shared<ExchangeOperator>(K);
  G0_ = gram(ens_);
}

void HartreeStepper::step(double dt) {
  kinetic_half_step(ens_, dt, cfg_.exec);
  meanfield_exchange_step(ens_, *K_, dt, cfg_.mode, X_.get(), cfg_.exec);
  kinetic_half_step(ens_, dt, cfg_.exec);
}

const HartreeDiagnostics& HartreeStepper::diagnose(double t) {
  if (!ens_.psi.allFinite()) {
    if (!cfg_.dump_path.empty()) save_checkpoint(cfg_.dump_path, ens_);
    throw NumericalError("non-finite orbital values at t = " + std::to_string(t) +
                         (cfg_.dump_path.empty() ? "" : ", state written to " + cfg_.dump_path));
  }
  HartreeDiagnostics d;
  d.t = t;
  d.trace = ens_.trace();
  d.ortho_drift = (gram(ens_) - G0_).cwiseAbs().maxCoeff();
  const auto e = hf_energy(ens_, *K_, cfg_.mode, X_.get());
  d.e_hf = e.total();
  d.e_kin = e.kinetic;
  d.unitarity_drift = t > last_t_ ? std::max(0.0, d.ortho_drift - last_drift_) / (t - last_t_) : 0.0;
  series_.push_back(d);
  std::ostringstream ss;
  ss.precision(10);
  ss << to_string(cfg_.mode) << " t=" << t << " trace=" << d.trace << " ortho_drift=" << d.ortho_drift
     << " e_hf=" << d.e_hf;
  log::info(ss.str());
  if (d.unitarity_drift > cfg_.unitarity_tol)
    throw StepRejected("orbital overlap drift " + std::to_string(d.unitarity_drift) +
                       " per unit time exceeds unitarity_tol " + std::to_string(cfg_.unitarity_tol) +
                       "; reduce the time step");
  last_t_ = t;
  last_drift_ = d.ortho_drift;
  return series_.back();
}

HartreeResult evolve(OrbitalEnsemble ens, const InteractionKernel& K, double T, const HartreeStepperConfig& cfg,
                     const HartreeSampler& sampler, int sample_every) {
  if (!(T >= 0)) throw ArgumentError("evolution time must be >= 0");
  HartreeStepper stepper(std::move(ens), K, cfg);
  const int steps = static_cast<int>(std::ceil(T / cfg.dt - 1e-9));
  const double dt = steps > 0 ? T / steps : 0.0;
  const int monitor = std::max(1, cfg.monitor_every);

  stepper.diagnose(0.0);
  if (sampler) sampler(0, 0.0, stepper.state());
  for (int s = 1; s <= steps; ++s) {
    stepper.step(dt);
    const double t = s * dt;
    if (s % monitor == 0 || s == steps) stepper.diagnose(t);
    if (sampler && sample_every > 0 && s % sample_every == 0) sampler(s, t, stepper.state());
  }
  HartreeResult res;
  res.series = stepper.series();
  res.warnings = stepper.warnings();
  res.final_state = stepper.take_state();
  return res;
}

}  // namespace rvlab
