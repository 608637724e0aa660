#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "rvlab/interaction.hpp"
#include "rvlab/quantum_state.hpp"

namespace rvlab {

enum class HartreeMode { hartree, hartree_fock };

HartreeMode parse_hartree_mode(const std::string& s);
std::string to_string(HartreeMode m);

struct HartreeStepperConfig {
  double dt = 0.01;
  HartreeMode mode = HartreeMode::hartree;
  int monitor_every = 1;
  double unitarity_tol = 1e-6;  // per unit time
  double gamma_cr = 1.0;
  Exec exec = Exec::parallel;
  std::string dump_path;  // checkpoint written before aborting on non-finite values
};

struct HartreeDiagnostics {
  double t = 0;
  double trace = 0;
  double ortho_drift = 0;  // max |<psi_i, psi_j>(t) - <psi_i, psi_j>(0)|
  double e_hf = 0;
  double e_kin = 0;
  double unitarity_drift = 0;  // ortho drift growth per unit time since the last monitor
};

struct HartreeEnergy {
  double kinetic = 0;
  double direct = 0;
  double exchange = 0;
  double total() const { return kinetic + direct + exchange; }
};

// Dense exchange kernel K(x_i - x_j), built once per evolution.
struct ExchangeOperator {
  Eigen::MatrixXd Kmat;
  explicit ExchangeOperator(const InteractionKernel& K);
  // Dense X(x; y) = N^{-1} K(x - y) omega(x; y), quadrature weight included.
  Matrix matrix(const OrbitalEnsemble& ens) const;
  // (X psi)_k for the ensemble's own orbitals.
  Matrix apply(const OrbitalEnsemble& ens) const;
};

// psi_hat <- exp(-i (dt/2) sqrt(1 + eps^2 k^2) / eps) psi_hat for every orbital.
void kinetic_half_step(OrbitalEnsemble& ens, double dt, Exec exec = Exec::parallel);

// Mean-field sub-step of length dt: exact potential phases around a unitary exchange
// update exp(i dt X_mid / eps), X_mid from an explicit-midpoint predictor (hartree-fock mode only).
void meanfield_exchange_step(OrbitalEnsemble& ens, const InteractionKernel& K, double dt, HartreeMode mode,
                             const ExchangeOperator* X = nullptr, Exec exec = Exec::parallel);

HartreeEnergy hf_energy(const OrbitalEnsemble& ens, const InteractionKernel& K, HartreeMode mode,
                        const ExchangeOperator* X = nullptr);

struct HartreeResult {
  OrbitalEnsemble final_state;
  std::vector<HartreeDiagnostics> series;
  std::vector<std::string> warnings;
};

// Step-by-step driver; diagnostics are taken only when requested.
class HartreeStepper {
 public:
  HartreeStepper(OrbitalEnsemble ens, const InteractionKernel& K, const HartreeStepperConfig& cfg);
  void step(double dt);
  // Appends to the series; throws on non-finite state or excessive overlap drift.
  const HartreeDiagnostics& diagnose(double t);
  const OrbitalEnsemble& state() const { return ens_; }
  OrbitalEnsemble take_state() { return std::move(ens_); }
  const std::vector<HartreeDiagnostics>& series() const { return series_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  OrbitalEnsemble ens_;
  const InteractionKernel* K_;
  HartreeStepperConfig cfg_;
  std::shared_ptr<ExchangeOperator> X_;
  Matrix G0_;
  std::vector<HartreeDiagnostics> series_;
  std::vector<std::string> warnings_;
  double last_t_ = 0, last_drift_ = 0;
};

// Called with (step, t, state) at step 0 and every `sample_every` steps.
using HartreeSampler = std::function<void(int, double, const OrbitalEnsemble&)>;

HartreeResult evolve(OrbitalEnsemble ens, const InteractionKernel& K, double T, const HartreeStepperConfig& cfg,
                     const HartreeSampler& sampler = {}, int sample_every = 0);

// Smallness condition for attractive Coulomb in d = 3; true when satisfied or not applicable.
bool coulomb_smallness_ok(const InteractionKernel& K, const OrbitalEnsemble& ens, double gamma_cr);

}  // namespace rvlab
