#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rvlab/interaction.hpp"
#include "rvlab/phase_space.hpp"

namespace rvlab {

struct VlasovConfig {
  double dt = 1e-3;
  double pos_tol = 1e-6;
  double boundary_tol = 1e-8;
  std::vector<double> moments{1.0, 2.0};
  int diag_every = 1;
  Exec exec = Exec::parallel;
};

struct VlasovDiagnostics {
  double t = 0;
  double mass = 0;
  double l1 = 0, l2 = 0, linf = 0;
  std::vector<double> moments;      // instantaneous integral of |v|^k f
  std::vector<double> moments_sup;  // running supremum over s <= t
  double energy = 0;
  double e_inf = 0;
  double grad_e_inf = 0;
  double min_f = 0;
  double boundary_fraction = 0;
};

// f(x, v) <- f(x - dt v / <v>, v) by exact Fourier phase per velocity node.
void x_advect(PhaseSpaceDensity& f, double dt, Exec exec = Exec::parallel);
// f(x, v) <- f(x, v - dt E(x)) per position node. Throws SupportOverflow when the
// outer two-cell velocity shell carries more than boundary_tol of the mass afterwards.
void v_advect(PhaseSpaceDensity& f, const std::vector<RField>& E, double dt, Exec exec = Exec::parallel,
              double boundary_tol = 1e-8);

double velocity_moment(const PhaseSpaceDensity& f, double k);
double vlasov_energy(const PhaseSpaceDensity& f, const InteractionKernel& K);
double lp_norm(const PhaseSpaceDensity& f, double p);

VlasovDiagnostics vlasov_diagnostics(const PhaseSpaceDensity& f, const InteractionKernel& K,
                                     const std::vector<double>& moments, double t);

using VlasovSampler = std::function<void(int, double, const PhaseSpaceDensity&)>;

struct VlasovResult {
  PhaseSpaceDensity final_state;
  std::vector<VlasovDiagnostics> series;
};

void vlasov_step(PhaseSpaceDensity& f, const InteractionKernel& K, double dt, const VlasovConfig& cfg);
// `steps` Strang steps with adjacent half-drifts merged; equals repeated vlasov_step up to round-off.
void vlasov_advance(PhaseSpaceDensity& f, const InteractionKernel& K, double dt, int steps, const VlasovConfig& cfg);

// Strang splitting: x half-step, v full step with E from the current density, x half-step.
VlasovResult evolve(PhaseSpaceDensity f, const InteractionKernel& K, double T, const VlasovConfig& cfg,
                    const VlasovSampler& sampler = {}, int sample_every = 0);

// Uniqueness-criterion probe for two trajectories on identical grids.
struct StabilityPoint {
  double t = 0;
  double l1_distance = 0;
  double driver_lo = 0;  // ||rho_{|grad_v f2|}||_{L^{p - delta}}
  double driver_hi = 0;  // ||rho_{|grad_v f2|}||_{L^{p + delta}}
};

struct StabilityReport {
  std::vector<StabilityPoint> series;
  double growth_rate = 0;  // least-squares slope of log distance against t
  double p = 0;            // d / (d - (a + 1))
};

class StabilityProbe {
 public:
  StabilityProbe(const InteractionKernel& K, double delta);
  void add(double t, const PhaseSpaceDensity& f1, const PhaseSpaceDensity& f2);
  StabilityReport report() const;

 private:
  const InteractionKernel* K_;
  double delta_;
  double p_;
  std::vector<StabilityPoint> pts_;
};

StabilityReport stability_probe(const PhaseSpaceDensity& f1, const PhaseSpaceDensity& f2, const InteractionKernel& K,
                                double T, const VlasovConfig& cfg, double delta = 0.1);

// |grad_v f| integrated over v.
RField velocity_gradient_density(const PhaseSpaceDensity& f);

void save_snapshot(const std::string& path, const PhaseSpaceDensity& f);
PhaseSpaceDensity load_snapshot(const std::string& path);

std::vector<std::string> vlasov_csv_header(const std::vector<double>& moments);
std::vector<double> vlasov_csv_row(const VlasovDiagnostics& d);

}  // namespace rvlab
