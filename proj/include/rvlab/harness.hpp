#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "rvlab/analysis.hpp"
#include "rvlab/config.hpp"
#include "rvlab/hartree.hpp"
#include "rvlab/vlasov.hpp"
#include "rvlab/wigner_weyl.hpp"

namespace rvlab {

struct PresetParams {
  std::string name = "gaussian-bump";
  double bump_amplitude = 0.2;
  double bump_width = -1;  // <= 0 selects L/8
  double v_radius = 0.0;   // plateau radius of the velocity profile (0: plain Gaussian)
  double v_edge = 0.8;     // Gaussian edge width of the plateau
  double modulation_amplitude = 0.0;
  int modulation_mode = 1;
};

struct ExperimentConfig {
  int d = 2;
  double a = 0.0;
  double gamma = 1.0;
  KernelMode kernel_mode = KernelMode::spectral_symbol;
  int n = 32;
  int n_v = 32;
  double L = 10.0;
  double V = 6.0;
  std::vector<double> N_list{16, 64, 256};
  double compare_N = 64;
  double T = 0.5;
  std::string mode = "hartree";  // hartree | hartree-fock | both
  std::vector<double> schatten_p{1.0, 2.0};
  int samples = 10;
  double q = -1;  // <= 0 selects min{d/(a+1), 2} - 0.1
  PresetParams preset;
  std::uint64_t seed = 20240601;
  int threads = 0;

  VlasovConfig vlasov;
  double vlasov_T = 1.0;
  HartreeStepperConfig hartree;
  double hartree_T = 1.0;
  double hartree_N = 64;
  StateTolerances state;
  double alias_tol = 1e-6;
  int sobolev_samples = 3;
  double stability_delta = 0.1;
  bool checkpoints = false;

  double q_value() const;
  std::vector<double> eps_list() const;
};

std::vector<std::string> known_config_keys();
ExperimentConfig parse_experiment(const Config& c);
// Admissible exponent range for the semiclassical comparison.
void validate_comparison(const ExperimentConfig& cfg);

TorusGrid position_grid(const ExperimentConfig& cfg);
VelocityGrid velocity_grid(const ExperimentConfig& cfg);

PhaseSpaceDensity build_initial(const PresetParams& p, const TorusGrid& xg, const VelocityGrid& vg,
                                double boundary_tol = 1e-8);
// Energy fraction of the phase-space spectrum beyond n/3 modes on any axis.
double spectral_tail_fraction(const PhaseSpaceDensity& f);

struct MatchedPair {
  OrbitalEnsemble omega;
  DistortionReport distortion;
  AliasReport alias;
};

MatchedPair matched_pair(const PhaseSpaceDensity& f0, double N, const StateTolerances& tol = {},
                         double alias_tol = 1e-6);

struct RateFit {
  std::vector<double> x, y;  // log eps, log distance
  double slope = 0;
  double intercept = 0;
  double ci_half_width = 0;  // 95% interval half-width
  std::vector<double> contributions;  // per-point terms summing to the slope
  bool monotone = true;               // distance increasing with eps
};

// Least-squares slope of log(distance) against log(eps); needs >= 3 points.
RateFit fit_rate(const std::vector<double>& eps, const std::vector<double>& distance);

struct DistancePoint {
  double t = 0;
  std::vector<double> hartree;       // ||omega - omega~||_{S^p} / N^{1/p} per p
  std::vector<double> hartree_fock;  // same for the exchange dynamics (empty if not run)
  double exchange_s1 = std::numeric_limits<double>::quiet_NaN();  // ||omega^HF - omega^H||_{S^1} / N
  double alias = 0;
};

struct NRun {
  double N = 0;
  double eps = 0;
  int rank = 0;
  DistortionReport distortion;
  AliasReport alias;
  std::vector<DistancePoint> points;
  std::vector<HartreeDiagnostics> hartree_diag, hartree_fock_diag;
  GronwallEvaluation gronwall;
  double fitted_constant = 0;  // max_t distance / (rhs / N)

  double sup_excess(std::size_t p_index, bool exchange) const;  // sup_t distance - distance(0)
};

struct ComparisonReport {
  ExperimentConfig cfg;
  std::vector<NRun> runs;
  std::vector<VlasovDiagnostics> vlasov;
  std::vector<SobolevReport> sobolev;
  std::vector<InequalityRecord> inequalities;
  RateFit s1_fit, s2_fit, s1_fit_hf, s2_fit_hf;
  bool have_fit = false, have_fit_hf = false;
  double fitted_constant_spread = 0;  // max / min over N
  std::vector<std::string> warnings;
  double seconds = 0;
};

// Runs the shared Vlasov trajectory and every N of cfg.N_list side by side.
// When out_dir is non-empty, writes manifest.json first, then timeseries.csv,
// sweep.csv, report.json and snapshots.
ComparisonReport run_comparison(const ExperimentConfig& cfg, const std::string& out_dir,
                                const Config* source = nullptr, const std::string& command = "compare");

ComparisonReport compare(const ExperimentConfig& cfg, const std::string& out_dir = "", const Config* source = nullptr);
ComparisonReport sweep(const ExperimentConfig& cfg, const std::string& out_dir = "", const Config* source = nullptr);

void write_manifest(const std::string& out_dir, const ExperimentConfig& cfg, const Config* source,
                    const std::string& command);
// Marks the manifest complete; a manifest left in "running" state flags an interrupted run.
void finish_manifest(const std::string& out_dir, double seconds);

}  // namespace rvlab
