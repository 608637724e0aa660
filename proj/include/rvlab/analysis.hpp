#pragma once

#include <string>
#include <vector>

#include "rvlab/interaction.hpp"
#include "rvlab/phase_space.hpp"

namespace rvlab {

// ||f||_{W_k^{sigma,p}} over phase space with <z>^2 = 1 + |x - L/2|^2 + |v|^2
// (p = 2 or infinity); derivatives are spectral.
double weighted_sobolev(const PhaseSpaceDensity& f, int sigma, double k, double p);

// ||rho||_{H^nu} (integer nu: sum over |alpha| <= nu; otherwise the Bessel-potential form).
double sobolev_density(const TorusGrid& g, const RField& rho, double nu);

// Smallest admissible regularity index sigma = 4 + n with n even, n >= d(a+1)/(d-(a+1)).
int regularity_index(int d, double a);

struct SobolevReport {
  double t = 0;
  int sigma = 0;
  double nu = 0;
  double w_inf = 0;   // ||f||_{W_sigma^{sigma,inf}}
  double h = 0;       // ||f||_{H_sigma^sigma}
  double grad_v = 0;  // ||grad_v f||_{W^{2,inf} cap H_sigma^sigma}
  double rho = 0;     // ||rho||_{L^1 cap H^nu}
  bool band_limit_warning = false;  // sigma > n/2
};

SobolevReport sobolev_report(const PhaseSpaceDensity& f, const InteractionKernel& K, double t, int sigma = -1);

struct GronwallPoint {
  double t = 0;
  double lambda = 0;
  double C = 0;
  double rhs = 0;
};

// Right-hand side of the semiclassical stability bound with all unknown constants set to 1:
// [delta0 + N eps] [C(t) + int_0^t C(s) lambda(s) exp(int_s^t lambda) ds].
struct GronwallEvaluation {
  std::vector<GronwallPoint> series;
  double initial_distance = 0;
  double n_eps = 0;
};

GronwallEvaluation gronwall_rhs(const std::vector<SobolevReport>& series, const InteractionKernel& K, double N,
                                double eps, double initial_distance);

struct InequalityRecord {
  std::string name;
  double lhs = 0;
  double rhs = 0;
  bool pass = false;
};

// Sharp constant of the split-radius bound int |v|^b f <= C ||f||_inf^{(c-b)/(d+c)} (int |v|^c f)^{(d+b)/(d+c)}.
double moment_bound_constant(double b, double c, int d);

// Moment interpolation on (b, a, c) triples and the local / density moment bounds.
std::vector<InequalityRecord> moment_inequality_suite(const PhaseSpaceDensity& f, double rel_slack = 1e-12);

}  // namespace rvlab
