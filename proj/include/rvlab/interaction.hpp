#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rvlab/grid.hpp"
#include "rvlab/phase_space.hpp"

namespace rvlab {

enum class KernelMode { spectral_symbol, minimal_image };

KernelMode parse_kernel_mode(const std::string& s);
std::string to_string(KernelMode m);

// K(x) = gamma * |x|^{-a}, or gamma * ln|x| when a = 0, periodized on the torus
// with the k = 0 mode removed.
struct InteractionKernel {
  int d = 2;
  double a = 0.0;
  double gamma = 1.0;
  KernelMode mode = KernelMode::spectral_symbol;
  TorusGrid grid;
  RField symbol;   // K^(k) on FFT-ordered flat wavenumbers
  RField samples;  // K on the grid nodes, consistent with `symbol`

  // Sample at the node separation x_i - x_j (indices wrap).
  double at_offset(const std::array<int, 3>& di) const { return samples[grid.lattice().flatten(di)]; }
};

// Whole-space Fourier constant: K^(k) = gamma * c * |k|^{a-d}.
// For a = 0 this is the (negative) constant of the logarithm.
double symbol_constant(int d, double a);

InteractionKernel build_kernel(int d, double a, double gamma, const TorusGrid& grid, KernelMode mode);

RField convolve_potential(const InteractionKernel& K, const RField& rho);
// E_j = -d_j (K * rho), one field per axis.
std::vector<RField> force(const InteractionKernel& K, const RField& rho);

struct FieldDiagnostics {
  double e_inf = 0;
  double grad_e_inf = 0;  // max over x of the Frobenius norm of the Jacobian
  double rho_l1 = 0;
  double rho_linf = 0;
  std::vector<std::pair<double, double>> rho_lp;  // (p, ||rho||_p)
};

FieldDiagnostics field_diagnostics(const InteractionKernel& K, const PhaseSpaceDensity& f,
                                   const std::vector<double>& p_list = {});
FieldDiagnostics field_diagnostics(const InteractionKernel& K, const RField& rho,
                                   const std::vector<double>& p_list = {});

double lp_norm(const TorusGrid& g, const RField& u, double p);

}  // namespace rvlab
