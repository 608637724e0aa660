#pragma once

#include "rvlab/phase_space.hpp"
#include "rvlab/quantum_state.hpp"

namespace rvlab {

// Velocity grid dual to the relative coordinate at parameter eps:
// n points, spacing 2 pi eps / L, nodes (j - n/2) * dv.
VelocityGrid dual_velocity_grid(const TorusGrid& g, double eps);

struct WignerField {
  PhaseSpaceDensity W;  // on dual_velocity_grid(grid, eps)
  double eps = 1.0;
  double N = 1.0;
};

// W(x, v) = (eps / 2pi)^d sum_y omega(x + eps y/2; x - eps y/2) e^{-i v.y} h_y^d on the
// relative lattice y = r h / eps. Centres falling between nodes are reached by exact
// trigonometric translation of each off-diagonal band.
WignerField wigner_transform(const OperatorMatrix& omega, double eps, Exec exec = Exec::parallel);

// Inverse of wigner_transform on real fields over the dual grid.
OperatorMatrix weyl_quantize(const PhaseSpaceDensity& W, double eps, Exec exec = Exec::parallel);

struct AliasReport {
  double spectral_fraction = 0;  // v-spectrum energy beyond the dual Nyquist frequency
  double outside_fraction = 0;   // |f| mass outside the dual velocity box
  double total() const { return spectral_fraction + outside_fraction; }
};

struct MatchResult {
  PhaseSpaceDensity W;
  AliasReport report;
};

AliasReport alias_report(const PhaseSpaceDensity& f, const VelocityGrid& target);

// Trigonometric resampling of f onto the dual grid (zero outside the source box).
// Throws RejectedInput when the aliasing measure exceeds alias_tol.
MatchResult match_grids(const PhaseSpaceDensity& f, double eps, double alias_tol = 1e-6);

// Resampling without the tolerance check.
PhaseSpaceDensity resample_velocity(const PhaseSpaceDensity& f, const VelocityGrid& target);

}  // namespace rvlab
