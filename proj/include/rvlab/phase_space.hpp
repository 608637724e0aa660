#pragma once

#include <cstddef>

#include "rvlab/grid.hpp"

namespace rvlab {

// Samples of f(x, v) on TorusGrid x VelocityGrid, x-major:
// f[ix * vg.size() + iv].
struct PhaseSpaceDensity {
  TorusGrid xg;
  VelocityGrid vg;
  RField f;

  PhaseSpaceDensity() = default;
  PhaseSpaceDensity(const TorusGrid& x, const VelocityGrid& v);

  std::size_t nx() const { return xg.size(); }
  std::size_t nv() const { return vg.size(); }
  double& at(std::size_t ix, std::size_t iv) { return f[ix * nv() + iv]; }
  double at(std::size_t ix, std::size_t iv) const { return f[ix * nv() + iv]; }

  double cell() const { return xg.cell() * vg.cell(); }
  // Velocity vector and its norm at a flat v-index.
  Vec3 velocity(std::size_t iv) const;
  double speed(std::size_t iv) const;

  RField density() const;  // rho_f(x) = integral of f over v
  double mass() const;
  double min() const;
  // Fraction of |f| mass in the outer two-cell shell of the velocity box.
  double boundary_shell_fraction() const;
};

}  // namespace rvlab
