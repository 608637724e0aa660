#include "rvlab/phase_space.hpp"

#include <algorithm>
#include <cmath>

namespace rvlab {

PhaseSpaceDensity::PhaseSpaceDensity(const TorusGrid& x, const VelocityGrid& v)
    : xg(x), vg(v), f(x.size() * v.size(), 0.0) {}

Vec3 PhaseSpaceDensity::velocity(std::size_t iv) const {
  const Lattice lv = vg.lattice();
  auto idx = lv.unflatten(iv);
  Vec3 v{0, 0, 0};
  for (int a = 0; a < vg.d; ++a) v[a] = lv.node(idx[a]);
  return v;
}

double PhaseSpaceDensity::speed(std::size_t iv) const {
  auto v = velocity(iv);
  return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
}

RField PhaseSpaceDensity::density() const {
  RField rho(nx(), 0.0);
  const double dv = vg.cell();
  const std::size_t m = nv();
#pragma omp parallel for schedule(static)
  for (std::size_t ix = 0; ix < rho.size(); ++ix) {
    double s = 0;
    for (std::size_t iv = 0; iv < m; ++iv) s += f[ix * m + iv];
    rho[ix] = s * dv;
  }
  return rho;
}

// Neumaier summation: the mass is compared against conservation tolerances near round-off.
double PhaseSpaceDensity::mass() const {
  double s = 0, c = 0;
  for (double x : f) {
    const double t = s + x;
    c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
    s = t;
  }
  return (s + c) * cell();
}

double PhaseSpaceDensity::min() const { return f.empty() ? 0.0 : *std::min_element(f.begin(), f.end()); }

double PhaseSpaceDensity::boundary_shell_fraction() const {
  const Lattice lv = vg.lattice();
  const int n = vg.n_v;
  std::vector<char> shell(nv(), 0);
  for (std::size_t iv = 0; iv < nv(); ++iv) {
    auto idx = lv.unflatten(iv);
    for (int a = 0; a < vg.d; ++a)
      if (idx[a] < 2 || idx[a] >= n - 2) shell[iv] = 1;
  }
  const std::size_t m = nv(), nxs = nx();
  double in = 0, tot = 0;
  for (std::size_t ix = 0; ix < nxs; ++ix)
    for (std::size_t iv = 0; iv < m; ++iv) {
      const double a = std::abs(f[ix * m + iv]);
      tot += a;
      if (shell[iv]) in += a;
    }
  return tot > 0 ? in / tot : 0.0;
}

}  // namespace rvlab
