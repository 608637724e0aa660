#include "rvlab/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "rvlab/error.hpp"

namespace rvlab {

namespace {

void check_dims(int d) {
  if (d < 1 || d > 3) throw ArgumentError("grid dimension must be 1, 2 or 3, got " + std::to_string(d));
}


void check_shape(const Lattice& g, const CField& f) {
  if (f.size() != g.size())
    throw ArgumentError("field has " + std::to_string(f.size()) + " samples, grid expects " +
                        std::to_string(g.size()));
}

}  // namespace

std::size_t Lattice::size() const {
  std::size_t s = 1;
  for (int i = 0; i < d; ++i) s *= static_cast<std::size_t>(n);
  return s;
}

double Lattice::wavenumber(int i) const {
  const int m = i < n / 2 ? i : i - n;
  return 2.0 * std::numbers::pi * m / length();
}

std::array<int, 3> Lattice::unflatten(std::size_t flat) const {
  std::array<int, 3> idx{0, 0, 0};
  for (int a = d - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % n);
    flat /= n;
  }
  return idx;
}

std::size_t Lattice::flatten(const std::array<int, 3>& idx) const {
  std::size_t flat = 0;
  for (int a = 0; a < d; ++a) flat = flat * n + static_cast<std::size_t>(((idx[a] % n) + n) % n);
  return flat;
}

TorusGrid::TorusGrid(int d_, int n_, double L_) : d(d_), n(n_), L(L_) {
  check_dims(d);
  if (n < 4 || n % 2 != 0) throw ArgumentError("n must be even and >= 4, got " + std::to_string(n));
  if (!(L > 0)) throw ArgumentError("box length must be positive");
}

double TorusGrid::cell() const { return std::pow(h(), d); }
double TorusGrid::volume() const { return std::pow(L, d); }

VelocityGrid::VelocityGrid(int d_, int n_v_, double V_) : d(d_), n_v(n_v_), V(V_) {
  check_dims(d);
  if (n_v < 2 || n_v % 2 != 0) throw ArgumentError("n_v must be even, got " + std::to_string(n_v));
  if (!(V > 0)) throw ArgumentError("velocity half-width must be positive");
}

double VelocityGrid::cell() const { return std::pow(hv(), d); }

RField wavenumber_squared(const Lattice& g) {
  RField k2(g.size());
  for (std::size_t i = 0; i < k2.size(); ++i) {
    auto idx = g.unflatten(i);
    double s = 0;
    for (int a = 0; a < g.d; ++a) {
      const double k = g.wavenumber(idx[a]);
      s += k * k;
    }
    k2[i] = s;
  }
  return k2;
}

CField apply_multiplier(const Lattice& g, const CField& field, const std::vector<cplx>& symbol) {
  check_shape(g, field);
  CField out = field;
  fft::forward(out.data(), g.dims());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= symbol[i];
  fft::inverse(out.data(), g.dims());
  return out;
}

CField spectral_derivative(const Lattice& g, const CField& field, int axis, int order) {
  if (axis < 0 || axis >= g.d) throw ArgumentError("axis " + std::to_string(axis) + " out of range");
  if (order < 0) throw ArgumentError("derivative order must be >= 0");
  check_shape(g, field);
  if (order == 0) return field;
  std::vector<cplx> sym(g.size());
  for (std::size_t i = 0; i < sym.size(); ++i) {
    const double k = g.wavenumber(g.unflatten(i)[axis]);
    sym[i] = std::pow(cplx(0.0, k), order);
  }
  return apply_multiplier(g, field, sym);
}

CField spectral_derivative(const TorusGrid& g, const CField& field, int axis, int order) {
  return spectral_derivative(g.lattice(), field, axis, order);
}

CField translate(const Lattice& g, const CField& field, const Vec3& shift) {
  check_shape(g, field);
  std::vector<cplx> sym(g.size());
  for (std::size_t i = 0; i < sym.size(); ++i) {
    auto idx = g.unflatten(i);
    double phase = 0;
    for (int a = 0; a < g.d; ++a) phase += g.wavenumber(idx[a]) * shift[a];
    sym[i] = std::polar(1.0, -phase);
  }
  return apply_multiplier(g, field, sym);
}

CField translate(const TorusGrid& g, const CField& field, const Vec3& shift) {
  return translate(g.lattice(), field, shift);
}

CField translate(const TorusGrid& g, const CField& field, const std::vector<Vec3>& shifts) {
  const Lattice lat = g.lattice();
  check_shape(lat, field);
  if (shifts.size() != field.size()) throw ArgumentError("one shift per node required");
  CField coef = field;
  fft::forward(coef.data(), lat.dims());
  const double inv = 1.0 / static_cast<double>(lat.size());
  CField out(field.size());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto xi = lat.unflatten(i);
    cplx acc = 0;
    for (std::size_t m = 0; m < coef.size(); ++m) {
      auto km = lat.unflatten(m);
      double phase = 0;
      for (int a = 0; a < lat.d; ++a) phase += lat.wavenumber(km[a]) * (lat.node(xi[a]) - shifts[i][a]);
      acc += coef[m] * std::polar(1.0, phase);
    }
    out[i] = acc * inv;
  }
  return out;
}

CField interpolate_midpoints(const TorusGrid& g, const CField& field) {
  const double s = -0.5 * g.h();
  return translate(g, field, Vec3{s, s, s});
}

CField to_complex(const RField& r) { return CField(r.begin(), r.end()); }

double max_imag_residue(const CField& c) {
  double m = 0;
  for (const auto& z : c) m = std::max(m, std::abs(z.imag()));
  return m;
}

RField to_real(const CField& c, double rel_tol) {
  double norm = 0, res = 0;
  RField r(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    norm = std::max(norm, std::abs(c[i]));
    res = std::max(res, std::abs(c[i].imag()));
    r[i] = c[i].real();
  }
  if (res > rel_tol * norm && res > 0)
    throw NumericalError("imaginary residue " + std::to_string(res) + " exceeds tolerance for a real field");
  return r;
}

double l2_norm(const TorusGrid& g, const CField& field) {
  double s = 0;
  for (const auto& z : field) s += std::norm(z);
  return std::sqrt(s * g.cell());
}

double l2_norm_fourier(const TorusGrid& g, const CField& field) {
  CField c = field;
  fft::forward(c.data(), g.dims());
  double s = 0;
  for (const auto& z : c) s += std::norm(z);
  // sum |c_k|^2 with c_k = FFT / n^d, scaled by the box volume
  const double nd = static_cast<double>(g.size());
  return std::sqrt(s / (nd * nd) * g.volume());
}

}  // namespace rvlab
