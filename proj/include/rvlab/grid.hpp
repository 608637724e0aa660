#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "rvlab/fft.hpp"

namespace rvlab {

// Selects the OpenMP kernels or the serial reference path.
enum class Exec { serial, parallel };

using Vec3 = std::array<double, 3>;

// Uniform periodic lattice: n points per axis, spacing h, first node at origin.
struct Lattice {
  int d = 2;
  int n = 32;
  double h = 1.0;
  double origin = 0.0;

  std::size_t size() const;
  std::vector<int> dims() const { return fft::cube(d, n); }
  double length() const { return n * h; }
  double node(int i) const { return origin + i * h; }
  // Wavenumber of FFT index i, standard ordering with the Nyquist mode at -pi/h.
  double wavenumber(int i) const;
  std::array<int, 3> unflatten(std::size_t flat) const;
  std::size_t flatten(const std::array<int, 3>& idx) const;  // wraps periodically
};

struct TorusGrid {
  int d = 2;
  int n = 32;
  double L = 10.0;

  TorusGrid() = default;
  TorusGrid(int d, int n, double L);

  double h() const { return L / n; }
  double cell() const;  // h^d
  double volume() const;
  std::size_t size() const { return lattice().size(); }
  std::vector<int> dims() const { return lattice().dims(); }
  Lattice lattice() const { return Lattice{d, n, h(), 0.0}; }
  double node(int i) const { return i * h(); }
  double wavenumber(int i) const { return lattice().wavenumber(i); }
  bool operator==(const TorusGrid&) const = default;
};

struct VelocityGrid {
  int d = 2;
  int n_v = 32;
  double V = 6.0;

  VelocityGrid() = default;
  VelocityGrid(int d, int n_v, double V);

  double hv() const { return 2.0 * V / n_v; }
  double cell() const;
  std::size_t size() const { return lattice().size(); }
  std::vector<int> dims() const { return lattice().dims(); }
  Lattice lattice() const { return Lattice{d, n_v, hv(), -V}; }
  double node(int i) const { return -V + i * hv(); }
  // Dual frequency used by spectral shifts in v.
  double wavenumber(int i) const { return lattice().wavenumber(i); }
  bool operator==(const VelocityGrid&) const = default;
};

// Exact derivative of the trigonometric interpolant along `axis`.
CField spectral_derivative(const TorusGrid& g, const CField& field, int axis, int order);
CField spectral_derivative(const Lattice& g, const CField& field, int axis, int order);

// Trigonometric interpolant evaluated at x - shift (constant shift).
CField translate(const TorusGrid& g, const CField& field, const Vec3& shift);
CField translate(const Lattice& g, const CField& field, const Vec3& shift);
// Per-node shifts, evaluated by direct summation of the interpolant.
CField translate(const TorusGrid& g, const CField& field, const std::vector<Vec3>& shifts);

// Values of the interpolant at the nodes x_i + h/2 (every axis).
CField interpolate_midpoints(const TorusGrid& g, const CField& field);

// Multiplies the spectrum by m(k) for a symbol given on FFT-ordered flat indices.
CField apply_multiplier(const Lattice& g, const CField& field, const std::vector<cplx>& symbol);

// |k|^2 on FFT-ordered flat indices.
RField wavenumber_squared(const Lattice& g);

CField to_complex(const RField& r);
// Real part; throws NumericalError if the imaginary residue exceeds rel_tol * ||field||.
RField to_real(const CField& c, double rel_tol = 1e-10);
double max_imag_residue(const CField& c);

// Grid L^2 norm (h^d weighted) and its Fourier-side counterpart.
double l2_norm(const TorusGrid& g, const CField& field);
double l2_norm_fourier(const TorusGrid& g, const CField& field);

}  // namespace rvlab
