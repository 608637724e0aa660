#include "rvlab/interaction.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "rvlab/error.hpp"

namespace rvlab {

namespace {

// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre01(int m, std::vector<double>& x, std::vector<double>& w) {
  x.resize(m);
  w.resize(m);
  for (int i = 0; i < m; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = z;
      for (int k = 2; k <= m; ++k) {
        double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = m * (z * p1 - p0) / (z * z - 1);
      double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = 0.5 * (1 - z);
    w[i] = 1.0 / ((1 - z * z) * dp * dp);
  }
}

double radial(double a, double r) { return a == 0.0 ? std::log(r) : std::pow(r, -a); }

// Average of |x|^{-a} (or ln|x|) over the cell [-h/2, h/2]^d. The cube is split
// into d pyramids by the largest coordinate; the apex singularity is then
// removed by the u^{d-1} Jacobian.
double cell_average(int d, double a, double h) {
  std::vector<double> x, w;
  const int m = 48;
  gauss_legendre01(m, x, w);
  const double half = 0.5 * h;
  double acc = 0;
  if (d == 1) {
    for (int i = 0; i < m; ++i) acc += w[i] * radial(a, half * x[i]);
    return acc;
  }
  for (int i = 0; i < m; ++i) {
    const double u = x[i];
    if (d == 2) {
      for (int j = 0; j < m; ++j)
        acc += w[i] * w[j] * u * radial(a, half * u * std::sqrt(1 + x[j] * x[j]));
    } else {
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k)
          acc += w[i] * w[j] * w[k] * u * u *
                 radial(a, half * u * std::sqrt(1 + x[j] * x[j] + x[k] * x[k]));
    }
  }
  return d * acc;
}

void check_rho(const InteractionKernel& K, const RField& rho) {
  if (rho.size() != K.grid.size())
    throw ArgumentError("density has " + std::to_string(rho.size()) + " samples, grid expects " +
                        std::to_string(K.grid.size()));
}

}  // namespace

KernelMode parse_kernel_mode(const std::string& s) {
  if (s == "spectral-symbol") return KernelMode::spectral_symbol;
  if (s == "minimal-image") return KernelMode::minimal_image;
  throw ConfigError("kernel mode must be spectral-symbol or minimal-image, got '" + s + "'");
}

std::string to_string(KernelMode m) {
  return m == KernelMode::spectral_symbol ? "spectral-symbol" : "minimal-image";
}

double symbol_constant(int d, double a) {
  const double pi = std::numbers::pi;
  if (a == 0.0) return -std::pow(pi, 0.5 * d) * std::pow(2.0, d - 1) * std::tgamma(0.5 * d);
  return std::pow(pi, 0.5 * d) * std::pow(2.0, d - a) * std::tgamma(0.5 * (d - a)) / std::tgamma(0.5 * a);
}

InteractionKernel build_kernel(int d, double a, double gamma, const TorusGrid& grid, KernelMode mode) {
  if (d != grid.d) throw ArgumentError("kernel dimension does not match the grid");
  if (!(a > -1.0 && a <= d - 2.0))
    throw ArgumentError("a = " + std::to_string(a) + " outside (-1, " + std::to_string(d - 2) + "]");
  if (mode == KernelMode::spectral_symbol && a < 0.0)
    throw ArgumentError("a < 0 requires the minimal-image kernel mode");

  InteractionKernel K;
  K.d = d;
  K.a = a;
  K.gamma = gamma;
  K.mode = mode;
  K.grid = grid;
  const Lattice lat = grid.lattice();
  const std::size_t size = lat.size();
  K.symbol.assign(size, 0.0);

  if (mode == KernelMode::spectral_symbol) {
    const double c = gamma * symbol_constant(d, a);
    const RField k2 = wavenumber_squared(lat);
    for (std::size_t i = 1; i < size; ++i) K.symbol[i] = c * std::pow(k2[i], 0.5 * (a - d));
  } else {
    CField raw(size);
    const double k0 = cell_average(d, a, grid.h());
    for (std::size_t i = 0; i < size; ++i) {
      auto idx = lat.unflatten(i);
      double r2 = 0;
      for (int ax = 0; ax < d; ++ax) {
        const int m = idx[ax] <= grid.n / 2 ? idx[ax] : idx[ax] - grid.n;
        r2 += (m * grid.h()) * (m * grid.h());
      }
      raw[i] = i == 0 ? k0 : radial(a, std::sqrt(r2));
    }
    fft::forward(raw.data(), lat.dims());
    for (std::size_t i = 1; i < size; ++i) K.symbol[i] = gamma * grid.cell() * raw[i].real();
  }
  K.symbol[0] = 0.0;

  CField s(K.symbol.begin(), K.symbol.end());
  fft::transform(s.data(), lat.dims(), fft::kBackward);
  K.samples.resize(size);
  const double inv_vol = 1.0 / grid.volume();
  for (std::size_t i = 0; i < size; ++i) K.samples[i] = s[i].real() * inv_vol;
  return K;
}

RField convolve_potential(const InteractionKernel& K, const RField& rho) {
  check_rho(K, rho);
  CField c = to_complex(rho);
  const auto dims = K.grid.dims();
  fft::forward(c.data(), dims);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= K.symbol[i];
  fft::inverse(c.data(), dims);
  return to_real(c);
}

std::vector<RField> force(const InteractionKernel& K, const RField& rho) {
  check_rho(K, rho);
  const Lattice lat = K.grid.lattice();
  const auto dims = lat.dims();
  CField hat = to_complex(rho);
  fft::forward(hat.data(), dims);
  std::vector<RField> E(static_cast<std::size_t>(K.d));
  for (int ax = 0; ax < K.d; ++ax) {
    CField c(hat.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
      const int idx = lat.unflatten(i)[ax];
      // odd derivative of a real field: the Nyquist mode carries no slope
      const double k = idx == lat.n / 2 ? 0.0 : lat.wavenumber(idx);
      c[i] = cplx(0.0, -k) * K.symbol[i] * hat[i];
    }
    fft::inverse(c.data(), dims);
    E[ax] = to_real(c);
  }
  return E;
}

double lp_norm(const TorusGrid& g, const RField& u, double p) {
  if (std::isinf(p)) {
    double m = 0;
    for (double x : u) m = std::max(m, std::abs(x));
    return m;
  }
  double s = 0;
  for (double x : u) s += std::pow(std::abs(x), p);
  return std::pow(s * g.cell(), 1.0 / p);
}

FieldDiagnostics field_diagnostics(const InteractionKernel& K, const RField& rho,
                                   const std::vector<double>& p_list) {
  FieldDiagnostics out;
  out.rho_l1 = lp_norm(K.grid, rho, 1.0);
  out.rho_linf = lp_norm(K.grid, rho, std::numeric_limits<double>::infinity());
  for (double p : p_list) out.rho_lp.emplace_back(p, lp_norm(K.grid, rho, p));

  const auto E = force(K, rho);
  const Lattice lat = K.grid.lattice();
  std::vector<RField> grad;
  for (int i = 0; i < K.d; ++i)
    for (int j = 0; j < K.d; ++j) grad.push_back(to_real(spectral_derivative(lat, to_complex(E[i]), j, 1), 1.0));
  for (std::size_t x = 0; x < rho.size(); ++x) {
    double e2 = 0, g2 = 0;
    for (const auto& c : E) e2 += c[x] * c[x];
    for (const auto& c : grad) g2 += c[x] * c[x];
    out.e_inf = std::max(out.e_inf, std::sqrt(e2));
    out.grad_e_inf = std::max(out.grad_e_inf, std::sqrt(g2));
  }
  return out;
}

FieldDiagnostics field_diagnostics(const InteractionKernel& K, const PhaseSpaceDensity& f,
                                   const std::vector<double>& p_list) {
  return field_diagnostics(K, f.density(), p_list);
}

}  // namespace rvlab
