#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rvlab/error.hpp"
#include "rvlab/interaction.hpp"

using namespace rvlab;

namespace {

constexpr double kPi = std::numbers::pi;

// Fourier transform of |x|^{-a} at |k| from the heat-kernel subordination
// |x|^{-a} = Gamma(a/2)^{-1} int t^{a/2-1} exp(-t|x|^2) dt, integrated numerically in log t.
double power_transform(int d, double a, double k) {
  double acc = 0;
  const double ds = 1e-3;
  for (double s = -40; s <= 40; s += ds) {
    const double t = std::exp(s);
    acc += std::pow(t, 0.5 * a) * std::pow(kPi / t, 0.5 * d) * std::exp(-k * k / (4 * t));
  }
  return acc * ds / std::tgamma(0.5 * a);
}

// Transform of ln|x|: minus the a-derivative at a = 0 (the a = 0 transform vanishes
// away from k = 0), by a Richardson-extrapolated one-sided quotient.
double log_transform(int d, double k) {
  const double h = 1e-3;
  const double D1 = power_transform(d, h, k) / h;
  const double D2 = power_transform(d, h / 2, k) / (h / 2);
  return -(2 * D2 - D1);
}

double midpoint_cell_average(int d, double a, double h, int m) {
  double acc = 0;
  const double step = h / m;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const double x = -h / 2 + (i + 0.5) * step, y = -h / 2 + (j + 0.5) * step;
      const double r = std::sqrt(x * x + y * y);
      acc += a == 0 ? std::log(r) : std::pow(r, -a);
    }
  return d == 2 ? acc / (double(m) * m) : 0.0;
}

}  // namespace

TEST_CASE("symbol constant matches the numerically integrated Fourier transform") {
  const double k = 1.3;
  for (auto [d, a] : {std::pair{3, 1.0}, {3, 0.5}, {2, 0.0}, {3, 0.0}}) {
    const double expected = a == 0 ? log_transform(d, k) : power_transform(d, a, k);
    const double got = symbol_constant(d, a) * std::pow(k, a - d);
    CAPTURE(d);
    CAPTURE(a);
    CHECK(got == doctest::Approx(expected).epsilon(1e-5));
  }
  // Coulomb in three dimensions: 4 pi / |k|^2
  CHECK(symbol_constant(3, 1.0) == doctest::Approx(4 * kPi));
  // logarithm in two dimensions: -2 pi / |k|^2
  CHECK(symbol_constant(2, 0.0) == doctest::Approx(-2 * kPi));
}

TEST_CASE("spectral convolution equals the direct sum over kernel samples") {
  for (auto [d, a] : {std::pair{2, 0.0}, {3, 1.0}}) {
    const TorusGrid g(d, 8, 3.0);
    const auto K = build_kernel(d, a, 0.7, g, KernelMode::spectral_symbol);
    CHECK(K.symbol[0] == 0.0);
    RField rho(g.size());
    for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = 1.0 + std::sin(0.3 * i) + 0.1 * (i % 7);
    const auto phi = convolve_potential(K, rho);
    const Lattice lat = g.lattice();
    double mean = 0;
    for (double s : K.samples) mean += s;
    CHECK(std::abs(mean) < 1e-10 * g.size());
    for (std::size_t i = 0; i < rho.size(); i += 37) {
      const auto xi = lat.unflatten(i);
      double direct = 0;
      for (std::size_t j = 0; j < rho.size(); ++j) {
        const auto xj = lat.unflatten(j);
        direct += K.at_offset({xi[0] - xj[0], xi[1] - xj[1], xi[2] - xj[2]}) * rho[j] * g.cell();
      }
      CHECK(phi[i] == doctest::Approx(direct).epsilon(1e-10));
    }
  }
}

TEST_CASE("minimal-image kernel reproduces the direct periodic sum") {
  const TorusGrid g(2, 8, 4.0);
  const double a = -0.5, gamma = 1.5;
  const auto K = build_kernel(2, a, gamma, g, KernelMode::minimal_image);
  const Lattice lat = g.lattice();
  auto raw = [&](int m0, int m1) {
    auto wrap = [&](int m) { m = ((m % 8) + 8) % 8; return m <= 4 ? m : m - 8; };
    const double x = wrap(m0) * g.h(), y = wrap(m1) * g.h();
    if (x == 0 && y == 0) return midpoint_cell_average(2, a, g.h(), 2000);
    return std::pow(std::sqrt(x * x + y * y), -a);
  };
  RField rho(g.size());
  double rmean = 0, rawsum = 0;
  for (std::size_t i = 0; i < rho.size(); ++i) rmean += (rho[i] = std::cos(0.2 * i) + 1.3);
  rmean /= rho.size();
  for (std::size_t i = 0; i < rho.size(); ++i) {
    auto m = lat.unflatten(i);
    rawsum += raw(m[0], m[1]);
  }
  const auto phi = convolve_potential(K, rho);
  for (std::size_t i = 0; i < rho.size(); i += 11) {
    const auto xi = lat.unflatten(i);
    double direct = 0;
    for (std::size_t j = 0; j < rho.size(); ++j) {
      const auto xj = lat.unflatten(j);
      direct += raw(xi[0] - xj[0], xi[1] - xj[1]) * rho[j];
    }
    // the k = 0 mode is removed
    direct = gamma * g.cell() * (direct - rawsum * rmean);
    CHECK(phi[i] == doctest::Approx(direct).epsilon(1e-6));
  }
}

TEST_CASE("force of a single Fourier mode") {
  const double L = 2 * kPi;
  const TorusGrid g(2, 16, L);
  const auto K = build_kernel(2, 0.0, 1.0, g, KernelMode::spectral_symbol);
  const double k = 2.0;
  RField rho(g.size());
  const Lattice lat = g.lattice();
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = 1 + 0.1 * std::cos(k * g.node(lat.unflatten(i)[0]));
  const auto E = force(K, rho);
  const double Khat = -2 * kPi / (k * k);
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const double x = g.node(lat.unflatten(i)[0]);
    CHECK(E[0][i] == doctest::Approx(0.1 * Khat * k * std::sin(k * x)).epsilon(1e-12).scale(1));
    CHECK(std::abs(E[1][i]) < 1e-12);
  }
  const auto fd = field_diagnostics(K, rho, {2.0});
  CHECK(fd.e_inf == doctest::Approx(0.1 * std::abs(Khat) * k).epsilon(1e-3));
  CHECK(fd.grad_e_inf == doctest::Approx(0.1 * std::abs(Khat) * k * k).epsilon(1e-12));
  CHECK(fd.rho_l1 == doctest::Approx(L * L).epsilon(1e-12));
}

TEST_CASE("exponent range and mode restrictions") {
  const TorusGrid g(3, 8, 1.0);
  CHECK_THROWS_AS(build_kernel(3, 1.5, 1.0, g, KernelMode::spectral_symbol), ArgumentError);
  CHECK_THROWS_AS(build_kernel(3, -1.0, 1.0, g, KernelMode::minimal_image), ArgumentError);
  CHECK_THROWS_AS(build_kernel(3, -0.5, 1.0, g, KernelMode::spectral_symbol), ArgumentError);
  CHECK_NOTHROW(build_kernel(3, -0.5, 1.0, g, KernelMode::minimal_image));
  CHECK(parse_kernel_mode("minimal-image") == KernelMode::minimal_image);
  CHECK_THROWS_AS(parse_kernel_mode("ewald"), ConfigError);
}
