#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "rvlab/analysis.hpp"
#include "rvlab/error.hpp"

using namespace rvlab;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

// min over R of |S^{d-1}| R^{d+b} / (d+b) + R^{b-c}, by golden-section search on log R.
double split_radius_minimum(double b, double c, int d) {
  const double sphere = d == 2 ? 2 * kPi : 4 * kPi;
  auto g = [&](double lr) {
    const double R = std::exp(lr);
    return sphere * std::pow(R, d + b) / (d + b) + std::pow(R, b - c);
  };
  double lo = -20, hi = 20;
  const double phi = 0.5 * (std::sqrt(5.0) - 1);
  for (int i = 0; i < 200; ++i) {
    const double m1 = hi - phi * (hi - lo), m2 = lo + phi * (hi - lo);
    if (g(m1) < g(m2))
      hi = m2;
    else
      lo = m1;
  }
  return g(0.5 * (lo + hi));
}

}  // namespace

TEST_CASE("regularity index") {
  CHECK(regularity_index(2, 0.0) == 6);
  CHECK(regularity_index(3, 1.0) == 10);
  CHECK(regularity_index(3, 0.0) == 6);
  CHECK(regularity_index(3, -0.5) == 6);
}

TEST_CASE("moment bound constant is the optimal split radius") {
  for (int d : {2, 3})
    for (auto [b, c] : std::vector<std::pair<double, double>>{{0, 1}, {0, 2}, {1, 2}, {0.5, 3}, {1, 4}})
      CHECK(moment_bound_constant(b, c, d) == doctest::Approx(split_radius_minimum(b, c, d)).epsilon(1e-10));
  CHECK(moment_bound_constant(2, 2, 2) == 1.0);
  CHECK_THROWS_AS(moment_bound_constant(3, 2, 2), ArgumentError);
}

TEST_CASE("weighted Sobolev norms of a product of modes") {
  const TorusGrid xg(2, 8, 2 * kPi);
  const VelocityGrid vg(2, 8, 4.0);
  const double kx = 2.0, kv = 2 * kPi / (2 * vg.V);
  PhaseSpaceDensity f(xg, vg);
  const auto lx = xg.lattice();
  for (std::size_t ix = 0; ix < f.nx(); ++ix) {
    const double x0 = xg.node(lx.unflatten(ix)[0]);
    for (std::size_t iv = 0; iv < f.nv(); ++iv) f.at(ix, iv) = std::cos(kx * x0) * std::cos(kv * f.velocity(iv)[0]);
  }
  const double vol = xg.volume() * std::pow(2 * vg.V, 2);
  CHECK(weighted_sobolev(f, 0, 0, 2) == doctest::Approx(std::sqrt(vol / 4)).epsilon(1e-12));
  CHECK(weighted_sobolev(f, 1, 0, 2) == doctest::Approx(std::sqrt(vol * (1 + kx * kx + kv * kv) / 4)).epsilon(1e-12));
  CHECK(weighted_sobolev(f, 2, 0, 2) ==
        doctest::Approx(std::sqrt(vol * (1 + kx * kx + kv * kv + std::pow(kx, 4) + std::pow(kv, 4) +
                                         kx * kx * kv * kv) / 4))
            .epsilon(1e-12));
  CHECK(weighted_sobolev(f, 1, 0, kInf) == doctest::Approx(std::max({1.0, kx, kv})).epsilon(1e-12));

  // weight <z> = sqrt(1 + |x - L/2|^2 + |v|^2) evaluated node by node
  double sup = 0, l2 = 0;
  for (std::size_t ix = 0; ix < f.nx(); ++ix) {
    const auto idx = lx.unflatten(ix);
    const double a = xg.node(idx[0]) - xg.L / 2, b = xg.node(idx[1]) - xg.L / 2;
    for (std::size_t iv = 0; iv < f.nv(); ++iv) {
      const double s = f.speed(iv);
      const double z2 = 1 + a * a + b * b + s * s;
      sup = std::max(sup, std::sqrt(z2) * std::abs(f.at(ix, iv)));
      l2 += z2 * f.at(ix, iv) * f.at(ix, iv);
    }
  }
  CHECK(weighted_sobolev(f, 0, 1, kInf) == doctest::Approx(sup).epsilon(1e-12));
  CHECK(weighted_sobolev(f, 0, 1, 2) == doctest::Approx(std::sqrt(l2 * f.cell())).epsilon(1e-12));
  CHECK_THROWS_AS(weighted_sobolev(f, 1, 0, 3.0), ArgumentError);
}

TEST_CASE("density Sobolev norm of a cosine") {
  const TorusGrid g(2, 16, 5.0);
  const double k = 2 * kPi * 3 / g.L;
  RField rho(g.size());
  const auto lat = g.lattice();
  for (std::size_t i = 0; i < g.size(); ++i) rho[i] = std::cos(k * g.node(lat.unflatten(i)[1]));
  const double half = g.volume() / 2;
  CHECK(sobolev_density(g, rho, 0) == doctest::Approx(std::sqrt(half)).epsilon(1e-12));
  CHECK(sobolev_density(g, rho, 1) == doctest::Approx(std::sqrt((1 + k * k) * half)).epsilon(1e-12));
  CHECK(sobolev_density(g, rho, 2) == doctest::Approx(std::sqrt((1 + k * k + std::pow(k, 4)) * half)).epsilon(1e-12));
  CHECK(sobolev_density(g, rho, 0.5) == doctest::Approx(std::sqrt(std::sqrt(1 + k * k) * half)).epsilon(1e-12));
}

TEST_CASE("Gronwall right-hand side with frozen coefficients") {
  const TorusGrid g(2, 8, 10.0);
  auto series = [](int m, double T) {
    std::vector<SobolevReport> s(m);
    for (int i = 0; i < m; ++i) {
      s[i].t = T * i / (m - 1);
      s[i].h = 2;
      s[i].rho = 1;
      s[i].grad_v = 2;
    }
    return s;
  };
  // no interaction: no exponential factor, C(t) = 1 + (1+rho) h t
  const auto K0 = build_kernel(2, 0.0, 0.0, g, KernelMode::spectral_symbol);
  const auto e0 = gronwall_rhs(series(5, 1.0), K0, 64, 0.125, 0.01);
  for (const auto& p : e0.series) CHECK(p.rhs == doctest::Approx((0.01 + 8) * (1 + 4 * p.t)).epsilon(1e-12));

  // C(t) = 1 + a t, lambda = 1: C + int C lambda e^{lambda (t-s)} = e^t (1 + a) - a
  const auto K = build_kernel(2, 0.0, 0.5, g, KernelMode::spectral_symbol);
  const auto e1 = gronwall_rhs(series(401, 1.0), K, 1, 0.0, 1.0);
  const double a = 1.5 * 2 * 2;
  for (const auto& p : e1.series) CHECK(p.rhs == doctest::Approx(std::exp(p.t) * (1 + a) - a).epsilon(1e-5));

  auto bad = series(3, 1.0);
  bad[2].t = 0.2;
  CHECK_THROWS_AS(gronwall_rhs(bad, K, 1, 0, 0), ArgumentError);
}

TEST_CASE("moment inequalities hold on random nonnegative fields") {
  const TorusGrid xg(2, 4, 1.0);
  const VelocityGrid vg(2, 12, 3.0);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0, 1);
  for (int k = 0; k < 20; ++k) {
    PhaseSpaceDensity f(xg, vg);
    for (auto& v : f.f) v = std::pow(u(rng), 4);
    for (const auto& r : moment_inequality_suite(f)) CHECK_MESSAGE(r.pass, r.name);
  }
  PhaseSpaceDensity neg(xg, vg);
  neg.f[0] = -1;
  CHECK_THROWS_AS(moment_inequality_suite(neg), ArgumentError);
}
