#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <numbers>

#include "rvlab/error.hpp"
#include "rvlab/vlasov.hpp"

using namespace rvlab;

namespace {

constexpr double kPi = std::numbers::pi;

double gauss(double v0, double v1, double s) { return std::exp(-(v0 * v0 + v1 * v1) / (2 * s * s)) / (2 * kPi * s * s); }

// (1 + A cos(k x0)) times a centred Gaussian of width s, unit mass.
PhaseSpaceDensity modulated(const TorusGrid& xg, const VelocityGrid& vg, double A, double s) {
  PhaseSpaceDensity f(xg, vg);
  const double k = 2 * kPi / xg.L;
  for (std::size_t ix = 0; ix < f.nx(); ++ix) {
    const double x0 = xg.node(xg.lattice().unflatten(ix)[0]);
    for (std::size_t iv = 0; iv < f.nv(); ++iv) {
      const auto v = f.velocity(iv);
      f.at(ix, iv) = (1 + A * std::cos(k * x0)) * gauss(v[0], v[1], s) / xg.volume();
    }
  }
  return f;
}

}  // namespace

TEST_CASE("free transport is exact along relativistic characteristics") {
  const TorusGrid xg(2, 16, 2 * kPi);
  const VelocityGrid vg(2, 16, 5.0);
  auto f = modulated(xg, vg, 0.3, 0.9);
  const auto f0 = f;
  const double t = 0.7;
  for (Exec ex : {Exec::serial, Exec::parallel}) {
    f = f0;
    x_advect(f, t, ex);
    double err = 0;
    for (std::size_t ix = 0; ix < f.nx(); ++ix) {
      const double x0 = xg.node(xg.lattice().unflatten(ix)[0]);
      for (std::size_t iv = 0; iv < f.nv(); ++iv) {
        const auto v = f.velocity(iv);
        const double speed = v[0] / std::sqrt(1 + v[0] * v[0] + v[1] * v[1]);
        const double exact = (1 + 0.3 * std::cos(x0 - t * speed)) * gauss(v[0], v[1], 0.9) / xg.volume();
        err = std::max(err, std::abs(f.at(ix, iv) - exact));
      }
    }
    CHECK(err < 1e-14);
  }
}

TEST_CASE("velocity kick by a uniform field") {
  const TorusGrid xg(2, 4, 1.0);
  const VelocityGrid vg(2, 64, 8.0);
  auto f = modulated(xg, vg, 0.0, 0.8);
  const std::vector<RField> E{RField(xg.size(), 0.6), RField(xg.size(), -0.25)};
  const double dt = 0.5;
  v_advect(f, E, dt);
  double err = 0;
  for (std::size_t iv = 0; iv < f.nv(); ++iv) {
    const auto v = f.velocity(iv);
    err = std::max(err, std::abs(f.at(1, iv) - gauss(v[0] - 0.3, v[1] + 0.125, 0.8)));
  }
  CHECK(err < 1e-9);
  std::vector<RField> strong{RField(xg.size(), 20.0), RField(xg.size(), 0.0)};
  CHECK_THROWS_AS(v_advect(f, strong, 0.2), SupportOverflow);
}

TEST_CASE("velocity moments of a Gaussian") {
  const TorusGrid xg(2, 4, 1.0);
  const VelocityGrid vg(2, 64, 8.0);
  const double s = 0.8;
  const auto f = modulated(xg, vg, 0.0, s);
  CHECK(f.mass() == doctest::Approx(1.0).epsilon(1e-12));
  // Rayleigh distribution of |v|: mean s sqrt(pi/2), second moment 2 s^2, fourth 8 s^4.
  // |v| has a kink at the origin, so the first moment is only accurate to the quadrature order.
  CHECK(velocity_moment(f, 1.0) == doctest::Approx(s * std::sqrt(kPi / 2)).epsilon(2e-3));
  CHECK(velocity_moment(f, 2.0) == doctest::Approx(2 * s * s).epsilon(1e-12));
  CHECK(velocity_moment(f, 4.0) == doctest::Approx(8 * std::pow(s, 4)).epsilon(1e-12));
  CHECK(lp_norm(f, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(lp_norm(f, 2.0) == doctest::Approx(std::sqrt(1.0 / (4 * kPi * s * s))).epsilon(1e-12));
}

TEST_CASE("Vlasov flow conserves mass and L2; energy error is second order") {
  // Strong modulation on a short box so the splitting error dominates; the fine velocity grid keeps the
  // spectral floor of relativistic transport (singularities at |v| = i) below the measured drift.
  const TorusGrid xg(2, 4, 2.0);
  const VelocityGrid vg(2, 96, 6.0);
  const auto f0 = modulated(xg, vg, 0.8, 0.8);
  const auto K = build_kernel(2, 0.0, 1.0, xg, KernelMode::spectral_symbol);
  auto run = [&](double dt) {
    VlasovConfig cfg;
    cfg.dt = dt;
    return evolve(f0, K, 0.5, cfg);
  };
  const auto r1 = run(0.02), r2 = run(0.01);
  for (const auto* r : {&r1, &r2}) {
    CHECK(std::abs(r->series.back().mass - 1.0) < 1e-12);
    // Only the damped Nyquist modes of the kick change the L2 norm.
    CHECK(std::abs(r->series.back().l2 - r->series.front().l2) / r->series.front().l2 < 1e-5);
  }
  auto drift = [](const VlasovResult& r) {
    double w = 0;
    for (const auto& d : r.series) w = std::max(w, std::abs(d.energy - r.series.front().energy));
    return w;
  };
  const double ratio = drift(r1) / drift(r2);
  CHECK(ratio > 3.5);
  CHECK(ratio < 4.5);
  const auto& last = r2.series.back();
  for (std::size_t k = 0; k < last.moments.size(); ++k) CHECK(last.moments_sup[k] >= last.moments[k]);
}

TEST_CASE("free flow keeps velocity moments") {
  const TorusGrid xg(2, 16, 10.0);
  const VelocityGrid vg(2, 32, 6.0);
  const auto K0 = build_kernel(2, 0.0, 0.0, xg, KernelMode::spectral_symbol);
  VlasovConfig cfg;
  cfg.dt = 0.05;
  const auto r = evolve(modulated(xg, vg, 0.4, 0.8), K0, 1.0, cfg);
  for (std::size_t k = 0; k < cfg.moments.size(); ++k)
    CHECK(std::abs(r.series.back().moments[k] / r.series.front().moments[k] - 1) < 1e-10);
}

TEST_CASE("serial and parallel steps agree") {
  const TorusGrid xg(2, 8, 10.0);
  const VelocityGrid vg(2, 48, 8.0);
  const auto K = build_kernel(2, 0.0, 1.0, xg, KernelMode::spectral_symbol);
  auto a = modulated(xg, vg, 0.3, 1.0), b = a;
  VlasovConfig ca, cb;
  ca.exec = Exec::serial;
  cb.exec = Exec::parallel;
  for (int i = 0; i < 5; ++i) {
    vlasov_step(a, K, 0.05, ca);
    vlasov_step(b, K, 0.05, cb);
  }
  double err = 0;
  for (std::size_t i = 0; i < a.f.size(); ++i) err = std::max(err, std::abs(a.f[i] - b.f[i]));
  CHECK(err < 1e-15);
}

TEST_CASE("stability probe: identical data stay together, perturbed data separate") {
  const TorusGrid xg(2, 8, 10.0);
  const VelocityGrid vg(2, 48, 8.0);
  const auto K = build_kernel(2, 0.0, 1.0, xg, KernelMode::spectral_symbol);
  VlasovConfig cfg;
  cfg.dt = 0.05;
  const auto f1 = modulated(xg, vg, 0.3, 1.0);
  const auto same = stability_probe(f1, f1, K, 0.2, cfg);
  CHECK(same.series.back().l1_distance == 0.0);
  const auto f2 = modulated(xg, vg, 0.31, 1.0);
  const auto rep = stability_probe(f1, f2, K, 0.2, cfg);
  CHECK(rep.series.front().l1_distance > 0.0);
  CHECK(std::isfinite(rep.growth_rate));
  CHECK(rep.p == doctest::Approx(2.0));
}

TEST_CASE("snapshot round trip") {
  const TorusGrid xg(2, 8, 10.0);
  const VelocityGrid vg(2, 16, 6.0);
  const auto f = modulated(xg, vg, 0.3, 1.0);
  const std::string path = "rvlab_test_snapshot.rvpf";
  save_snapshot(path, f);
  const auto g = load_snapshot(path);
  std::remove(path.c_str());
  CHECK(g.xg == xg);
  CHECK(g.vg == vg);
  CHECK(g.f == f.f);
}
