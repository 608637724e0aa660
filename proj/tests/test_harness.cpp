#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <functional>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rvlab/error.hpp"
#include "rvlab/fft.hpp"
#include "rvlab/harness.hpp"

using namespace rvlab;
namespace fs = std::filesystem;

namespace {

// Small matched setup: the dual grids for N = 16, 20, 25 on n = 24 cover the velocity profile.
const char* kSmall =
    "d=2\na=0\ngamma=1\n"
    "grid.n=24\ngrid.L=10\ngrid.n_v=32\ngrid.V=1.8\n"
    "preset.v_edge=0.3\npreset.bump_width=2\n"
    "harness.N=16,20,25\ncompare.N=16\nharness.T=0.1\nharness.samples=2\n"
    "vlasov.dt=0.025\nvlasov.boundary_tol=1e-5\nhartree.dt=0.025\n"
    "state.max_distortion=0.5\nweyl.alias_tol=1e-3\nanalysis.sobolev_samples=0\n";

ExperimentConfig small(const std::string& extra = "") { return parse_experiment(Config::from_string(kSmall + extra)); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <class E>
std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const E& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("rate fit recovers power laws") {
  const std::vector<double> eps{0.1, 0.2, 0.4, 0.8};
  std::vector<double> lin, sq;
  for (double e : eps) lin.push_back(3 * e), sq.push_back(0.5 * std::sqrt(e));
  const auto a = fit_rate(eps, lin);
  CHECK(a.slope == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::exp(a.intercept) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(a.ci_half_width < 1e-10);
  CHECK(a.monotone);
  const auto b = fit_rate(eps, sq);
  CHECK(b.slope == doctest::Approx(0.5).epsilon(1e-12));
  double sum = 0;
  for (double c : b.contributions) sum += c;
  CHECK(sum == doctest::Approx(b.slope).epsilon(1e-12));

  const auto noisy = fit_rate(eps, {1.0, 2.5, 3.0, 9.0});
  CHECK(noisy.ci_half_width > 0);
  CHECK(fit_rate(eps, {1.0, 3.0, 2.0, 4.0}).monotone == false);

  CHECK(message_of<ArgumentError>([] { fit_rate({0.1, 0.2}, {1, 2}); }).find("need ≥3 points") != std::string::npos);
  CHECK_THROWS_AS(fit_rate({0.1, 0.2, 0.4}, {1, 0, 2}), NumericalError);
}

TEST_CASE("initial data: unit mass, nonnegative, preset consistency") {
  const ExperimentConfig cfg;
  const auto xg = position_grid(cfg);
  const auto vg = velocity_grid(cfg);
  const auto f = build_initial(cfg.preset, xg, vg);
  CHECK(f.mass() == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(f.min() >= 0.0);

  auto p = cfg.preset;
  p.name = "modulated-gaussian";
  p.modulation_amplitude = 0.0;
  CHECK(build_initial(p, xg, vg).f == f.f);
  p.modulation_amplitude = 0.3;
  const auto g = build_initial(p, xg, vg);
  CHECK(g.mass() == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(g.f != f.f);

  // the profile is a product rho(x) g(v): the tail fraction factorizes over the two spectra
  auto spectrum_outside = [](RField field, int n, int d) {
    CField c(field.begin(), field.end());
    fft::forward(c.data(), std::vector<int>(d, n));
    double all = 0, out = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      std::size_t rem = i;
      bool inside = true;
      for (int a = 0; a < d; ++a) {
        const int m = static_cast<int>(rem % n);
        rem /= n;
        if (3 * std::min(m, n - m) > n) inside = false;
      }
      all += std::norm(c[i]);
      if (!inside) out += std::norm(c[i]);
    }
    return out / all;
  };
  RField rho(f.nx()), prof(f.nv());
  for (std::size_t ix = 0; ix < f.nx(); ++ix) rho[ix] = f.at(ix, 0);
  for (std::size_t iv = 0; iv < f.nv(); ++iv) prof[iv] = f.at(0, iv);
  const double a = spectrum_outside(rho, xg.n, 2), b = spectrum_outside(prof, vg.n_v, 2);
  CHECK(spectral_tail_fraction(f) == doctest::Approx(a + b - a * b).epsilon(1e-8));
}

TEST_CASE("initial data rejections") {
  const ExperimentConfig cfg;
  const auto xg = position_grid(cfg);
  auto p = cfg.preset;
  p.v_edge = 0.15;
  CHECK_THROWS_AS(build_initial(p, xg, velocity_grid(cfg)), RejectedInput);
  CHECK_THROWS_AS(build_initial(cfg.preset, xg, velocity_grid(cfg), 1e-14), SupportOverflow);
  p = cfg.preset;
  p.name = "top-hat";
  CHECK_THROWS_AS(build_initial(p, xg, velocity_grid(cfg)), ConfigError);
}

TEST_CASE("experiment parsing and admissibility") {
  CHECK_THROWS_AS(parse_experiment(Config::from_string("d=4\n")), ConfigError);
  CHECK_THROWS_AS(parse_experiment(Config::from_string("harness.N=64,16,256\n")), ConfigError);
  CHECK_THROWS_AS(parse_experiment(Config::from_string("harness.mode=classical\n")), ConfigError);
  CHECK_THROWS_AS(parse_experiment(Config::from_string("harness.schatten_p=2,1\n")), ConfigError);
  CHECK(message_of<ConfigError>([] { parse_experiment(Config::from_string("grid.nv=3\n")); }).find("grid.nv") !=
        std::string::npos);

  auto cfg = parse_experiment(Config::from_string("a=0.5\n"));
  const auto msg = message_of<ConfigError>([&] { validate_comparison(cfg); });
  CHECK(msg.find("key 'a'") != std::string::npos);
  CHECK(msg.find("(max{d/2 - 2, -1}, d - 2]") != std::string::npos);
  cfg = parse_experiment(Config::from_string("d=3\na=1\n"));
  CHECK_NOTHROW(validate_comparison(cfg));
  CHECK(cfg.q_value() == doctest::Approx(1.4));
  cfg = parse_experiment(Config::from_string("d=3\na=-0.5\n"));
  CHECK_THROWS_AS(validate_comparison(cfg), ConfigError);
  cfg = parse_experiment(Config::from_string("harness.q=2.5\n"));
  CHECK_THROWS_AS(validate_comparison(cfg), ConfigError);

  const auto e = parse_experiment(Config::from_string("harness.N=16,64\n")).eps_list();
  CHECK(e[0] == doctest::Approx(0.25));
  CHECK(e[1] == doctest::Approx(0.125));
}

TEST_CASE("matched pair is a valid state of trace N") {
  const auto cfg = small();
  const auto f0 = build_initial(cfg.preset, position_grid(cfg), velocity_grid(cfg), cfg.vlasov.boundary_tol);
  const auto mp = matched_pair(f0, 16, cfg.state, cfg.alias_tol);
  CHECK(mp.omega.trace() == doctest::Approx(16).epsilon(1e-12));
  CHECK(mp.omega.eps == doctest::Approx(0.25));
  for (double o : mp.omega.occ) {
    CHECK(o >= 0);
    CHECK(o <= 1 + 1e-12);
  }
  CHECK(mp.alias.total() <= cfg.alias_tol);
  CHECK_NOTHROW(validate(mp.omega));
}

TEST_CASE("comparison: initial distance is the matching distortion, outputs are deterministic") {
  // occupations above one force clipping, so the initial distance is not round-off
  const auto cfg = small("preset.bump_amplitude=3\n");
  const fs::path base = fs::temp_directory_path() / "rvlab_test_compare";
  fs::remove_all(base);
  const auto r1 = compare(cfg, (base / "a").string());
  const auto r2 = compare(cfg, (base / "b").string());
  REQUIRE(r1.runs.size() == 1);
  const auto& run = r1.runs[0];
  CHECK(run.N == 16);
  REQUIRE(run.points.size() == 3);
  CHECK(run.distortion.clipped_positive > 1e-4);
  CHECK(run.points[0].hartree[0] == doctest::Approx(run.distortion.s1_distance / run.N).epsilon(1e-8));
  CHECK(run.points.back().t == doctest::Approx(0.1));
  CHECK(std::isnan(run.points[0].exchange_s1));
  for (const char* name : {"timeseries.csv", "sweep.csv", "vlasov.csv"}) {
    CHECK(fs::exists(base / "a" / name));
    CHECK(slurp(base / "a" / name) == slurp(base / "b" / name));
  }
  const auto manifest = nlohmann::json::parse(slurp(base / "a" / "manifest.json"));
  CHECK(manifest["status"] == "complete");
  CHECK(manifest["command"] == "compare");
  CHECK(manifest.contains("versions"));
  const auto report = nlohmann::json::parse(slurp(base / "a" / "report.json"));
  CHECK(report["runs"].size() == 1);
  fs::remove_all(base);
}

TEST_CASE("comparison in both modes records the exchange gap") {
  const auto rep = compare(small("harness.mode=both\n"));
  const auto& run = rep.runs[0];
  CHECK(run.points[0].exchange_s1 == doctest::Approx(0.0).scale(1e-12));
  CHECK(run.points.back().exchange_s1 > 0);
  CHECK(run.points.back().hartree_fock.size() == 2);
  CHECK(run.hartree_fock_diag.back().ortho_drift < 1e-8);
}

TEST_CASE("sweep needs three N and fits the rate") {
  CHECK_THROWS_AS(sweep(small("harness.N=16,25\n")), ConfigError);
  CHECK_THROWS_AS(run_comparison(small("vlasov.dt=0.03\n"), ""), ConfigError);
  const auto rep = sweep(small("analysis.sobolev_samples=2\n"));
  REQUIRE(rep.runs.size() == 3);
  CHECK(rep.have_fit);
  CHECK(std::isfinite(rep.s1_fit.slope));
  CHECK(rep.s1_fit.contributions.size() == 3);
  REQUIRE(rep.sobolev.size() == 2);
  for (const auto& r : rep.runs) {
    CHECK(r.gronwall.series.size() == 2);
    CHECK(r.fitted_constant > 0);
  }
}
