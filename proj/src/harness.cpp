#include "rvlab/harness.hpp"

#include <fftw3.h>

#include <Eigen/Core>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "rvlab/error.hpp"
#include "rvlab/fft.hpp"
#include "rvlab/io.hpp"
#include "rvlab/log.hpp"

namespace rvlab {

namespace {

constexpr const char* kVersion = "0.1.0";

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

Exec parse_exec(const std::string& s) {
  if (s == "parallel") return Exec::parallel;
  if (s == "serial") return Exec::serial;
  throw ConfigError("exec must be 'serial' or 'parallel', got '" + s + "'");
}

// Runs fn(i) for i in [0, n) across threads; the first exception is rethrown.
template <class F>
void parallel_over(int n, F&& fn) {
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < n; ++i) {
    try {
      fn(i);
    } catch (...) {
#pragma omp critical(rvlab_parallel_over)
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
}

int steps_per_interval(double interval, double dt, const std::string& what) {
  const double r = interval / dt;
  const long k = std::lround(r);
  if (k < 1 || std::abs(r - k) > 1e-6 * std::max(1.0, r))
    throw ConfigError("time-grid mismatch: " + what + " = " + fmt(dt) + " does not divide the sample interval " +
                      fmt(interval));
  return static_cast<int>(k);
}

// Two-sided 97.5% Student t quantiles for 1..10 degrees of freedom.
double t_quantile(int dof) {
  static const double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228};
  if (dof < 1) return std::numeric_limits<double>::quiet_NaN();
  return dof <= 10 ? table[dof - 1] : 1.96;
}

// Smooth radial plateau: the unit ball of radius R blurred by a Gaussian of width w,
// normalized to 1 at the origin. Reduces to exp(-r^2 / 2w^2) for R = 0.
double plateau(double r, double R, double w) {
  if (R <= 0) return std::exp(-r * r / (2 * w * w));
  const double c = std::sqrt(2.0) * w;
  return (std::erf((R + r) / c) + std::erf((R - r) / c)) / (2 * std::erf(R / c));
}

std::string utc_now() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

std::map<std::string, std::string> describe(const ExperimentConfig& c) {
  auto list = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + io::format_double(v[i]);
    return s;
  };
  auto num = [](double v) { return io::format_double(v); };
  std::map<std::string, std::string> m;
  m["d"] = std::to_string(c.d);
  m["a"] = num(c.a);
  m["gamma"] = num(c.gamma);
  m["kernel.mode"] = to_string(c.kernel_mode);
  m["grid.n"] = std::to_string(c.n);
  m["grid.n_v"] = std::to_string(c.n_v);
  m["grid.L"] = num(c.L);
  m["grid.V"] = num(c.V);
  m["harness.N"] = list(c.N_list);
  m["harness.T"] = num(c.T);
  m["harness.mode"] = c.mode;
  m["harness.schatten_p"] = list(c.schatten_p);
  m["harness.samples"] = std::to_string(c.samples);
  m["harness.q"] = num(c.q_value());
  m["harness.preset"] = c.preset.name;
  m["compare.N"] = num(c.compare_N);
  m["preset.bump_amplitude"] = num(c.preset.bump_amplitude);
  m["preset.bump_width"] = num(c.preset.bump_width > 0 ? c.preset.bump_width : c.L / 8);
  m["preset.v_radius"] = num(c.preset.v_radius);
  m["preset.v_edge"] = num(c.preset.v_edge);
  m["preset.modulation_amplitude"] = num(c.preset.modulation_amplitude);
  m["preset.modulation_mode"] = std::to_string(c.preset.modulation_mode);
  m["seed"] = std::to_string(c.seed);
  m["threads"] = std::to_string(c.threads);
  m["vlasov.dt"] = num(c.vlasov.dt);
  m["vlasov.T"] = num(c.vlasov_T);
  m["vlasov.pos_tol"] = num(c.vlasov.pos_tol);
  m["vlasov.boundary_tol"] = num(c.vlasov.boundary_tol);
  m["vlasov.moments"] = list(c.vlasov.moments);
  m["vlasov.diag_every"] = std::to_string(c.vlasov.diag_every);
  m["vlasov.exec"] = c.vlasov.exec == Exec::parallel ? "parallel" : "serial";
  m["hartree.dt"] = num(c.hartree.dt);
  m["hartree.T"] = num(c.hartree_T);
  m["hartree.N"] = num(c.hartree_N);
  m["hartree.mode"] = to_string(c.hartree.mode);
  m["hartree.monitor_every"] = std::to_string(c.hartree.monitor_every);
  m["hartree.unitarity_tol"] = num(c.hartree.unitarity_tol);
  m["hartree.gamma_cr"] = num(c.hartree.gamma_cr);
  m["hartree.exec"] = c.hartree.exec == Exec::parallel ? "parallel" : "serial";
  m["state.trace_tol"] = num(c.state.trace_tol);
  m["state.ortho_tol"] = num(c.state.ortho_tol);
  m["state.occ_floor"] = num(c.state.occ_floor);
  m["state.max_distortion"] = num(c.state.max_distortion);
  m["weyl.alias_tol"] = num(c.alias_tol);
  m["analysis.sobolev_samples"] = std::to_string(c.sobolev_samples);
  m["analysis.delta"] = num(c.stability_delta);
  m["output.checkpoints"] = c.checkpoints ? "true" : "false";
  return m;
}

}  // namespace

double ExperimentConfig::q_value() const {
  return q > 0 ? q : std::min(d / (a + 1), 2.0) - 0.1;
}

std::vector<double> ExperimentConfig::eps_list() const {
  std::vector<double> e;
  for (double N : N_list) e.push_back(epsilon_of(N, d));
  return e;
}

std::vector<std::string> known_config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, v] : describe(ExperimentConfig{})) keys.push_back(k);
  return keys;
}

ExperimentConfig parse_experiment(const Config& c) {
  c.require_known(known_config_keys());
  ExperimentConfig e;
  e.d = static_cast<int>(c.get_int("d", e.d));
  if (e.d != 2 && e.d != 3) throw ConfigError("d must be 2 or 3, got " + std::to_string(e.d));
  e.a = c.get_double("a", e.a);
  e.gamma = c.get_double("gamma", e.gamma);
  e.kernel_mode = parse_kernel_mode(c.get_string("kernel.mode", to_string(e.kernel_mode)));
  e.n = static_cast<int>(c.get_int("grid.n", e.n));
  e.n_v = static_cast<int>(c.get_int("grid.n_v", e.n_v));
  e.L = c.get_double("grid.L", e.L);
  e.V = c.get_double("grid.V", e.V);
  e.N_list = c.get_doubles("harness.N", e.N_list);
  for (std::size_t i = 0; i < e.N_list.size(); ++i) {
    if (!(e.N_list[i] > 0)) throw ConfigError("harness.N entries must be positive");
    if (i > 0 && !(e.N_list[i] > e.N_list[i - 1])) throw ConfigError("harness.N must be strictly increasing");
  }
  e.T = c.get_double("harness.T", e.T);
  if (!(e.T > 0)) throw ConfigError("harness.T must be positive");
  e.mode = c.get_string("harness.mode", e.mode);
  if (e.mode != "hartree" && e.mode != "hartree-fock" && e.mode != "both")
    throw ConfigError("harness.mode must be hartree, hartree-fock or both, got '" + e.mode + "'");
  e.schatten_p = c.get_doubles("harness.schatten_p", e.schatten_p);
  for (double p : e.schatten_p)
    if (!(p >= 1)) throw ConfigError("harness.schatten_p entries must be >= 1");
  if (e.schatten_p.size() < 2 || e.schatten_p[0] != 1.0 || e.schatten_p[1] != 2.0)
    throw ConfigError("harness.schatten_p must start with 1,2");
  e.samples = static_cast<int>(c.get_int("harness.samples", e.samples));
  if (e.samples < 1) throw ConfigError("harness.samples must be >= 1");
  e.q = c.get_double("harness.q", e.q);
  e.compare_N = c.get_double("compare.N", e.compare_N);
  e.preset.name = c.get_string("harness.preset", e.preset.name);
  e.preset.bump_amplitude = c.get_double("preset.bump_amplitude", e.preset.bump_amplitude);
  e.preset.bump_width = c.get_double("preset.bump_width", e.preset.bump_width);
  e.preset.v_radius = c.get_double("preset.v_radius", e.preset.v_radius);
  e.preset.v_edge = c.get_double("preset.v_edge", e.preset.v_edge);
  e.preset.modulation_amplitude = c.get_double("preset.modulation_amplitude", e.preset.modulation_amplitude);
  e.preset.modulation_mode = static_cast<int>(c.get_int("preset.modulation_mode", e.preset.modulation_mode));
  e.seed = c.get_u64("seed", e.seed);
  e.threads = static_cast<int>(c.get_int("threads", e.threads));

  e.vlasov.dt = c.get_double("vlasov.dt", e.vlasov.dt);
  e.vlasov_T = c.get_double("vlasov.T", e.vlasov_T);
  e.vlasov.pos_tol = c.get_double("vlasov.pos_tol", e.vlasov.pos_tol);
  e.vlasov.boundary_tol = c.get_double("vlasov.boundary_tol", e.vlasov.boundary_tol);
  e.vlasov.moments = c.get_doubles("vlasov.moments", e.vlasov.moments);
  e.vlasov.diag_every = static_cast<int>(c.get_int("vlasov.diag_every", e.vlasov.diag_every));
  e.vlasov.exec = parse_exec(c.get_string("vlasov.exec", "parallel"));
  if (!(e.vlasov.dt > 0)) throw ConfigError("vlasov.dt must be positive");

  e.hartree.dt = c.get_double("hartree.dt", e.hartree.dt);
  e.hartree_T = c.get_double("hartree.T", e.hartree_T);
  e.hartree_N = c.get_double("hartree.N", e.hartree_N);
  e.hartree.mode = parse_hartree_mode(c.get_string("hartree.mode", to_string(e.hartree.mode)));
  e.hartree.monitor_every = static_cast<int>(c.get_int("hartree.monitor_every", e.hartree.monitor_every));
  e.hartree.unitarity_tol = c.get_double("hartree.unitarity_tol", e.hartree.unitarity_tol);
  e.hartree.gamma_cr = c.get_double("hartree.gamma_cr", e.hartree.gamma_cr);
  e.hartree.exec = parse_exec(c.get_string("hartree.exec", "parallel"));
  if (!(e.hartree.dt > 0)) throw ConfigError("hartree.dt must be positive");

  e.state.trace_tol = c.get_double("state.trace_tol", e.state.trace_tol);
  e.state.ortho_tol = c.get_double("state.ortho_tol", e.state.ortho_tol);
  e.state.occ_floor = c.get_double("state.occ_floor", e.state.occ_floor);
  e.state.max_distortion = c.get_double("state.max_distortion", e.state.max_distortion);
  e.alias_tol = c.get_double("weyl.alias_tol", e.alias_tol);
  e.sobolev_samples = static_cast<int>(c.get_int("analysis.sobolev_samples", e.sobolev_samples));
  e.stability_delta = c.get_double("analysis.delta", e.stability_delta);
  e.checkpoints = c.get_bool("output.checkpoints", e.checkpoints);
  return e;
}

void validate_comparison(const ExperimentConfig& cfg) {
  const double lo = std::max(cfg.d / 2.0 - 2.0, -1.0);
  const double hi = cfg.d - 2.0;
  if (!(cfg.a > lo && cfg.a <= hi)) {
    std::ostringstream ss;
    ss << "key 'a' = " << cfg.a << " is outside (" << lo << ", " << hi << "] for d = " << cfg.d
       << "; semiclassical comparisons require a in (max{d/2 - 2, -1}, d - 2]";
    throw ConfigError(ss.str());
  }
  const double qmax = std::min(cfg.d / (cfg.a + 1), 2.0);
  if (!(cfg.q_value() > 0 && cfg.q_value() < qmax))
    throw ConfigError("key 'harness.q' = " + fmt(cfg.q_value()) + " must lie in (0, " + fmt(qmax) + ")");
}

TorusGrid position_grid(const ExperimentConfig& cfg) { return TorusGrid(cfg.d, cfg.n, cfg.L); }
VelocityGrid velocity_grid(const ExperimentConfig& cfg) { return VelocityGrid(cfg.d, cfg.n_v, cfg.V); }

double spectral_tail_fraction(const PhaseSpaceDensity& f) {
  const int d = f.xg.d;
  std::vector<int> dims;
  for (int a = 0; a < d; ++a) dims.push_back(f.xg.n);
  for (int a = 0; a < d; ++a) dims.push_back(f.vg.n_v);
  CField F = to_complex(f.f);
  fft::transform(F.data(), dims, fft::Direction::kForward);
  double total = 0, tail = 0;
  std::vector<int> idx(dims.size(), 0);
  for (std::size_t i = 0; i < F.size(); ++i) {
    std::size_t rem = i;
    bool outside = false;
    for (int a = static_cast<int>(dims.size()) - 1; a >= 0; --a) {
      const int n = dims[a];
      const int m = static_cast<int>(rem % n);
      rem /= n;
      const int s = m < n / 2 ? m : n - m;
      if (3 * s > n) outside = true;
    }
    const double e = std::norm(F[i]);
    total += e;
    if (outside) tail += e;
  }
  return total > 0 ? tail / total : 0.0;
}

PhaseSpaceDensity build_initial(const PresetParams& p, const TorusGrid& xg, const VelocityGrid& vg,
                                double boundary_tol) {
  if (p.name != "gaussian-bump" && p.name != "modulated-gaussian")
    throw ConfigError("key 'harness.preset' = '" + p.name + "' is not one of gaussian-bump, modulated-gaussian");
  if (xg.d != vg.d) throw ArgumentError("position and velocity grids differ in dimension");
  if (!(p.v_edge > 0) || p.v_radius < 0) throw ConfigError("preset.v_edge must be > 0 and preset.v_radius >= 0");
  if (p.bump_amplitude <= -1) throw ConfigError("preset.bump_amplitude must exceed -1");
  const double m = p.name == "modulated-gaussian" ? p.modulation_amplitude : 0.0;
  if (std::abs(m) >= 1) throw ConfigError("preset.modulation_amplitude must lie in (-1, 1)");

  const int d = xg.d;
  const double L = xg.L;
  const double s = p.bump_width > 0 ? p.bump_width : L / 8;
  const Lattice xl = xg.lattice();
  RField rho(xg.size());
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const auto ix = xl.unflatten(i);
    double x[3] = {0, 0, 0};
    for (int a = 0; a < d; ++a) x[a] = xl.node(ix[a]);
    double bump = 0;
    std::array<int, 3> img{0, 0, 0};
    const int R = 2;
    const int count = static_cast<int>(std::pow(2 * R + 1, d));
    for (int c = 0; c < count; ++c) {
      int rem = c;
      double r2 = 0;
      for (int a = 0; a < d; ++a) {
        img[a] = rem % (2 * R + 1) - R;
        rem /= 2 * R + 1;
        const double dx = x[a] - L / 2 - img[a] * L;
        r2 += dx * dx;
      }
      bump += std::exp(-r2 / (2 * s * s));
    }
    rho[i] = (1 + p.bump_amplitude * bump) * (1 + m * std::cos(2 * std::numbers::pi * p.modulation_mode * x[0] / L));
  }

  PhaseSpaceDensity f(xg, vg);
  RField g(vg.size());
  for (std::size_t j = 0; j < g.size(); ++j) g[j] = plateau(f.speed(j), p.v_radius, p.v_edge);
  for (std::size_t i = 0; i < rho.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j) f.f[i * g.size() + j] = rho[i] * g[j];
  const double mass = f.mass();
  for (auto& v : f.f) v /= mass;

  const double tail = spectral_tail_fraction(f);
  if (tail > 1e-8)
    throw RejectedInput("band-limit violation: spectral tail beyond n/3 modes is " + fmt(tail) +
                        " of the spectrum (limit 1e-8); refine the grid or widen the profile");
  const double shell = f.boundary_shell_fraction();
  if (shell > boundary_tol)
    throw SupportOverflow("velocity support violation: outer shell carries " + fmt(shell) + " of the mass (limit " +
                          fmt(boundary_tol) + "); enlarge grid.V");
  return f;
}

MatchedPair matched_pair(const PhaseSpaceDensity& f0, double N, const StateTolerances& tol, double alias_tol) {
  const double eps = epsilon_of(N, f0.xg.d);
  auto m = match_grids(f0, eps, alias_tol);
  auto A = weyl_quantize(m.W, eps);
  auto r = from_matrix(A, N, eps, tol);
  return MatchedPair{std::move(r.ensemble), r.report, m.report};
}

RateFit fit_rate(const std::vector<double>& eps, const std::vector<double>& distance) {
  if (eps.size() != distance.size()) throw ArgumentError("rate fit needs one distance per eps");
  if (eps.size() < 3) throw ArgumentError("need ≥3 points for a rate fit, got " + std::to_string(eps.size()));
  RateFit r;
  const std::size_t n = eps.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!(eps[i] > 0) || !(distance[i] > 0))
      throw NumericalError("rate fit needs positive eps and distances; point " + std::to_string(i) + " has eps " +
                           fmt(eps[i]) + ", distance " + fmt(distance[i]));
    r.x.push_back(std::log(eps[i]));
    r.y.push_back(std::log(distance[i]));
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += r.x[i];
    my += r.y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (r.x[i] - mx) * (r.x[i] - mx);
    sxy += (r.x[i] - mx) * (r.y[i] - my);
  }
  if (!(sxx > 0)) throw NumericalError("rate fit needs distinct eps values");
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  double ssr = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = r.y[i] - (r.intercept + r.slope * r.x[i]);
    ssr += e * e;
    r.contributions.push_back((r.x[i] - mx) * (r.y[i] - my) / sxx);
  }
  const int dof = static_cast<int>(n) - 2;
  r.ci_half_width = t_quantile(dof) * std::sqrt(ssr / dof / sxx);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return eps[i] < eps[j]; });
  for (std::size_t k = 1; k < n; ++k)
    if (!(distance[order[k]] > distance[order[k - 1]])) r.monotone = false;
  return r;
}

double NRun::sup_excess(std::size_t p_index, bool exchange) const {
  if (points.empty()) return 0;
  auto get = [&](const DistancePoint& p) { return exchange ? p.hartree_fock.at(p_index) : p.hartree.at(p_index); };
  const double floor = get(points.front());
  double sup = floor;
  for (const auto& p : points) sup = std::max(sup, get(p));
  return sup - floor;
}

void write_manifest(const std::string& out_dir, const ExperimentConfig& cfg, const Config* source,
                    const std::string& command) {
  std::filesystem::create_directories(out_dir);
  nlohmann::ordered_json j;
  j["program"] = "rvlab";
  j["version"] = kVersion;
  j["command"] = command;
  j["status"] = "running";
  j["started"] = utc_now();
  j["seed"] = cfg.seed;
  nlohmann::ordered_json eff;
  for (const auto& [k, v] : describe(cfg)) eff[k] = v;
  j["config"] = eff;
  if (source) {
    nlohmann::ordered_json raw;
    for (const auto& [k, v] : source->values()) raw[k] = v;
    j["config_source"] = raw;
    j["overrides"] = source->overrides();
  } else {
    j["overrides"] = nlohmann::json::array();
  }
  nlohmann::ordered_json ver;
  ver["rvlab"] = kVersion;
  ver["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                 std::to_string(EIGEN_MINOR_VERSION);
  ver["fftw"] = std::string(fftw_version);
  ver["compiler"] = std::string(__VERSION__);
  j["versions"] = ver;
  std::ofstream(out_dir + "/manifest.json") << j.dump(2) << "\n";
}

void finish_manifest(const std::string& out_dir, double seconds) {
  const std::string path = out_dir + "/manifest.json";
  std::ifstream in(path);
  auto j = nlohmann::ordered_json::parse(in);
  j["status"] = "complete";
  j["finished"] = utc_now();
  j["seconds"] = seconds;
  std::ofstream(path) << j.dump(2) << "\n";
}

namespace {

nlohmann::ordered_json fit_json(const RateFit& f) {
  return {{"slope", f.slope},        {"intercept", f.intercept}, {"ci_half_width", f.ci_half_width},
          {"monotone", f.monotone},  {"log_eps", f.x},           {"log_distance", f.y},
          {"contributions", f.contributions}};
}

void write_report(const std::string& out_dir, const ComparisonReport& rep) {
  const auto& cfg = rep.cfg;
  const bool hf = cfg.mode != "hartree";
  const bool h = cfg.mode != "hartree-fock";

  std::vector<std::string> head{"N", "eps", "t"};
  auto add_p = [&](const std::string& tag) {
    for (double p : cfg.schatten_p) head.push_back("s" + io::format_double(p) + "_" + tag);
  };
  if (h) add_p("h");
  if (hf) add_p("hf");
  head.push_back("exchange_s1");
  for (const std::string tag : {"h", "hf"}) {
    if ((tag == "h" && !h) || (tag == "hf" && !hf)) continue;
    for (const char* c : {"trace_", "ortho_drift_", "energy_"}) head.push_back(c + tag);
  }
  head.insert(head.end(), {"alias", "vlasov_mass", "vlasov_l2", "vlasov_energy"});
  io::Csv ts(out_dir + "/timeseries.csv", head);
  for (const auto& run : rep.runs) {
    for (std::size_t s = 0; s < run.points.size(); ++s) {
      const auto& pt = run.points[s];
      std::vector<double> row{run.N, run.eps, pt.t};
      if (h) row.insert(row.end(), pt.hartree.begin(), pt.hartree.end());
      if (hf) row.insert(row.end(), pt.hartree_fock.begin(), pt.hartree_fock.end());
      row.push_back(pt.exchange_s1);
      if (h) row.insert(row.end(), {run.hartree_diag[s].trace, run.hartree_diag[s].ortho_drift, run.hartree_diag[s].e_hf});
      if (hf)
        row.insert(row.end(), {run.hartree_fock_diag[s].trace, run.hartree_fock_diag[s].ortho_drift,
                               run.hartree_fock_diag[s].e_hf});
      const auto& v = rep.vlasov[s];
      row.insert(row.end(), {pt.alias, v.mass, v.l2, v.energy});
      ts.row(row);
    }
  }

  auto sweep_csv = [&](const std::string& name, bool exchange, const RateFit& fit) {
    io::Csv sw(out_dir + "/" + name, {"N", "eps", "s1_norm", "s2_norm", "slope_contrib"});
    for (std::size_t i = 0; i < rep.runs.size(); ++i) {
      const auto& r = rep.runs[i];
      const double c = i < fit.contributions.size() ? fit.contributions[i] : std::numeric_limits<double>::quiet_NaN();
      sw.row({r.N, r.eps, r.sup_excess(0, exchange), r.sup_excess(1, exchange), c});
    }
  };
  if (h) sweep_csv("sweep.csv", false, rep.s1_fit);
  if (hf) sweep_csv(h ? "sweep_hf.csv" : "sweep.csv", true, rep.s1_fit_hf);

  io::Csv vc(out_dir + "/vlasov.csv", vlasov_csv_header(cfg.vlasov.moments));
  for (const auto& v : rep.vlasov) vc.row(vlasov_csv_row(v));

  nlohmann::ordered_json j;
  j["seconds"] = rep.seconds;
  j["q"] = cfg.q_value();
  if (rep.have_fit) j["fit_s1"] = fit_json(rep.s1_fit), j["fit_s2"] = fit_json(rep.s2_fit);
  if (rep.have_fit_hf) j["fit_s1_hf"] = fit_json(rep.s1_fit_hf), j["fit_s2_hf"] = fit_json(rep.s2_fit_hf);
  j["fitted_constant_spread"] = rep.fitted_constant_spread;
  auto runs = nlohmann::ordered_json::array();
  for (const auto& r : rep.runs) {
    nlohmann::ordered_json o;
    o["N"] = r.N;
    o["eps"] = r.eps;
    o["rank"] = r.rank;
    o["distortion"] = {{"clipped_negative", r.distortion.clipped_negative},
                       {"clipped_positive", r.distortion.clipped_positive},
                       {"rescale_factor", r.distortion.rescale_factor},
                       {"relative", r.distortion.relative},
                       {"s1_distance", r.distortion.s1_distance},
                       {"dropped", r.distortion.dropped}};
    o["alias"] = {{"spectral_fraction", r.alias.spectral_fraction}, {"outside_fraction", r.alias.outside_fraction}};
    o["fitted_constant"] = r.fitted_constant;
    auto g = nlohmann::ordered_json::array();
    for (const auto& p : r.gronwall.series) g.push_back({{"t", p.t}, {"lambda", p.lambda}, {"C", p.C}, {"rhs", p.rhs}});
    o["gronwall"] = g;
    runs.push_back(o);
  }
  j["runs"] = runs;
  auto sob = nlohmann::ordered_json::array();
  for (const auto& s : rep.sobolev)
    sob.push_back({{"t", s.t},
                   {"sigma", s.sigma},
                   {"nu", s.nu},
                   {"w_inf", s.w_inf},
                   {"h", s.h},
                   {"grad_v", s.grad_v},
                   {"rho", s.rho},
                   {"band_limit_warning", s.band_limit_warning}});
  j["sobolev"] = sob;
  auto ineq = nlohmann::ordered_json::array();
  for (const auto& r : rep.inequalities)
    ineq.push_back({{"name", r.name}, {"lhs", r.lhs}, {"rhs", r.rhs}, {"pass", r.pass}});
  j["inequalities"] = ineq;
  j["warnings"] = rep.warnings;
  std::ofstream(out_dir + "/report.json") << j.dump(2) << "\n";
}

struct RunState {
  NRun result;
  std::unique_ptr<HartreeStepper> h, hf;
};

}  // namespace

ComparisonReport run_comparison(const ExperimentConfig& cfg, const std::string& out_dir, const Config* source,
                                const std::string& command) {
  const auto start = std::chrono::steady_clock::now();
  validate_comparison(cfg);
  const bool want_h = cfg.mode != "hartree-fock";
  const bool want_hf = cfg.mode != "hartree";
  const int S = cfg.samples;
  const double interval = cfg.T / S;
  const int v_steps = steps_per_interval(interval, cfg.vlasov.dt, "vlasov.dt");
  const int h_steps = steps_per_interval(interval, cfg.hartree.dt, "hartree.dt");
  const double v_dt = interval / v_steps;
  const double h_dt = interval / h_steps;
  if (!out_dir.empty()) write_manifest(out_dir, cfg, source, command);

  ComparisonReport rep;
  rep.cfg = cfg;
  const TorusGrid xg = position_grid(cfg);
  const auto K = build_kernel(cfg.d, cfg.a, cfg.gamma, xg, cfg.kernel_mode);
  PhaseSpaceDensity f = build_initial(cfg.preset, xg, velocity_grid(cfg), cfg.vlasov.boundary_tol);
  if (!out_dir.empty()) save_snapshot(out_dir + "/vlasov_initial.rvpf", f);
  rep.inequalities = moment_inequality_suite(f);

  const int nN = static_cast<int>(cfg.N_list.size());
  std::vector<RunState> runs(nN);
  parallel_over(nN, [&](int i) {
    auto& r = runs[i].result;
    r.N = cfg.N_list[i];
    r.eps = epsilon_of(r.N, cfg.d);
    auto mp = matched_pair(f, r.N, cfg.state, cfg.alias_tol);
    r.rank = mp.omega.rank();
    r.distortion = mp.distortion;
    r.alias = mp.alias;
    log::info("matched N=" + fmt(r.N) + " rank=" + std::to_string(r.rank) +
              " distortion=" + fmt(r.distortion.relative));
    if (want_hf) {
      auto c = cfg.hartree;
      c.mode = HartreeMode::hartree_fock;
      runs[i].hf = std::make_unique<HartreeStepper>(mp.omega, K, c);
    }
    if (want_h) {
      auto c = cfg.hartree;
      c.mode = HartreeMode::hartree;
      runs[i].h = std::make_unique<HartreeStepper>(std::move(mp.omega), K, c);
    }
  });
  for (auto& r : runs) {
    for (auto* s : {r.h.get(), r.hf.get()})
      if (s) rep.warnings.insert(rep.warnings.end(), s->warnings().begin(), s->warnings().end());
  }

  std::vector<int> sobolev_at;
  if (cfg.sobolev_samples == 1) sobolev_at.push_back(0);
  for (int j = 0; cfg.sobolev_samples > 1 && j < std::min(cfg.sobolev_samples, S + 1); ++j)
    sobolev_at.push_back(static_cast<int>(std::lround(double(j) * S / (std::min(cfg.sobolev_samples, S + 1) - 1))));

  std::vector<double> sup(cfg.vlasov.moments.size(), 0.0);
  for (int s = 0; s <= S; ++s) {
    const double t = s * interval;
    if (s > 0) {
      vlasov_advance(f, K, v_dt, v_steps, cfg.vlasov);
      parallel_over(nN, [&](int i) {
        for (auto* st : {runs[i].h.get(), runs[i].hf.get()})
          if (st)
            for (int k = 0; k < h_steps; ++k) st->step(h_dt);
      });
    }
    auto vd = vlasov_diagnostics(f, K, cfg.vlasov.moments, t);
    for (std::size_t k = 0; k < sup.size(); ++k) sup[k] = std::max(sup[k], vd.moments[k]);
    vd.moments_sup = sup;
    rep.vlasov.push_back(vd);
    if (std::find(sobolev_at.begin(), sobolev_at.end(), s) != sobolev_at.end())
      rep.sobolev.push_back(sobolev_report(f, K, t));

    parallel_over(nN, [&](int i) {
      auto& run = runs[i];
      const double eps = run.result.eps;
      const double N = run.result.N;
      auto m = match_grids(f, eps, cfg.alias_tol);
      const auto target = weyl_quantize(m.W, eps);
      DistancePoint pt;
      pt.t = t;
      pt.alias = m.report.total();
      // differences of Hermitian matrices, symmetrized so the Hermitian eigensolver applies
      auto hermitian = [&](Matrix D) {
        D = (0.5 * (D + D.adjoint())).eval();
        return OperatorMatrix{xg, std::move(D)};
      };
      auto normalized = [&](const OperatorMatrix& A) {
        auto v = schatten_norms(A, cfg.schatten_p);
        for (std::size_t k = 0; k < v.size(); ++k) v[k] /= std::pow(N, 1.0 / cfg.schatten_p[k]);
        return v;
      };
      OperatorMatrix wh{xg, {}}, whf{xg, {}};
      if (run.h) {
        wh = to_matrix(run.h->state());
        run.result.hartree_diag.push_back(run.h->diagnose(t));
        pt.hartree = normalized(hermitian(wh.A - target.A));
      }
      if (run.hf) {
        whf = to_matrix(run.hf->state());
        run.result.hartree_fock_diag.push_back(run.hf->diagnose(t));
        pt.hartree_fock = normalized(hermitian(whf.A - target.A));
      }
      if (run.h && run.hf) pt.exchange_s1 = schatten_norm(hermitian(whf.A - wh.A), 1.0) / N;
      std::ostringstream ss;
      ss << "sample t=" << t << " N=" << N;
      if (run.h) ss << " s1_h=" << pt.hartree[0];
      if (run.hf) ss << " s1_hf=" << pt.hartree_fock[0];
      log::info(ss.str());
      run.result.points.push_back(std::move(pt));
    });
  }
  if (!out_dir.empty()) save_snapshot(out_dir + "/vlasov_final.rvpf", f);

  double cmin = std::numeric_limits<double>::infinity(), cmax = 0;
  for (auto& run : runs) {
    auto& r = run.result;
    if (!rep.sobolev.empty()) {
      const auto& first = r.points.front();
      const double d0 = r.N * (want_h ? first.hartree[0] : first.hartree_fock[0]);
      r.gronwall = gronwall_rhs(rep.sobolev, K, r.N, r.eps, d0);
      for (std::size_t j = 0; j < sobolev_at.size(); ++j) {
        const auto& p = r.points[sobolev_at[j]];
        const double dist = r.N * (want_h ? p.hartree[0] : p.hartree_fock[0]);
        r.fitted_constant = std::max(r.fitted_constant, dist / r.gronwall.series[j].rhs);
      }
      cmin = std::min(cmin, r.fitted_constant);
      cmax = std::max(cmax, r.fitted_constant);
    }
    if (cfg.checkpoints && !out_dir.empty()) {
      if (run.h) save_checkpoint(out_dir + "/hartree_N" + fmt(r.N) + ".rvmf", run.h->state());
      if (run.hf) save_checkpoint(out_dir + "/hartree_fock_N" + fmt(r.N) + ".rvmf", run.hf->state());
    }
    rep.runs.push_back(std::move(r));
  }
  rep.fitted_constant_spread = cmin > 0 ? cmax / cmin : std::numeric_limits<double>::infinity();

  if (nN >= 3) {
    auto fit = [&](bool exchange, RateFit& s1, RateFit& s2) {
      std::vector<double> e, d1, d2;
      for (const auto& r : rep.runs) {
        e.push_back(r.eps);
        d1.push_back(r.sup_excess(0, exchange));
        d2.push_back(r.sup_excess(1, exchange));
      }
      try {
        s1 = fit_rate(e, d1);
        s2 = fit_rate(e, d2);
        const auto* tag = exchange ? " (hartree-fock)" : "";
        if (!s1.monotone) rep.warnings.push_back(std::string("S1 distances not monotone in eps") + tag);
        if (!s2.monotone) rep.warnings.push_back(std::string("S2 distances not monotone in eps") + tag);
        return true;
      } catch (const NumericalError& err) {
        rep.warnings.push_back(err.what());
        return false;
      }
    };
    if (want_h) rep.have_fit = fit(false, rep.s1_fit, rep.s2_fit);
    if (want_hf) rep.have_fit_hf = fit(true, rep.s1_fit_hf, rep.s2_fit_hf);
  }
  for (const auto& w : rep.warnings) log::warn(w);

  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!out_dir.empty()) {
    write_report(out_dir, rep);
    finish_manifest(out_dir, rep.seconds);
  }
  return rep;
}

ComparisonReport compare(const ExperimentConfig& cfg, const std::string& out_dir, const Config* source) {
  auto c = cfg;
  c.N_list = {cfg.compare_N};
  return run_comparison(c, out_dir, source, "compare");
}

ComparisonReport sweep(const ExperimentConfig& cfg, const std::string& out_dir, const Config* source) {
  if (cfg.N_list.size() < 3)
    throw ConfigError("key 'harness.N': need ≥3 points for a sweep, got " + std::to_string(cfg.N_list.size()));
  return run_comparison(cfg, out_dir, source, "sweep");
}

}  // namespace rvlab
