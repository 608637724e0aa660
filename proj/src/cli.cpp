#include "rvlab/cli.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "rvlab/checks.hpp"
#include "rvlab/error.hpp"
#include "rvlab/harness.hpp"
#include "rvlab/io.hpp"
#include "rvlab/log.hpp"

namespace rvlab {

namespace {

struct Options {
  std::string config_path;
  std::vector<std::string> sets;
  std::string out;
  std::optional<int> threads;
  std::optional<std::uint64_t> seed;
  bool quick = false;
  int verbose = 0;
  bool silent = false;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Config load_config(const Options& o) {
  Config c;
  if (!o.config_path.empty()) {
    if (!std::filesystem::exists(o.config_path)) throw ConfigError("config file not found: " + o.config_path);
    c = Config::from_file(o.config_path);
  }
  for (const auto& s : o.sets) c.set(s);
  if (o.seed) c.set("seed", std::to_string(*o.seed));
  if (o.threads) c.set("threads", std::to_string(*o.threads));
  return c;
}

void print_fit(const char* label, const RateFit& f) {
  std::cout << label << " slope " << f.slope << " +/- " << f.ci_half_width << (f.monotone ? "" : " (non-monotone)")
            << "\n";
}

void print_summary(const ComparisonReport& rep) {
  for (const auto& r : rep.runs) {
    std::cout << "N " << r.N << " eps " << r.eps << " rank " << r.rank << " distortion " << r.distortion.relative;
    if (!r.points.empty() && !r.points.back().hartree.empty())
      std::cout << " s1 " << r.points.front().hartree[0] << " -> " << r.points.back().hartree[0];
    if (!r.points.empty() && !r.points.back().hartree_fock.empty())
      std::cout << " s1_hf " << r.points.front().hartree_fock[0] << " -> " << r.points.back().hartree_fock[0];
    std::cout << " fitted_constant " << r.fitted_constant << "\n";
  }
  if (rep.have_fit) print_fit("hartree S1", rep.s1_fit), print_fit("hartree S2", rep.s2_fit);
  if (rep.have_fit_hf) print_fit("hartree-fock S1", rep.s1_fit_hf), print_fit("hartree-fock S2", rep.s2_fit_hf);
}

int run_vlasov(const ExperimentConfig& cfg, const Config& src, const std::string& out) {
  const auto t0 = std::chrono::steady_clock::now();
  write_manifest(out, cfg, &src, "vlasov-run");
  const TorusGrid xg = position_grid(cfg);
  const auto K = build_kernel(cfg.d, cfg.a, cfg.gamma, xg, cfg.kernel_mode);
  auto f0 = build_initial(cfg.preset, xg, velocity_grid(cfg), cfg.vlasov.boundary_tol);
  save_snapshot(out + "/vlasov_initial.rvpf", f0);
  const auto res = evolve(std::move(f0), K, cfg.vlasov_T, cfg.vlasov);
  io::Csv csv(out + "/vlasov.csv", vlasov_csv_header(cfg.vlasov.moments));
  for (const auto& d : res.series) csv.row(vlasov_csv_row(d));
  save_snapshot(out + "/vlasov_final.rvpf", res.final_state);
  const auto& a = res.series.front();
  const auto& b = res.series.back();
  std::cout << "t " << b.t << " mass drift " << std::abs(b.mass - a.mass) << " L2 drift " << std::abs(b.l2 - a.l2)
            << " energy drift " << std::abs(b.energy - a.energy) << "\n";
  finish_manifest(out, seconds_since(t0));
  return kExitOk;
}

int run_hartree(const ExperimentConfig& cfg, const Config& src, const std::string& out) {
  const auto t0 = std::chrono::steady_clock::now();
  write_manifest(out, cfg, &src, "hartree-run");
  const TorusGrid xg = position_grid(cfg);
  const auto K = build_kernel(cfg.d, cfg.a, cfg.gamma, xg, cfg.kernel_mode);
  const auto f0 = build_initial(cfg.preset, xg, velocity_grid(cfg), cfg.vlasov.boundary_tol);
  auto mp = matched_pair(f0, cfg.hartree_N, cfg.state, cfg.alias_tol);
  log::info("initial state rank " + std::to_string(mp.omega.rank()));
  auto hc = cfg.hartree;
  hc.dump_path = out + "/abort.rvmf";
  const auto res = evolve(std::move(mp.omega), K, cfg.hartree_T, hc);
  io::Csv csv(out + "/hartree.csv", {"t", "trace", "ortho_drift", "e_hf", "e_kin", "unitarity_drift"});
  for (const auto& d : res.series) csv.row({d.t, d.trace, d.ortho_drift, d.e_hf, d.e_kin, d.unitarity_drift});
  save_checkpoint(out + "/final.rvmf", res.final_state);
  const auto& a = res.series.front();
  const auto& b = res.series.back();
  std::cout << "t " << b.t << " trace " << b.trace << " ortho drift " << b.ortho_drift << " energy drift "
            << std::abs(b.e_hf - a.e_hf) << "\n";
  finish_manifest(out, seconds_since(t0));
  return kExitOk;
}

int run_check(const ExperimentConfig& cfg, const Config& src, const std::string& out, bool quick) {
  const auto t0 = std::chrono::steady_clock::now();
  write_manifest(out, cfg, &src, quick ? "check --quick" : "check");
  const auto results = run_check_suite(cfg.seed, quick);
  print_checks(std::cout, results);
  finish_manifest(out, seconds_since(t0));
  for (const auto& r : results)
    if (!r.pass) return kExitCheck;
  return kExitOk;
}

}  // namespace

int parse_and_dispatch(int argc, char** argv) {
  CLI::App app{"Relativistic Vlasov / Hartree semiclassical comparison lab"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config_path, "key=value config file");
  app.add_option("--set", o.sets, "override KEY=VALUE (repeatable)")->take_all()->allow_extra_args(false);
  app.add_option("--out", o.out, "output directory");
  app.add_option("--threads", o.threads, "OpenMP thread count");
  app.add_option("--seed", o.seed, "RNG seed");
  app.add_flag("--quick", o.quick, "reduced check suite");
  app.add_flag("-v,--verbose", o.verbose, "more log output (repeatable)");
  app.add_flag("-q,--quiet", o.silent, "warnings only");
  const std::vector<std::pair<std::string, std::string>> commands{
      {"vlasov-run", "evolve the relativistic Vlasov equation"},
      {"hartree-run", "evolve the Hartree / Hartree-Fock equation from matched data"},
      {"compare", "compare Hartree and Vlasov dynamics at one N"},
      {"sweep", "compare over an N sweep and fit the rate"},
      {"check", "run the inequality and conservation suites"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  log::set_verbosity(o.silent ? log::kQuiet : 1 + o.verbose);
  const std::string cmd = app.get_subcommands().front()->get_name();
  const std::string out = o.out.empty() ? "runs/" + cmd : o.out;

  try {
    const Config src = load_config(o);
    const ExperimentConfig cfg = parse_experiment(src);
    if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
    if (cmd == "vlasov-run") return run_vlasov(cfg, src, out);
    if (cmd == "hartree-run") return run_hartree(cfg, src, out);
    if (cmd == "check") return run_check(cfg, src, out, o.quick);
    if (cmd == "compare") {
      validate_comparison(cfg);
      print_summary(compare(cfg, out, &src));
      return kExitOk;
    }
    if (cmd == "sweep") {
      if (cfg.N_list.size() < 3)
        throw ConfigError("key 'harness.N': need ≥3 points for a sweep, got " + std::to_string(cfg.N_list.size()));
      validate_comparison(cfg);
      print_summary(sweep(cfg, out, &src));
      return kExitOk;
    }
    throw ConfigError("unknown subcommand " + cmd);
  } catch (const Error& e) {
    std::cerr << "rvlab: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "rvlab: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace rvlab
