#include "rvlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "rvlab/error.hpp"
#include "rvlab/vlasov.hpp"

namespace rvlab {

namespace {

using MultiIndex = std::vector<int>;

void enumerate(int axes, int max_order, MultiIndex& cur, int axis, int used, std::vector<MultiIndex>& out) {
  if (axis == axes) {
    out.push_back(cur);
    return;
  }
  for (int o = 0; o + used <= max_order; ++o) {
    cur[axis] = o;
    enumerate(axes, max_order, cur, axis + 1, used + o, out);
  }
}

std::vector<MultiIndex> multi_indices(int axes, int max_order) {
  std::vector<MultiIndex> out;
  MultiIndex cur(static_cast<std::size_t>(axes), 0);
  enumerate(axes, max_order, cur, 0, 0, out);
  return out;
}

// Spectral calculus on the full phase-space lattice (x axes first, then v axes).
class PhaseSpaceSpectrum {
 public:
  explicit PhaseSpaceSpectrum(const PhaseSpaceDensity& f) : f_(f) {
    const int d = f.xg.d;
    dims_ = f.xg.dims();
    for (int v : f.vg.dims()) dims_.push_back(v);
    for (int a = 0; a < 2 * d; ++a) {
      const Lattice lat = a < d ? f.xg.lattice() : f.vg.lattice();
      std::vector<double> k(static_cast<std::size_t>(lat.n));
      for (int i = 0; i < lat.n; ++i) k[i] = lat.wavenumber(i);
      k_.push_back(k);
    }
    hat_.assign(f.f.begin(), f.f.end());
    fft::forward(hat_.data(), dims_);
    total_ = hat_.size();
    // <z>^2 with x measured from the box centre
    z2_.resize(total_);
    const std::size_t nv = f.nv();
    const Lattice lx = f.xg.lattice();
    for (std::size_t ix = 0; ix < f.nx(); ++ix) {
      auto xi = lx.unflatten(ix);
      double x2 = 0;
      for (int a = 0; a < d; ++a) {
        const double x = lx.node(xi[a]) - 0.5 * f.xg.L;
        x2 += x * x;
      }
      for (std::size_t iv = 0; iv < nv; ++iv) {
        const double s = f.speed(iv);
        z2_[ix * nv + iv] = 1.0 + x2 + s * s;
      }
    }
  }

  int axes() const { return static_cast<int>(dims_.size()); }
  int d() const { return f_.xg.d; }
  const std::vector<double>& z2() const { return z2_; }
  double cell() const { return f_.cell(); }

  // (ik)^order on one axis; odd orders carry no Nyquist contribution for real fields.
  cplx factor(int axis, int idx, int order) const {
    if (order == 0) return 1.0;
    const int n = static_cast<int>(k_[axis].size());
    if (order % 2 == 1 && idx == n / 2) return 0.0;
    return std::pow(cplx(0.0, k_[axis][idx]), order);
  }

  // Real fields D^a f and D^b f from one inverse transform (b may be empty).
  void pair(const MultiIndex& a, const MultiIndex* b, RField& ga, RField& gb) const {
    CField buf(total_);
    std::vector<int> idx(dims_.size(), 0);
    for (std::size_t i = 0; i < total_; ++i) {
      std::size_t rem = i;
      for (int ax = axes() - 1; ax >= 0; --ax) {
        idx[ax] = static_cast<int>(rem % dims_[ax]);
        rem /= dims_[ax];
      }
      cplx ma = 1.0, mb = 1.0;
      for (int ax = 0; ax < axes(); ++ax) {
        ma *= factor(ax, idx[ax], a[ax]);
        if (b) mb *= factor(ax, idx[ax], (*b)[ax]);
      }
      buf[i] = ma * hat_[i];
      if (b) buf[i] += cplx(0.0, 1.0) * mb * hat_[i];
    }
    fft::inverse(buf.data(), dims_);
    ga.resize(total_);
    for (std::size_t i = 0; i < total_; ++i) ga[i] = buf[i].real();
    if (b) {
      gb.resize(total_);
      for (std::size_t i = 0; i < total_; ++i) gb[i] = buf[i].imag();
    }
  }

 private:
  const PhaseSpaceDensity& f_;
  std::vector<int> dims_;
  std::vector<std::vector<double>> k_;
  CField hat_;
  std::size_t total_ = 0;
  std::vector<double> z2_;
};

struct NormAccumulator {
  double p;
  double acc = 0;
  void add(const RField& g, const std::vector<double>& z2, double k, double cell) {
    if (std::isinf(p)) {
      double m = 0;
      for (std::size_t i = 0; i < g.size(); ++i) m = std::max(m, std::pow(z2[i], 0.5 * k) * std::abs(g[i]));
      acc = std::max(acc, m);
    } else {
      double s = 0;
      for (std::size_t i = 0; i < g.size(); ++i) s += std::pow(z2[i], k) * g[i] * g[i];
      acc += s * cell;
    }
  }
  double value() const { return std::isinf(p) ? acc : std::sqrt(acc); }
};

double sobolev_of(const PhaseSpaceSpectrum& S, int sigma, double k, double p) {
  if (!(p == 2.0 || std::isinf(p))) throw ArgumentError("weighted Sobolev norms support p = 2 or infinity");
  if (sigma < 0 || k < 0) throw ArgumentError("sigma and k must be nonnegative");
  const auto alphas = multi_indices(S.axes(), sigma);
  NormAccumulator acc{p};
  RField ga, gb;
  for (std::size_t i = 0; i < alphas.size(); i += 2) {
    const MultiIndex* b = i + 1 < alphas.size() ? &alphas[i + 1] : nullptr;
    S.pair(alphas[i], b, ga, gb);
    acc.add(ga, S.z2(), k, S.cell());
    if (b) acc.add(gb, S.z2(), k, S.cell());
  }
  return acc.value();
}

// ||grad_v f||_{W^{2,inf}} + ||grad_v f||_{H_sigma^sigma}; the vector norm is Euclidean pointwise.
double velocity_gradient_norm(const PhaseSpaceSpectrum& S, int sigma) {
  const int d = S.d();
  const auto alphas = multi_indices(S.axes(), sigma);
  double winf = 0, h2 = 0;
  RField ga, gb;
  std::vector<double> sq;
  for (const auto& alpha : alphas) {
    int order = 0;
    for (int o : alpha) order += o;
    sq.assign(S.z2().size(), 0.0);
    std::vector<MultiIndex> comps;
    for (int j = 0; j < d; ++j) {
      MultiIndex m = alpha;
      m[d + j] += 1;
      comps.push_back(m);
    }
    for (std::size_t j = 0; j < comps.size(); j += 2) {
      const MultiIndex* b = j + 1 < comps.size() ? &comps[j + 1] : nullptr;
      S.pair(comps[j], b, ga, gb);
      for (std::size_t i = 0; i < sq.size(); ++i) sq[i] += ga[i] * ga[i] + (b ? gb[i] * gb[i] : 0.0);
    }
    double s = 0;
    for (std::size_t i = 0; i < sq.size(); ++i) {
      s += std::pow(S.z2()[i], sigma) * sq[i];
      if (order <= 2) winf = std::max(winf, std::sqrt(sq[i]));
    }
    h2 += s * S.cell();
  }
  return winf + std::sqrt(h2);
}

}  // namespace

double weighted_sobolev(const PhaseSpaceDensity& f, int sigma, double k, double p) {
  const PhaseSpaceSpectrum S(f);
  return sobolev_of(S, sigma, k, p);
}

double sobolev_density(const TorusGrid& g, const RField& rho, double nu) {
  const Lattice lat = g.lattice();
  CField c = to_complex(rho);
  fft::forward(c.data(), lat.dims());
  const double nd = static_cast<double>(lat.size());
  const bool integer = std::abs(nu - std::round(nu)) < 1e-12;
  const auto alphas = integer ? multi_indices(g.d, static_cast<int>(std::round(nu))) : std::vector<MultiIndex>{};
  double s = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    auto idx = lat.unflatten(i);
    double w = 0;
    if (integer) {
      for (const auto& a : alphas) {
        double t = 1;
        for (int ax = 0; ax < g.d; ++ax) t *= std::pow(lat.wavenumber(idx[ax]), 2 * a[ax]);
        w += t;
      }
    } else {
      double k2 = 0;
      for (int ax = 0; ax < g.d; ++ax) k2 += std::pow(lat.wavenumber(idx[ax]), 2);
      w = std::pow(1 + k2, nu);
    }
    s += w * std::norm(c[i]) / (nd * nd);
  }
  return std::sqrt(s * g.volume());
}

int regularity_index(int d, double a) {
  const double nmin = d * (a + 1) / (d - (a + 1));
  int n = 2;
  while (n < nmin - 1e-12) n += 2;
  return 4 + n;
}

SobolevReport sobolev_report(const PhaseSpaceDensity& f, const InteractionKernel& K, double t, int sigma) {
  SobolevReport r;
  r.t = t;
  r.sigma = sigma < 0 ? regularity_index(f.xg.d, K.a) : sigma;
  r.nu = 4 + K.a - f.xg.d;
  r.band_limit_warning = r.sigma > std::min(f.xg.n, f.vg.n_v) / 2;
  const PhaseSpaceSpectrum S(f);
  r.w_inf = sobolev_of(S, 3, 0.0, std::numeric_limits<double>::infinity());
  r.h = sobolev_of(S, r.sigma, r.sigma, 2.0);
  r.grad_v = velocity_gradient_norm(S, r.sigma);
  const RField rho = f.density();
  r.rho = lp_norm(f.xg, rho, 1.0) + sobolev_density(f.xg, rho, r.nu);
  return r;
}

GronwallEvaluation gronwall_rhs(const std::vector<SobolevReport>& series, const InteractionKernel& K, double N,
                                double eps, double initial_distance) {
  if (series.empty()) throw ArgumentError("gronwall_rhs: empty Sobolev series");
  for (std::size_t i = 1; i < series.size(); ++i)
    if (!(series[i].t > series[i - 1].t)) throw ArgumentError("gronwall_rhs: sample times must increase");
  if (series.front().t != 0.0) throw ArgumentError("gronwall_rhs: series must start at t = 0");
  const double g = std::abs(K.gamma);
  const std::size_t m = series.size();
  std::vector<double> t(m), lam(m), C(m), Lam(m);
  for (std::size_t i = 0; i < m; ++i) {
    t[i] = series[i].t;
    lam[i] = g * series[i].grad_v;
  }
  std::vector<double> integrand(m);
  for (std::size_t i = 0; i < m; ++i) integrand[i] = (1 + g) * (1 + series[i].rho) * series[i].h;
  C[0] = 1;
  Lam[0] = 0;
  for (std::size_t i = 1; i < m; ++i) {
    const double dt = t[i] - t[i - 1];
    C[i] = C[i - 1] + 0.5 * dt * (integrand[i] + integrand[i - 1]);
    Lam[i] = Lam[i - 1] + 0.5 * dt * (lam[i] + lam[i - 1]);
  }
  GronwallEvaluation ev;
  ev.initial_distance = initial_distance;
  ev.n_eps = N * eps;
  for (std::size_t i = 0; i < m; ++i) {
    double integral = 0;
    for (std::size_t j = 1; j <= i; ++j) {
      const double a = C[j - 1] * lam[j - 1] * std::exp(Lam[i] - Lam[j - 1]);
      const double b = C[j] * lam[j] * std::exp(Lam[i] - Lam[j]);
      integral += 0.5 * (t[j] - t[j - 1]) * (a + b);
    }
    ev.series.push_back({t[i], lam[i], C[i], (initial_distance + ev.n_eps) * (C[i] + integral)});
  }
  return ev;
}

double moment_bound_constant(double b, double c, int d) {
  if (!(c >= b && b >= 0)) throw ArgumentError("moment bound needs c >= b >= 0");
  if (c == b) return 1.0;
  const double sphere = 2 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
  const double e = (c - b) / (d + c);
  return std::pow(sphere, e) * std::pow(c - b, -e) * (d + c) / (d + b);
}

std::vector<InequalityRecord> moment_inequality_suite(const PhaseSpaceDensity& f, double rel_slack) {
  if (f.min() < 0) throw ArgumentError("moment inequalities need a nonnegative field");
  const int d = f.vg.d;
  const std::size_t nx = f.nx(), nv = f.nv();
  std::vector<InequalityRecord> out;

  auto M = [&](double l) { return velocity_moment(f, l); };
  const double triples[][3] = {{0, 1, 2}, {0, 1, 3}, {1, 2, 3}, {0, 2, 4}, {0.5, 1.5, 4}, {1, 1.5, 2}, {0, 0.5, 1}};
  for (const auto& tr : triples) {
    const double b = tr[0], a = tr[1], c = tr[2];
    InequalityRecord r;
    r.name = "moment_interpolation(" + std::to_string(b) + "," + std::to_string(a) + "," + std::to_string(c) + ")";
    r.lhs = M(a);
    r.rhs = std::pow(M(b), (c - a) / (c - b)) * std::pow(M(c), (a - b) / (c - b));
    r.pass = r.lhs <= r.rhs * (1 + rel_slack);
    out.push_back(r);
  }

  const double finf = lp_norm(f, std::numeric_limits<double>::infinity());
  const double dv = f.vg.cell();
  std::vector<double> speed(nv);
  for (std::size_t iv = 0; iv < nv; ++iv) speed[iv] = f.speed(iv);
  const double pairs[][2] = {{0, 1}, {0, 2}, {1, 2}, {0.5, 3}, {1, 4}};
  for (const auto& pr : pairs) {
    const double b = pr[0], c = pr[1];
    const double C = moment_bound_constant(b, c, d);
    InequalityRecord r;
    r.name = "local_moment_bound(" + std::to_string(b) + "," + std::to_string(c) + ")";
    r.pass = true;
    double worst = -1;
    for (std::size_t ix = 0; ix < nx; ++ix) {
      double mb = 0, mc = 0;
      for (std::size_t iv = 0; iv < nv; ++iv) {
        const double v = f.f[ix * nv + iv];
        mb += (b == 0 ? 1.0 : std::pow(speed[iv], b)) * v;
        mc += std::pow(speed[iv], c) * v;
      }
      mb *= dv;
      mc *= dv;
      const double rhs = C * std::pow(finf, (c - b) / (d + c)) * std::pow(mc, (d + b) / (d + c));
      const double ratio = rhs > 0 ? mb / rhs : (mb > 0 ? std::numeric_limits<double>::infinity() : 0.0);
      if (ratio > worst) {
        worst = ratio;
        r.lhs = mb;
        r.rhs = rhs;
      }
      if (mb > rhs * (1 + rel_slack)) r.pass = false;
    }
    out.push_back(r);
  }

  const RField rho = f.density();
  for (double b : {1.0, 2.0}) {
    InequalityRecord r;
    r.name = "density_moment_bound(" + std::to_string(b) + ")";
    r.lhs = lp_norm(f.xg, rho, (b + d) / d);
    r.rhs = moment_bound_constant(0, b, d) * std::pow(finf, b / (d + b)) * std::pow(M(b), d / (b + d));
    r.pass = r.lhs <= r.rhs * (1 + rel_slack);
    out.push_back(r);
  }
  return out;
}

}  // namespace rvlab
