#include "rvlab/vlasov.hpp"

#include <omp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "rvlab/error.hpp"
#include "rvlab/io.hpp"
#include "rvlab/log.hpp"

namespace rvlab {

namespace {

// exp(-i k s) on one axis; at the Nyquist mode the factor is cos(k s), which keeps the product Hermitian
// and equals taking the real part of the full complex shift.
cplx shift_factor(const Lattice& lat, int m, double s) {
  const double k = lat.wavenumber(m);
  if (2 * m == lat.n) return std::cos(k * s);
  return std::polar(1.0, -k * s);
}

// Separable shift factors over one half-complex spectrum (last axis n/2+1 modes); reused across calls.
class PhaseTable {
 public:
  explicit PhaseTable(const Lattice& lat) : lat_(lat), n_(static_cast<std::size_t>(lat.n)), nh_(n_ / 2 + 1) {
    for (int a = 0; a < lat.d; ++a) ph_[a].resize(a + 1 == lat.d ? nh_ : n_);
  }

  // data[i] *= scale * exp(-i k(i) . shift) over one contiguous half spectrum.
  void apply(cplx* data, const Vec3& shift, double scale) {
    for (int a = 0; a < lat_.d; ++a)
      for (std::size_t m = 0; m < ph_[a].size(); ++m) ph_[a][m] = shift_factor(lat_, static_cast<int>(m), shift[a]);
    for (auto& z : ph_[0]) z *= scale;
    if (lat_.d == 2) {
      for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < nh_; ++j) data[i * nh_ + j] *= ph_[0][i] * ph_[1][j];
    } else {
      for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j) {
          const cplx pij = ph_[0][i] * ph_[1][j];
          for (std::size_t k = 0; k < nh_; ++k) data[(i * n_ + j) * nh_ + k] *= pij * ph_[2][k];
        }
    }
  }

 private:
  Lattice lat_;
  std::size_t n_, nh_;
  std::array<std::vector<cplx>, 3> ph_;
};

Vec3 transport_shift(const PhaseSpaceDensity& f, std::size_t iv, double dt) {
  const Vec3 v = f.velocity(iv);
  const double g = std::sqrt(1.0 + v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  return {dt * v[0] / g, dt * v[1] / g, dt * v[2] / g};
}

// Splits [0, count) into one contiguous block per thread (a single block when serial)
// and calls fn(begin, end) on each.
template <class F>
void over_blocks(std::size_t count, Exec exec, F&& fn) {
  if (exec == Exec::serial) {
    fn(std::size_t{0}, count);
    return;
  }
#pragma omp parallel
  {
    const std::size_t nt = static_cast<std::size_t>(omp_get_num_threads());
    const std::size_t id = static_cast<std::size_t>(omp_get_thread_num());
    const std::size_t lo = count * id / nt, hi = count * (id + 1) / nt;
    if (hi > lo) fn(lo, hi);
  }
}

// Free-transport factors laid out [axis][mode * nv + iv], half spectrum on the last axis.
// Cached on the step size since a run alternates between at most two drifts.
struct DriftTable {
  double dt = std::numeric_limits<double>::quiet_NaN();
  std::size_t nx = 0, nv = 0;
  double L = 0, V = 0;
  std::array<std::vector<cplx>, 3> ph;
};

const DriftTable& drift_table(const PhaseSpaceDensity& f, double dt) {
  static thread_local std::array<DriftTable, 2> cache;
  static thread_local int next = 0;
  const std::size_t nx = f.nx(), nv = f.nv();
  for (const auto& t : cache)
    if (t.dt == dt && t.nx == nx && t.nv == nv && t.L == f.xg.L && t.V == f.vg.V) return t;
  DriftTable& t = cache[static_cast<std::size_t>(next)];
  next ^= 1;
  const Lattice lx = f.xg.lattice();
  const std::size_t n = static_cast<std::size_t>(lx.n);
  t = DriftTable{dt, nx, nv, f.xg.L, f.vg.V, {}};
  for (int a = 0; a < lx.d; ++a) t.ph[a].resize((a + 1 == lx.d ? n / 2 + 1 : n) * nv);
  for (std::size_t iv = 0; iv < nv; ++iv) {
    const Vec3 s = transport_shift(f, iv, dt);
    for (int a = 0; a < lx.d; ++a)
      for (std::size_t m = 0; m * nv < t.ph[a].size(); ++m)
        t.ph[a][m * nv + iv] = shift_factor(lx, static_cast<int>(m), s[a]);
  }
  return t;
}

CField& workspace(std::size_t size) {
  static thread_local CField buf;
  if (buf.size() < size) buf.resize(size);
  return buf;
}

}  // namespace

// Real transforms along x with stride nv, one batch of velocity columns per thread.
void x_advect(PhaseSpaceDensity& f, double dt, Exec exec) {
  if (dt == 0.0) return;
  const Lattice lx = f.xg.lattice();
  const auto dims = lx.dims();
  const std::size_t nx = f.nx(), nv = f.nv(), n = static_cast<std::size_t>(lx.n), nh = n / 2 + 1;
  const int sv = static_cast<int>(nv);
  const double inv = 1.0 / static_cast<double>(nx);
  const DriftTable& tab = drift_table(f, dt);
  CField& buf = workspace(fft::half_size(dims) * nv);
  over_blocks(nv, exec, [&](std::size_t lo, std::size_t hi) {
    const int count = static_cast<int>(hi - lo);
    fft::forward_real(f.f.data() + lo, sv, 1, buf.data() + lo, sv, 1, dims, count);
    const cplx* p0 = tab.ph[0].data();
    const cplx* p1 = tab.ph[1].data();
    if (lx.d == 2) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < nh; ++k) {
          cplx* row = buf.data() + (i * nh + k) * nv;
          for (std::size_t j = lo; j < hi; ++j) row[j] *= inv * p0[i * nv + j] * p1[k * nv + j];
        }
    } else {
      const cplx* p2 = tab.ph[2].data();
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k)
          for (std::size_t l = 0; l < nh; ++l) {
            cplx* row = buf.data() + ((i * n + k) * nh + l) * nv;
            for (std::size_t j = lo; j < hi; ++j) row[j] *= inv * p0[i * nv + j] * p1[k * nv + j] * p2[l * nv + j];
          }
    }
    fft::backward_real(buf.data() + lo, sv, 1, f.f.data() + lo, sv, 1, dims, count);
  });
}

void v_advect(PhaseSpaceDensity& f, const std::vector<RField>& E, double dt, Exec exec, double boundary_tol) {
  if (static_cast<int>(E.size()) != f.xg.d) throw ArgumentError("force field needs one component per axis");
  const Lattice lv = f.vg.lattice();
  const auto dims = lv.dims();
  const std::size_t nx = f.nx(), nv = f.nv(), nh = fft::half_size(dims);
  const double inv = 1.0 / static_cast<double>(nv);
  if (dt != 0.0) {
    CField& buf = workspace(nh * nx);
    over_blocks(nx, exec, [&](std::size_t lo, std::size_t hi) {
      const int count = static_cast<int>(hi - lo);
      fft::forward_real(f.f.data() + lo * nv, 1, static_cast<int>(nv), buf.data() + lo * nh, 1,
                        static_cast<int>(nh), dims, count);
      PhaseTable phase(lv);
      for (std::size_t ix = lo; ix < hi; ++ix) {
        Vec3 s{0, 0, 0};
        for (int a = 0; a < f.xg.d; ++a) s[a] = dt * E[a][ix];
        phase.apply(buf.data() + ix * nh, s, inv);
      }
      fft::backward_real(buf.data() + lo * nh, 1, static_cast<int>(nh), f.f.data() + lo * nv, 1,
                         static_cast<int>(nv), dims, count);
    });
  }
  const double shell = f.boundary_shell_fraction();
  if (shell > boundary_tol) {
    std::ostringstream ss;
    ss << "velocity support reached the guard band: boundary-shell mass fraction " << shell << " > "
       << boundary_tol << "; enlarge the velocity box";
    throw SupportOverflow(ss.str());
  }
}

double velocity_moment(const PhaseSpaceDensity& f, double k) {
  if (k < 0) throw ArgumentError("moment order must be >= 0");
  const std::size_t nx = f.nx(), nv = f.nv();
  std::vector<double> w(nv);
  for (std::size_t iv = 0; iv < nv; ++iv) w[iv] = k == 0 ? 1.0 : std::pow(f.speed(iv), k);
  double s = 0;
#pragma omp parallel for reduction(+ : s) schedule(static)
  for (std::size_t ix = 0; ix < nx; ++ix)
    for (std::size_t iv = 0; iv < nv; ++iv) s += w[iv] * f.f[ix * nv + iv];
  return s * f.cell();
}

double lp_norm(const PhaseSpaceDensity& f, double p) {
  if (std::isinf(p)) {
    double m = 0;
    for (double x : f.f) m = std::max(m, std::abs(x));
    return m;
  }
  double s = 0;
  for (double x : f.f) s += std::pow(std::abs(x), p);
  return std::pow(s * f.cell(), 1.0 / p);
}

double vlasov_energy(const PhaseSpaceDensity& f, const InteractionKernel& K) {
  const std::size_t nx = f.nx(), nv = f.nv();
  std::vector<double> w(nv);
  for (std::size_t iv = 0; iv < nv; ++iv) w[iv] = std::sqrt(1.0 + f.speed(iv) * f.speed(iv));
  double kin = 0;
  for (std::size_t ix = 0; ix < nx; ++ix)
    for (std::size_t iv = 0; iv < nv; ++iv) kin += w[iv] * f.f[ix * nv + iv];
  kin *= f.cell();
  if (K.gamma == 0.0) return kin;
  CField c = to_complex(f.density());
  fft::forward(c.data(), f.xg.dims());
  const double nd = static_cast<double>(nx);
  double pot = 0;
  for (std::size_t i = 0; i < c.size(); ++i) pot += K.symbol[i] * std::norm(c[i]);
  pot *= 0.5 * f.xg.volume() / (nd * nd);
  return kin + pot;
}

VlasovDiagnostics vlasov_diagnostics(const PhaseSpaceDensity& f, const InteractionKernel& K,
                                     const std::vector<double>& moments, double t) {
  VlasovDiagnostics d;
  d.t = t;
  d.mass = f.mass();
  d.l1 = lp_norm(f, 1.0);
  d.l2 = lp_norm(f, 2.0);
  d.linf = lp_norm(f, std::numeric_limits<double>::infinity());
  for (double k : moments) d.moments.push_back(velocity_moment(f, k));
  d.moments_sup = d.moments;
  d.energy = vlasov_energy(f, K);
  const auto fd = field_diagnostics(K, f);
  d.e_inf = fd.e_inf;
  d.grad_e_inf = fd.grad_e_inf;
  d.min_f = f.min();
  d.boundary_fraction = f.boundary_shell_fraction();
  return d;
}

void vlasov_step(PhaseSpaceDensity& f, const InteractionKernel& K, double dt, const VlasovConfig& cfg) {
  x_advect(f, 0.5 * dt, cfg.exec);
  if (K.gamma != 0.0) v_advect(f, force(K, f.density()), dt, cfg.exec, cfg.boundary_tol);
  x_advect(f, 0.5 * dt, cfg.exec);
}

void vlasov_advance(PhaseSpaceDensity& f, const InteractionKernel& K, double dt, int steps, const VlasovConfig& cfg) {
  if (steps <= 0) return;
  x_advect(f, 0.5 * dt, cfg.exec);
  for (int s = 0; s < steps; ++s) {
    if (K.gamma != 0.0) v_advect(f, force(K, f.density()), dt, cfg.exec, cfg.boundary_tol);
    x_advect(f, s + 1 < steps ? dt : 0.5 * dt, cfg.exec);
  }
}

VlasovResult evolve(PhaseSpaceDensity f, const InteractionKernel& K, double T, const VlasovConfig& cfg,
                    const VlasovSampler& sampler, int sample_every) {
  if (!(T >= 0)) throw ArgumentError("evolution time must be >= 0");
  if (!(cfg.dt > 0)) throw ArgumentError("time step must be > 0");
  if (!(f.xg == K.grid)) throw ArgumentError("phase-space grid does not match the kernel grid");
  const int steps = static_cast<int>(std::ceil(T / cfg.dt - 1e-9));
  const double dt = steps > 0 ? T / steps : 0.0;
  const int every = std::max(1, cfg.diag_every);
  VlasovResult res;
  std::vector<double> sup;
  auto record = [&](double t) {
    auto d = vlasov_diagnostics(f, K, cfg.moments, t);
    if (sup.empty()) sup = d.moments;
    for (std::size_t i = 0; i < sup.size(); ++i) sup[i] = std::max(sup[i], d.moments[i]);
    d.moments_sup = sup;
    if (d.min_f < -10 * cfg.pos_tol) {
      std::ostringstream ss;
      ss << "positivity violated at t = " << t << ": min f = " << d.min_f << " < -10 pos_tol";
      throw NumericalError(ss.str());
    }
    std::ostringstream ss;
    ss.precision(10);
    ss << "vlasov t=" << t << " mass=" << d.mass << " l2=" << d.l2 << " energy=" << d.energy;
    log::debug(ss.str());
    res.series.push_back(std::move(d));
  };
  record(0.0);
  if (sampler) sampler(0, 0.0, f);
  auto sync_point = [&](int s) {
    return s % every == 0 || s == steps || (sampler && sample_every > 0 && s % sample_every == 0);
  };
  for (int s = 0; s < steps;) {
    int next = s + 1;
    while (!sync_point(next)) ++next;
    vlasov_advance(f, K, dt, next - s, cfg);
    s = next;
    const double t = s * dt;
    if (s % every == 0 || s == steps) record(t);
    if (sampler && sample_every > 0 && s % sample_every == 0) sampler(s, t, f);
  }
  res.final_state = std::move(f);
  return res;
}

RField velocity_gradient_density(const PhaseSpaceDensity& f) {
  const Lattice lv = f.vg.lattice();
  const std::size_t nx = f.nx(), nv = f.nv();
  RField out(nx, 0.0);
  const double dv = f.vg.cell();
#pragma omp parallel for schedule(static)
  for (std::size_t ix = 0; ix < nx; ++ix) {
    CField slice(f.f.begin() + static_cast<std::ptrdiff_t>(ix * nv),
                 f.f.begin() + static_cast<std::ptrdiff_t>((ix + 1) * nv));
    std::vector<double> g2(nv, 0.0);
    for (int a = 0; a < f.vg.d; ++a) {
      const CField der = spectral_derivative(lv, slice, a, 1);
      for (std::size_t iv = 0; iv < nv; ++iv) g2[iv] += der[iv].real() * der[iv].real();
    }
    double s = 0;
    for (double x : g2) s += std::sqrt(x);
    out[ix] = s * dv;
  }
  return out;
}

StabilityProbe::StabilityProbe(const InteractionKernel& K, double delta) : K_(&K), delta_(delta) {
  const double denom = K.d - (K.a + 1.0);
  p_ = K.d / denom;
}

void StabilityProbe::add(double t, const PhaseSpaceDensity& f1, const PhaseSpaceDensity& f2) {
  if (!(f1.xg == f2.xg) || !(f1.vg == f2.vg)) throw ArgumentError("stability probe: grid mismatch");
  StabilityPoint pt;
  pt.t = t;
  double s = 0;
  for (std::size_t i = 0; i < f1.f.size(); ++i) s += std::abs(f1.f[i] - f2.f[i]);
  pt.l1_distance = s * f1.cell();
  const RField g = velocity_gradient_density(f2);
  pt.driver_lo = lp_norm(K_->grid, g, std::max(1.0, p_ - delta_));
  pt.driver_hi = lp_norm(K_->grid, g, p_ + delta_);
  pts_.push_back(pt);
}

StabilityReport StabilityProbe::report() const {
  StabilityReport r;
  r.series = pts_;
  r.p = p_;
  // slope of log(distance) in t over points with positive distance
  double st = 0, sy = 0, stt = 0, sty = 0;
  int m = 0;
  for (const auto& p : pts_) {
    if (!(p.l1_distance > 0)) continue;
    const double y = std::log(p.l1_distance);
    st += p.t;
    sy += y;
    stt += p.t * p.t;
    sty += p.t * y;
    ++m;
  }
  const double den = m * stt - st * st;
  r.growth_rate = (m >= 2 && den > 0) ? (m * sty - st * sy) / den : 0.0;
  return r;
}

StabilityReport stability_probe(const PhaseSpaceDensity& f1, const PhaseSpaceDensity& f2, const InteractionKernel& K,
                                double T, const VlasovConfig& cfg, double delta) {
  StabilityProbe probe(K, delta);
  const int steps = static_cast<int>(std::ceil(T / cfg.dt - 1e-9));
  const double dt = steps > 0 ? T / steps : 0.0;
  const int every = std::max(1, cfg.diag_every);
  PhaseSpaceDensity a = f1, b = f2;
  probe.add(0.0, a, b);
  for (int s = 1; s <= steps; ++s) {
    vlasov_step(a, K, dt, cfg);
    vlasov_step(b, K, dt, cfg);
    if (s % every == 0 || s == steps) probe.add(s * dt, a, b);
  }
  return probe.report();
}

void save_snapshot(const std::string& path, const PhaseSpaceDensity& f) {
  io::Writer w(path);
  w.magic("RVPF");
  w.u32(1);
  w.u32(static_cast<std::uint32_t>(f.xg.d));
  w.u32(static_cast<std::uint32_t>(f.xg.n));
  w.u32(static_cast<std::uint32_t>(f.vg.n_v));
  w.f64(f.xg.L);
  w.f64(f.vg.V);
  w.f64s(f.f.data(), f.f.size());
}

PhaseSpaceDensity load_snapshot(const std::string& path) {
  io::Reader r(path);
  r.expect_magic("RVPF");
  const auto version = r.u32();
  if (version != 1) throw Error("unsupported snapshot version " + std::to_string(version));
  const int d = static_cast<int>(r.u32());
  const int n = static_cast<int>(r.u32());
  const int nv = static_cast<int>(r.u32());
  const double L = r.f64();
  const double V = r.f64();
  PhaseSpaceDensity f(TorusGrid(d, n, L), VelocityGrid(d, nv, V));
  r.f64s(f.f.data(), f.f.size());
  return f;
}

std::vector<std::string> vlasov_csv_header(const std::vector<double>& moments) {
  std::vector<std::string> h{"t", "mass", "l2", "linf"};
  for (double k : moments) h.push_back("m" + io::format_double(k));
  h.insert(h.end(), {"energy", "e_inf", "grad_e_inf"});
  return h;
}

std::vector<double> vlasov_csv_row(const VlasovDiagnostics& d) {
  std::vector<double> r{d.t, d.mass, d.l2, d.linf};
  r.insert(r.end(), d.moments_sup.begin(), d.moments_sup.end());
  r.insert(r.end(), {d.energy, d.e_inf, d.grad_e_inf});
  return r;
}

}  // namespace rvlab
