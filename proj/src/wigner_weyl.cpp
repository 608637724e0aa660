#include "rvlab/wigner_weyl.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "rvlab/error.hpp"

namespace rvlab {

namespace {

struct Bands {
  Lattice lat;
  std::size_t S;

  explicit Bands(const TorusGrid& g) : lat(g.lattice()), S(g.size()) {}

  // Signed offset in [-n/2, n/2) for a mod-n index.
  int signed_of(int idx) const { return idx < lat.n / 2 ? idx : idx - lat.n; }

  std::size_t partner(std::size_t r) const {
    auto idx = lat.unflatten(r);
    for (int a = 0; a < lat.d; ++a) idx[a] = (lat.n - idx[a]) % lat.n;
    return lat.flatten(idx);
  }

  std::size_t add(std::size_t b, const std::array<int, 3>& off) const {
    auto idx = lat.unflatten(b);
    for (int a = 0; a < lat.d; ++a) idx[a] += off[a];
    return lat.flatten(idx);
  }

  std::array<int, 3> offset(std::size_t r) const {
    auto idx = lat.unflatten(r);
    std::array<int, 3> o{0, 0, 0};
    for (int a = 0; a < lat.d; ++a) o[a] = signed_of(idx[a]);
    return o;
  }

  Vec3 half_shift(std::size_t r, double sign) const {
    auto o = offset(r);
    Vec3 s{0, 0, 0};
    for (int a = 0; a < lat.d; ++a) s[a] = sign * 0.5 * o[a] * lat.h;
    return s;
  }

  std::array<int, 3> half_offset(std::size_t r) const {
    auto o = offset(r);
    for (int a = 0; a < lat.d; ++a) o[a] /= 2;  // components are 0 or -n/2 here
    return o;
  }
};

// (eps / 2pi)^d h_y^d with h_y = h / eps.
double prefactor(const TorusGrid& g) { return std::pow(g.h() / (2.0 * std::numbers::pi), g.d); }

// Mod-n index of the velocity node j (whose signed frequency label is j - n/2).
std::size_t velocity_to_mode(const Lattice& lat, std::size_t j) {
  auto idx = lat.unflatten(j);
  for (int a = 0; a < lat.d; ++a) idx[a] = (idx[a] + lat.n / 2) % lat.n;
  return lat.flatten(idx);
}

void check_dual(const PhaseSpaceDensity& W, double eps) {
  const VelocityGrid dual = dual_velocity_grid(W.xg, eps);
  if (W.vg.d != dual.d || W.vg.n_v != dual.n_v || std::abs(W.vg.V - dual.V) > 1e-12 * dual.V)
    throw ArgumentError("velocity grid is not the dual grid for this eps; use match_grids first");
}

}  // namespace

VelocityGrid dual_velocity_grid(const TorusGrid& g, double eps) {
  if (!(eps > 0)) throw ArgumentError("eps must be positive");
  return VelocityGrid(g.d, g.n, std::numbers::pi * eps * g.n / g.L);
}

WignerField wigner_transform(const OperatorMatrix& omega, double eps, Exec exec) {
  const TorusGrid& g = omega.grid;
  const Bands B(g);
  const std::size_t S = B.S;
  if (static_cast<std::size_t>(omega.A.rows()) != S || static_cast<std::size_t>(omega.A.cols()) != S)
    throw ArgumentError("operator matrix does not match the grid");
  if (!is_hermitian(omega.A, 1e-8)) throw ArgumentError("wigner_transform: input is not Hermitian");
  if (g.n % 4 != 0) throw ArgumentError("wigner_transform needs n divisible by 4");

  // C[c * S + r]: band r of the kernel, centred at node c.
  CField C(S * S);
  auto band = [&](std::size_t r) {
    const std::size_t p = B.partner(r);
    const auto off = B.offset(r);
    CField D(S);
    for (std::size_t b = 0; b < S; ++b) D[b] = omega.A(static_cast<Eigen::Index>(B.add(b, off)), static_cast<Eigen::Index>(b));
    if (r == 0) {
      for (std::size_t c = 0; c < S; ++c) C[c * S] = D[c].real();
    } else if (p == r) {
      const auto half = B.half_offset(r);
      for (std::size_t c = 0; c < S; ++c) {
        const cplx e = D[B.add(c, {-half[0], -half[1], -half[2]})];
        C[c * S + r] = e.real() + e.imag();
      }
    } else if (r < p) {
      const CField Cr = translate(B.lat, D, B.half_shift(r, 1.0));
      for (std::size_t c = 0; c < S; ++c) {
        C[c * S + r] = Cr[c];
        C[c * S + p] = std::conj(Cr[c]);
      }
    }
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 4)
    for (std::size_t r = 0; r < S; ++r) band(r);
  } else {
    for (std::size_t r = 0; r < S; ++r) band(r);
  }

  fft::transform(C.data(), g.dims(), fft::kForward, static_cast<int>(S), 1, static_cast<int>(S));

  WignerField out;
  out.eps = eps;
  out.N = omega.trace();
  out.W = PhaseSpaceDensity(g, dual_velocity_grid(g, eps));
  const double pref = prefactor(g);
  double scale = 0, resid = 0;
  std::vector<std::size_t> mode(S);
  for (std::size_t j = 0; j < S; ++j) mode[j] = velocity_to_mode(B.lat, j);
  for (std::size_t c = 0; c < S; ++c)
    for (std::size_t j = 0; j < S; ++j) {
      const cplx w = pref * C[c * S + mode[j]];
      out.W.f[c * S + j] = w.real();
      scale = std::max(scale, std::abs(w));
      resid = std::max(resid, std::abs(w.imag()));
    }
  if (resid > 1e-10 * scale && resid > 0) {
    std::ostringstream ss;
    ss << "wigner_transform: imaginary residue " << resid << " relative to " << scale;
    throw NumericalError(ss.str());
  }
  return out;
}

OperatorMatrix weyl_quantize(const PhaseSpaceDensity& W, double eps, Exec exec) {
  check_dual(W, eps);
  const TorusGrid& g = W.xg;
  const Bands B(g);
  const std::size_t S = B.S;
  if (g.n % 4 != 0) throw ArgumentError("weyl_quantize needs n divisible by 4");

  CField C(S * S);
  std::vector<std::size_t> mode(S);
  for (std::size_t j = 0; j < S; ++j) mode[j] = velocity_to_mode(B.lat, j);
  for (std::size_t c = 0; c < S; ++c)
    for (std::size_t j = 0; j < S; ++j) C[c * S + mode[j]] = W.f[c * S + j];
  fft::transform(C.data(), g.dims(), fft::kBackward, static_cast<int>(S), 1, static_cast<int>(S));
  const double scale = 1.0 / (prefactor(g) * static_cast<double>(S));

  OperatorMatrix out{g, Matrix::Zero(static_cast<Eigen::Index>(S), static_cast<Eigen::Index>(S))};
  auto band = [&](std::size_t r) {
    const std::size_t p = B.partner(r);
    if (r != p && r > p) return;
    const auto off = B.offset(r);
    CField Cr(S);
    for (std::size_t c = 0; c < S; ++c) Cr[c] = C[c * S + r] * scale;
    auto put = [&](std::size_t b, cplx v) {
      out.A(static_cast<Eigen::Index>(B.add(b, off)), static_cast<Eigen::Index>(b)) = v;
    };
    if (r == 0) {
      for (std::size_t b = 0; b < S; ++b) put(b, Cr[b].real());
    } else if (p == r) {
      const auto half = B.half_offset(r);
      for (std::size_t b = 0; b < S; ++b) {
        const std::size_t c = B.add(b, half);
        const double c0 = Cr[c].real();
        const double c1 = Cr[B.add(c, off)].real();
        put(b, 0.5 * cplx(c0 + c1, c0 - c1));
      }
    } else {
      const CField D = translate(B.lat, Cr, B.half_shift(r, -1.0));
      for (std::size_t b = 0; b < S; ++b) {
        put(b, D[b]);
        out.A(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(B.add(b, off))) = std::conj(D[b]);
      }
    }
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 4)
    for (std::size_t r = 0; r < S; ++r) band(r);
  } else {
    for (std::size_t r = 0; r < S; ++r) band(r);
  }
  return out;
}

namespace {

// Real trigonometric interpolation weights from a periodic source axis onto target nodes;
// rows for targets outside [origin, origin + length) are zero.
Eigen::MatrixXd interpolation_matrix(const Lattice& src, const Lattice& dst) {
  const int ns = src.n, nt = dst.n;
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(nt, ns);
  const double len = src.length();
  for (int m = 0; m < nt; ++m) {
    const double v = dst.node(m);
    if (v < src.origin - 1e-12 * len || v >= src.origin + len - 1e-12 * len) continue;
    for (int j = 0; j < ns; ++j) {
      const double dv = v - src.node(j);
      double s = 1.0;
      for (int q = 1; q < ns / 2; ++q) s += 2.0 * std::cos(2.0 * std::numbers::pi * q * dv / len);
      s += std::cos(std::numbers::pi * ns * dv / len);
      B(m, j) = s / ns;
    }
  }
  return B;
}

// out[.., m, ..] = sum_j B(m, j) in[.., j, ..] along `axis` of a row-major block.
std::vector<double> contract(const std::vector<double>& in, std::vector<int>& dims, int axis, const Eigen::MatrixXd& B) {
  std::size_t outer = 1, inner = 1;
  for (int a = 0; a < axis; ++a) outer *= static_cast<std::size_t>(dims[a]);
  for (std::size_t a = axis + 1; a < dims.size(); ++a) inner *= static_cast<std::size_t>(dims[a]);
  const int ns = dims[axis];
  const int nt = static_cast<int>(B.rows());
  std::vector<double> out(outer * nt * inner, 0.0);
  for (std::size_t o = 0; o < outer; ++o)
    for (int m = 0; m < nt; ++m)
      for (int j = 0; j < ns; ++j) {
        const double w = B(m, j);
        if (w == 0.0) continue;
        const double* src = &in[(o * ns + j) * inner];
        double* dst = &out[(o * nt + m) * inner];
        for (std::size_t i = 0; i < inner; ++i) dst[i] += w * src[i];
      }
  dims[axis] = nt;
  return out;
}

}  // namespace

PhaseSpaceDensity resample_velocity(const PhaseSpaceDensity& f, const VelocityGrid& target) {
  if (f.vg == target) return f;
  PhaseSpaceDensity out(f.xg, target);
  const Eigen::MatrixXd B = interpolation_matrix(f.vg.lattice(), target.lattice());
  const std::size_t nv = f.nv(), nt = target.size();
#pragma omp parallel for schedule(static)
  for (std::size_t ix = 0; ix < f.nx(); ++ix) {
    std::vector<double> block(f.f.begin() + static_cast<std::ptrdiff_t>(ix * nv),
                              f.f.begin() + static_cast<std::ptrdiff_t>((ix + 1) * nv));
    std::vector<int> dims = f.vg.dims();
    for (int a = 0; a < f.vg.d; ++a) block = contract(block, dims, a, B);
    std::copy(block.begin(), block.end(), out.f.begin() + static_cast<std::ptrdiff_t>(ix * nt));
  }
  return out;
}

AliasReport alias_report(const PhaseSpaceDensity& f, const VelocityGrid& target) {
  AliasReport rep;
  if (f.vg == target) return rep;
  const Lattice lv = f.vg.lattice();
  const std::size_t nx = f.nx(), nv = f.nv();
  const double nyquist = std::numbers::pi / target.hv();
  std::vector<char> high(nv, 0), outside(nv, 0);
  for (std::size_t i = 0; i < nv; ++i) {
    auto idx = lv.unflatten(i);
    for (int a = 0; a < lv.d; ++a) {
      if (std::abs(lv.wavenumber(idx[a])) > nyquist * (1 + 1e-12)) high[i] = 1;
      const double v = lv.node(idx[a]);
      if (v < -target.V * (1 + 1e-12) || v >= target.V * (1 - 1e-12)) outside[i] = 1;
    }
  }
  CField buf(f.f.begin(), f.f.end());
  fft::transform(buf.data(), lv.dims(), fft::kForward, static_cast<int>(nx), 1, static_cast<int>(nv));
  double e_all = 0, e_high = 0, m_all = 0, m_out = 0;
  for (std::size_t ix = 0; ix < nx; ++ix)
    for (std::size_t i = 0; i < nv; ++i) {
      const double e = std::norm(buf[ix * nv + i]);
      e_all += e;
      if (high[i]) e_high += e;
      const double m = std::abs(f.f[ix * nv + i]);
      m_all += m;
      if (outside[i]) m_out += m;
    }
  rep.spectral_fraction = e_all > 0 ? e_high / e_all : 0.0;
  rep.outside_fraction = m_all > 0 ? m_out / m_all : 0.0;
  return rep;
}

MatchResult match_grids(const PhaseSpaceDensity& f, double eps, double alias_tol) {
  const VelocityGrid dual = dual_velocity_grid(f.xg, eps);
  MatchResult res;
  res.report = alias_report(f, dual);
  if (res.report.total() > alias_tol) {
    std::ostringstream ss;
    ss << "band-limit violation resampling onto the eps = " << eps << " dual grid: spectral tail "
       << res.report.spectral_fraction << ", mass outside box " << res.report.outside_fraction << " (tolerance "
       << alias_tol << ")";
    throw RejectedInput(ss.str());
  }
  res.W = resample_velocity(f, dual);
  return res;
}

}  // namespace rvlab
