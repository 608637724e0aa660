#include "rvlab/quantum_state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rvlab/error.hpp"
#include "rvlab/io.hpp"

namespace rvlab {

double OrbitalEnsemble::trace() const { return std::accumulate(occ.begin(), occ.end(), 0.0); }

double epsilon_of(double N, int d) {
  if (!(N >= 1.0)) throw ArgumentError("N must be >= 1");
  return std::pow(N, -1.0 / d);
}

OperatorMatrix to_matrix(const OrbitalEnsemble& ens) {
  OperatorMatrix out{ens.grid, Matrix()};
  Matrix scaled = ens.psi;
  for (int j = 0; j < ens.rank(); ++j) scaled.col(j) *= ens.occ[j];
  out.A.noalias() = scaled * ens.psi.adjoint();
  return out;
}

bool is_hermitian(const Matrix& A, double rel_tol) {
  const double scale = A.cwiseAbs().maxCoeff();
  if (scale == 0) return true;
  double dev = 0;
  for (Eigen::Index j = 0; j < A.cols(); ++j)
    for (Eigen::Index i = 0; i <= j; ++i) dev = std::max(dev, std::abs(A(i, j) - std::conj(A(j, i))));
  return dev <= rel_tol * scale;
}

FromMatrixResult from_matrix(const OperatorMatrix& A, double N_target, double eps, const StateTolerances& tol) {
  if (!is_hermitian(A.A, 1e-8)) throw ArgumentError("from_matrix: input is not Hermitian");
  const double w = A.weight();
  Eigen::SelfAdjointEigenSolver<Matrix> es(w * A.A);
  const auto& mu = es.eigenvalues();

  DistortionReport rep;
  std::vector<int> keep;
  std::vector<double> lam;
  for (Eigen::Index i = mu.size() - 1; i >= 0; --i) {
    double l = mu[i];
    if (l < 0) {
      rep.clipped_negative += -l;
      l = 0;
    } else if (l > 1) {
      rep.clipped_positive += l - 1;
      l = 1;
    }
    if (l < tol.occ_floor) {
      if (l > 0) ++rep.dropped;
      continue;
    }
    keep.push_back(static_cast<int>(i));
    lam.push_back(l);
  }
  const double tr = std::accumulate(lam.begin(), lam.end(), 0.0);
  if (!(tr > 0)) throw RejectedInput("from_matrix: no admissible occupations left after clipping");
  rep.rescale_factor = N_target / tr;
  rep.relative = (rep.clipped_negative + rep.clipped_positive) / N_target;

  FromMatrixResult res;
  auto& ens = res.ensemble;
  ens.grid = A.grid;
  ens.eps = eps;
  ens.N = N_target;
  ens.psi.resize(A.A.rows(), static_cast<Eigen::Index>(keep.size()));
  const double norm = 1.0 / std::sqrt(w);
  for (std::size_t j = 0; j < keep.size(); ++j) {
    ens.occ.push_back(lam[j] * rep.rescale_factor);
    ens.psi.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(keep[j]) * norm;
  }
  // Distance to the input in trace norm: both share the eigenbasis.
  std::vector<double> out_of(static_cast<std::size_t>(mu.size()), 0.0);
  for (std::size_t j = 0; j < keep.size(); ++j) out_of[static_cast<std::size_t>(keep[j])] = ens.occ[j];
  for (Eigen::Index i = 0; i < mu.size(); ++i) rep.s1_distance += std::abs(mu[i] - out_of[static_cast<std::size_t>(i)]);

  if (rep.relative > tol.max_distortion || std::abs(rep.rescale_factor - 1) > tol.max_distortion)
    throw RejectedInput("from_matrix: distortion " + std::to_string(rep.relative) + " (rescale " +
                        std::to_string(rep.rescale_factor) + ") exceeds max_distortion " +
                        std::to_string(tol.max_distortion));
  res.report = rep;
  return res;
}

std::vector<double> singular_values(const OperatorMatrix& A) {
  const double w = A.weight();
  std::vector<double> s;
  if (is_hermitian(A.A, 1e-12)) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(w * A.A, Eigen::EigenvaluesOnly);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) s.push_back(std::abs(es.eigenvalues()[i]));
  } else {
    Eigen::BDCSVD<Matrix> svd(w * A.A);
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) s.push_back(svd.singularValues()[i]);
  }
  std::sort(s.begin(), s.end(), std::greater<>());
  return s;
}

namespace {

double norm_from(const std::vector<double>& s, double p) {
  if (p < 1) throw ArgumentError("Schatten exponent must be >= 1");
  if (std::isinf(p)) return s.empty() ? 0.0 : s.front();
  double acc = 0;
  for (double x : s) acc += std::pow(x, p);
  return std::pow(acc, 1.0 / p);
}

}  // namespace

std::vector<double> schatten_norms(const OperatorMatrix& A, const std::vector<double>& ps) {
  for (double p : ps)
    if (p < 1) throw ArgumentError("Schatten exponent must be >= 1");
  const auto s = singular_values(A);
  std::vector<double> out;
  for (double p : ps) out.push_back(norm_from(s, p));
  return out;
}

double schatten_norm(const OperatorMatrix& A, double p) { return schatten_norms(A, {p}).front(); }

double dressed_trace_norm(const OperatorMatrix& A, double eps) {
  const Lattice lat = A.grid.lattice();
  const RField k2 = wavenumber_squared(lat);
  const auto dims = lat.dims();
  // D F A F^* D with D = (1 + eps^2 k^2)^{1/4}; the unitary DFT keeps singular values.
  Matrix B = A.A;
  const double scale = 1.0 / std::sqrt(static_cast<double>(lat.size()));
  for (Eigen::Index j = 0; j < B.cols(); ++j) {
    fft::forward(B.col(j).data(), dims);
    B.col(j) *= scale;
  }
  Matrix C = B.adjoint();
  for (Eigen::Index j = 0; j < C.cols(); ++j) {
    fft::forward(C.col(j).data(), dims);
    C.col(j) *= scale;
  }
  Matrix M = C.adjoint();
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j)
      M(i, j) *= std::pow((1 + eps * eps * k2[i]) * (1 + eps * eps * k2[j]), 0.25);
  return schatten_norm(OperatorMatrix{A.grid, M}, 1.0);
}

RField density_of(const OrbitalEnsemble& ens) {
  RField rho(ens.grid.size(), 0.0);
  const double inv = 1.0 / ens.N;
  for (int j = 0; j < ens.rank(); ++j) {
    const double l = ens.occ[j] * inv;
    for (Eigen::Index i = 0; i < ens.psi.rows(); ++i) rho[i] += l * std::norm(ens.psi(i, j));
  }
  return rho;
}

Matrix gram(const OrbitalEnsemble& ens) {
  Matrix G = ens.psi.adjoint() * ens.psi;
  return G * ens.grid.cell();
}

void validate(const OrbitalEnsemble& ens, const StateTolerances& tol) {
  const double tr = ens.trace();
  if (std::abs(tr - ens.N) > tol.trace_tol * ens.N)
    throw NumericalError("ensemble trace " + std::to_string(tr) + " differs from N = " + std::to_string(ens.N));
  for (double l : ens.occ)
    if (l < 0 || l > 1 + tol.clip_tol) throw NumericalError("occupation " + std::to_string(l) + " outside [0, 1]");
  const Matrix G = gram(ens);
  const double dev = (G - Matrix::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff();
  if (dev > tol.ortho_tol) throw NumericalError("orbitals not orthonormal, deviation " + std::to_string(dev));
}

void save_checkpoint(const std::string& path, const OrbitalEnsemble& ens) {
  io::Writer w(path);
  w.magic("RVMF");
  w.u32(1);
  w.u32(static_cast<std::uint32_t>(ens.grid.d));
  w.u32(static_cast<std::uint32_t>(ens.grid.n));
  w.u32(static_cast<std::uint32_t>(ens.rank()));
  w.f64(ens.N);
  w.f64(ens.eps);
  w.f64s(ens.occ.data(), ens.occ.size());
  // column-major n^d x M storage is orbital-major, i.e. M x n^d row-major
  w.f64s(reinterpret_cast<const double*>(ens.psi.data()), 2 * static_cast<std::size_t>(ens.psi.size()));
}

OrbitalEnsemble load_checkpoint(const std::string& path, double L) {
  io::Reader r(path);
  r.expect_magic("RVMF");
  const auto version = r.u32();
  if (version != 1) throw Error("unsupported checkpoint version " + std::to_string(version));
  const int d = static_cast<int>(r.u32());
  const int n = static_cast<int>(r.u32());
  const int M = static_cast<int>(r.u32());
  OrbitalEnsemble ens;
  ens.grid = TorusGrid(d, n, L);
  ens.N = r.f64();
  ens.eps = r.f64();
  ens.occ.resize(static_cast<std::size_t>(M));
  r.f64s(ens.occ.data(), ens.occ.size());
  ens.psi.resize(static_cast<Eigen::Index>(ens.grid.size()), M);
  r.f64s(reinterpret_cast<double*>(ens.psi.data()), 2 * static_cast<std::size_t>(ens.psi.size()));
  return ens;
}

}  // namespace rvlab
