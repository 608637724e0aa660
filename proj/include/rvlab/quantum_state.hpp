#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "rvlab/grid.hpp"

namespace rvlab {

using Matrix = Eigen::MatrixXcd;

// Mixed state omega = sum_j occ_j |psi_j><psi_j|; orbitals are the columns of
// `psi` (grid.size() x M), orthonormal under <f, g> = h^d sum conj(f) g.
struct OrbitalEnsemble {
  TorusGrid grid;
  double eps = 1.0;
  double N = 1.0;
  std::vector<double> occ;
  Matrix psi;

  int rank() const { return static_cast<int>(occ.size()); }
  double trace() const;
};

// Dense kernel values A(x_i; x_j); operators act with the quadrature weight h^d.
struct OperatorMatrix {
  TorusGrid grid;
  Matrix A;

  double weight() const { return grid.cell(); }
  double trace() const { return weight() * A.diagonal().real().sum(); }
};

struct StateTolerances {
  double trace_tol = 1e-8;
  double ortho_tol = 1e-8;
  double occ_floor = 1e-12;
  double max_distortion = 1e-2;
  double clip_tol = 1e-2;
};

struct DistortionReport {
  double clipped_negative = 0;  // sum of |lambda| over negative eigenvalues
  double clipped_positive = 0;  // sum of (lambda - 1) over eigenvalues above 1
  double rescale_factor = 1;
  double relative = 0;     // (clipped_negative + clipped_positive) / N_target
  double s1_distance = 0;  // ||input - output||_{S^1}, exact in the shared eigenbasis
  int dropped = 0;
};

struct FromMatrixResult {
  OrbitalEnsemble ensemble;
  DistortionReport report;
};

double epsilon_of(double N, int d);

OperatorMatrix to_matrix(const OrbitalEnsemble& ens);

// Eigendecomposition, clipping to [0, 1], dropping below occ_floor and rescaling
// to trace N_target. Throws RejectedInput when the distortion exceeds max_distortion.
FromMatrixResult from_matrix(const OperatorMatrix& A, double N_target, double eps,
                             const StateTolerances& tol = {});

// Schatten p-norm of the h^d-weighted operator; p = infinity gives the largest singular value.
double schatten_norm(const OperatorMatrix& A, double p);
std::vector<double> schatten_norms(const OperatorMatrix& A, const std::vector<double>& ps);
std::vector<double> singular_values(const OperatorMatrix& A);

// ||(1 - eps^2 Laplacian)^{1/4} A (1 - eps^2 Laplacian)^{1/4}||_{S^1}.
double dressed_trace_norm(const OperatorMatrix& A, double eps);

RField density_of(const OrbitalEnsemble& ens);

// h^d Psi^* Psi.
Matrix gram(const OrbitalEnsemble& ens);

// Throws NumericalError when trace, orthonormality or occupation bounds fail.
void validate(const OrbitalEnsemble& ens, const StateTolerances& tol = {});

bool is_hermitian(const Matrix& A, double rel_tol);

void save_checkpoint(const std::string& path, const OrbitalEnsemble& ens);
OrbitalEnsemble load_checkpoint(const std::string& path, double L);

}  // namespace rvlab
