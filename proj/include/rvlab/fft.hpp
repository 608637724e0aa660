#pragma once

#include <complex>
#include <vector>

namespace rvlab {

using cplx = std::complex<double>;
using CField = std::vector<cplx>;
using RField = std::vector<double>;

namespace fft {

enum Direction : int { kForward = -1, kBackward = +1 };

// In-place multidimensional DFT over `dims` (row-major, last index fastest),
// repeated `howmany` times with element `stride` and batch distance `dist`.
// Unnormalized in both directions. Plans are cached and shared; execution
// is reentrant.
void transform(cplx* data, const std::vector<int>& dims, Direction dir, int howmany = 1,
               int stride = 1, int dist = 0);

// Out-of-place real-to-half-complex DFT; the last axis keeps n/2+1 modes.
void forward_real(const double* in, int istride, int idist, cplx* out, int ostride, int odist,
                  const std::vector<int>& dims, int howmany);
// Inverse of forward_real without normalization; clobbers `in`.
void backward_real(cplx* in, int istride, int idist, double* out, int ostride, int odist,
                   const std::vector<int>& dims, int howmany);
// Complex entries per transform in the half-complex layout.
std::size_t half_size(const std::vector<int>& dims);

inline void forward(cplx* data, const std::vector<int>& dims) {
  transform(data, dims, kForward);
}
// Inverse transform including the 1/size normalization.
void inverse(cplx* data, const std::vector<int>& dims);

std::vector<int> cube(int d, int n);

}  // namespace fft
}  // namespace rvlab
