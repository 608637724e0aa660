#include "rvlab/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace rvlab::fft {

namespace {

using Key = std::tuple<std::vector<int>, int, int, int, int>;

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_plan lookup(const std::vector<int>& dims, int dir, int howmany, int stride, int dist,
                 cplx* data) {
  static std::map<Key, fftw_plan> cache;
  Key key{dims, dir, howmany, stride, dist};
  std::lock_guard<std::mutex> lock(planner_mutex());
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_plan plan = fftw_plan_many_dft(static_cast<int>(dims.size()), dims.data(), howmany, p,
                                      nullptr, stride, dist, p, nullptr, stride, dist, dir,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
  cache.emplace(key, plan);
  return plan;
}

using RealKey = std::tuple<std::vector<int>, int, int, int, int, int, int>;

fftw_plan lookup_real(const std::vector<int>& dims, int dir, int howmany, int istride, int idist,
                      int ostride, int odist, double* r, cplx* c) {
  static std::map<RealKey, fftw_plan> cache;
  RealKey key{dims, dir, howmany, istride, idist, ostride, odist};
  std::lock_guard<std::mutex> lock(planner_mutex());
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto* p = reinterpret_cast<fftw_complex*>(c);
  const int rank = static_cast<int>(dims.size());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  fftw_plan plan =
      dir == kForward
          ? fftw_plan_many_dft_r2c(rank, dims.data(), howmany, r, nullptr, istride, idist, p, nullptr, ostride,
                                   odist, flags)
          : fftw_plan_many_dft_c2r(rank, dims.data(), howmany, p, nullptr, istride, idist, r, nullptr, ostride,
                                   odist, flags);
  cache.emplace(key, plan);
  return plan;
}

}  // namespace

void forward_real(const double* in, int istride, int idist, cplx* out, int ostride, int odist,
                  const std::vector<int>& dims, int howmany) {
  auto* r = const_cast<double*>(in);
  fftw_plan plan = lookup_real(dims, kForward, howmany, istride, idist, ostride, odist, r, out);
  fftw_execute_dft_r2c(plan, r, reinterpret_cast<fftw_complex*>(out));
}

void backward_real(cplx* in, int istride, int idist, double* out, int ostride, int odist,
                   const std::vector<int>& dims, int howmany) {
  fftw_plan plan = lookup_real(dims, kBackward, howmany, istride, idist, ostride, odist, out, in);
  fftw_execute_dft_c2r(plan, reinterpret_cast<fftw_complex*>(in), out);
}

std::size_t half_size(const std::vector<int>& dims) {
  std::size_t s = 1;
  for (std::size_t a = 0; a + 1 < dims.size(); ++a) s *= static_cast<std::size_t>(dims[a]);
  return s * static_cast<std::size_t>(dims.back() / 2 + 1);
}

void transform(cplx* data, const std::vector<int>& dims, Direction dir, int howmany, int stride,
               int dist) {
  int total = 1;
  for (int n : dims) total *= n;
  if (dist == 0) dist = total;
  fftw_plan plan = lookup(dims, dir, howmany, stride, dist, data);
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(plan, p, p);
}

void inverse(cplx* data, const std::vector<int>& dims) {
  transform(data, dims, kBackward);
  std::size_t total = 1;
  for (int n : dims) total *= static_cast<std::size_t>(n);
  const double s = 1.0 / static_cast<double>(total);
  for (std::size_t i = 0; i < total; ++i) data[i] *= s;
}

std::vector<int> cube(int d, int n) { return std::vector<int>(static_cast<std::size_t>(d), n); }

}  // namespace rvlab::fft
