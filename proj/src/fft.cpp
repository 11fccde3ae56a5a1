#include "ddp/fft.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include <fftw3.h>

#include "ddp/errors.hpp"

namespace ddp {

namespace {

// Plans are created once per (rows, cols, sign) with FFTW_UNALIGNED so that
// fftw_execute_dft may run them on caller buffers from any thread. Planner
// calls themselves are not thread-safe and are serialised here.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(int rows, int cols, int sign) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(rows, cols, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    const int n = rows * cols;
    auto* buf_in = fftw_alloc_complex(n);
    auto* buf_out = fftw_alloc_complex(n);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = rows == 1 ? fftw_plan_dft_1d(cols, buf_in, buf_out, sign, flags)
                               : fftw_plan_dft_2d(rows, cols, buf_in, buf_out, sign, flags);
    fftw_free(buf_in);
    fftw_free(buf_out);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

void run(const cplx* in, cplx* out, int rows, int cols, FftDirection dir) {
  const int sign = dir == FftDirection::Forward ? FFTW_FORWARD : FFTW_BACKWARD;
  fftw_plan plan = plan_cache().get(rows, cols, sign);
  // FFTW does not modify the input of an out-of-place complex transform.
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)), reinterpret_cast<fftw_complex*>(out));
}

}  // namespace

ComplexImage fft2(const ComplexImage& img, FftDirection dir) {
  if (img.rows() < 1 || img.cols() < 1) throw ShapeError("fft2 needs a non-empty image");
  require_finite(img, "fft2 input");
  ComplexImage out(img.rows(), img.cols());
  run(img.data(), out.data(), static_cast<int>(img.rows()), static_cast<int>(img.cols()), dir);
  out *= 1.0 / std::sqrt(static_cast<double>(img.size()));
  return out;
}

std::vector<cplx> fft1(std::span<const cplx> x, FftDirection dir) {
  if (x.empty()) throw ShapeError("fft1 needs a non-empty sequence");
  std::vector<cplx> out(x.size());
  run(x.data(), out.data(), 1, static_cast<int>(x.size()), dir);
  const double s = 1.0 / std::sqrt(static_cast<double>(x.size()));
  for (auto& v : out) v *= s;
  return out;
}

}  // namespace ddp
