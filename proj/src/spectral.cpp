#include "fplab/spectral.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace fplab::detail {
namespace {

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

// Plan creation mutates FFTW global state and must be serialized; execution
// through fftw_execute_dft on distinct arrays is thread safe.
std::mutex plan_mutex;
std::map<std::pair<int, int>, PlanPair>& plan_cache() {
  static std::map<std::pair<int, int>, PlanPair> cache;
  return cache;
}

PlanPair plans_for(int dim, int n) {
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto& cache = plan_cache();
  auto it = cache.find({dim, n});
  if (it != cache.end()) return it->second;

  std::size_t total = dim == 1 ? (std::size_t)n : (std::size_t)n * n;
  std::vector<std::complex<double>> scratch(total);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  // FFTW_UNALIGNED keeps the plan valid for any caller buffer.
  unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  PlanPair p;
  if (dim == 1) {
    p.forward = fftw_plan_dft_1d(n, buf, buf, FFTW_FORWARD, flags);
    p.backward = fftw_plan_dft_1d(n, buf, buf, FFTW_BACKWARD, flags);
  } else {
    p.forward = fftw_plan_dft_2d(n, n, buf, buf, FFTW_FORWARD, flags);
    p.backward = fftw_plan_dft_2d(n, n, buf, buf, FFTW_BACKWARD, flags);
  }
  if (!p.forward || !p.backward) throw std::runtime_error("fftw plan creation failed");
  cache[{dim, n}] = p;
  return p;
}

}  // namespace

void dft_forward(int dim, int n, std::complex<double>* data) {
  auto* buf = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(plans_for(dim, n).forward, buf, buf);
}

void dft_backward(int dim, int n, std::complex<double>* data) {
  auto* buf = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(plans_for(dim, n).backward, buf, buf);
}

}  // namespace fplab::detail
