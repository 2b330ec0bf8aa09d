// FFTW-backed real FFTs with a per-length plan cache.  Plans are created with
// FFTW_ESTIMATE (deterministic algorithm choice) and executed via the
// new-array interface so concurrent calls only share read-only plans.

#include "panelseg/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

#include "panelseg/errors.hpp"

namespace panelseg {

namespace {

struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
};

std::mutex plan_mutex;
std::map<long, PlanPair>& plan_cache() {
  static std::map<long, PlanPair> cache;
  return cache;
}

PlanPair get_plans(long T) {
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto& cache = plan_cache();
  auto it = cache.find(T);
  if (it != cache.end()) return it->second;
  // Alignment-agnostic plans (FFTW_UNALIGNED) so they can run on any buffer.
  std::vector<double> re(static_cast<size_t>(T));
  std::vector<fftw_complex> co(static_cast<size_t>(T / 2 + 1));
  PlanPair p;
  p.fwd = fftw_plan_dft_r2c_1d(static_cast<int>(T), re.data(), co.data(),
                               FFTW_ESTIMATE | FFTW_UNALIGNED);
  p.inv = fftw_plan_dft_c2r_1d(static_cast<int>(T), co.data(), re.data(),
                               FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!p.fwd || !p.inv) throw InternalError("fftw plan creation failed");
  cache[T] = p;
  return p;
}

}  // namespace

std::vector<std::complex<double>> rfft(std::span<const double> x) {
  const long T = static_cast<long>(x.size());
  if (T < 2) throw DimensionError("rfft: need length >= 2");
  PlanPair p = get_plans(T);
  std::vector<double> in(x.begin(), x.end());
  std::vector<std::complex<double>> out(static_cast<size_t>(T / 2 + 1));
  fftw_execute_dft_r2c(p.fwd, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

std::vector<double> irfft(std::span<const std::complex<double>> c, long T) {
  if (static_cast<long>(c.size()) != T / 2 + 1) {
    throw DimensionError("irfft: coefficient count does not match length");
  }
  PlanPair p = get_plans(T);
  std::vector<std::complex<double>> in(c.begin(), c.end());  // c2r destroys input
  std::vector<double> out(static_cast<size_t>(T));
  fftw_execute_dft_c2r(p.inv, reinterpret_cast<fftw_complex*>(in.data()), out.data());
  const double inv = 1.0 / static_cast<double>(T);
  for (double& v : out) v *= inv;
  return out;
}

}  // namespace panelseg
