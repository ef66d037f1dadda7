#include "ckdyn/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

#include "ckdyn/errors.hpp"

namespace ckdyn {

struct Fft::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  Plans() = default;
  Plans(const Plans&) = delete;
  Plans& operator=(const Plans&) = delete;
  ~Plans();
};

namespace {

// FFTW's planner is not re-entrant; execution with the new-array interface is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

Fft::Plans::~Plans() {
  std::lock_guard lock(planner_mutex());
  if (forward != nullptr) fftw_destroy_plan(forward);
  if (backward != nullptr) fftw_destroy_plan(backward);
}

Fft::Fft(std::size_t n) : n_(n) {
  if (n == 0) throw DomainError("FFT length must be positive");
  static std::mutex cache_mutex;
  static std::map<std::size_t, std::weak_ptr<const Plans>> cache;

  std::lock_guard cache_lock(cache_mutex);
  if (auto cached = cache[n].lock()) {
    plans_ = std::move(cached);
    return;
  }
  auto plans = std::make_shared<Plans>();
  {
    std::lock_guard lock(planner_mutex());
    auto* buf = fftw_alloc_complex(n);
    const int len = static_cast<int>(n);
    // ESTIMATE keeps plans (and therefore results) identical from run to run.
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    plans->forward = fftw_plan_dft_1d(len, buf, buf, FFTW_FORWARD, flags);
    plans->backward = fftw_plan_dft_1d(len, buf, buf, FFTW_BACKWARD, flags);
    fftw_free(buf);
  }
  if (plans->forward == nullptr || plans->backward == nullptr) {
    throw NumericalError("FFTW failed to create a plan");
  }
  cache[n] = plans;
  plans_ = std::move(plans);
}

void Fft::forward(std::span<std::complex<double>> data) const {
  if (data.size() != n_) throw DomainError("FFT buffer length mismatch");
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plans_->forward, p, p);
}

void Fft::backward(std::span<std::complex<double>> data) const {
  if (data.size() != n_) throw DomainError("FFT buffer length mismatch");
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plans_->backward, p, p);
}

}  // namespace ckdyn
