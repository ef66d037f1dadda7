#pragma once

#include <complex>
#include <memory>
#include <span>

namespace ckdyn {

/// Unnormalized 1-D complex FFT of a fixed length. Plans are shared per length and may be
/// executed concurrently from several threads on distinct buffers.
class Fft {
 public:
  explicit Fft(std::size_t n);

  std::size_t size() const noexcept { return n_; }

  /// In place: X_k = sum_j x_j e^{-2 pi i j k / n}.
  void forward(std::span<std::complex<double>> data) const;
  /// In place: x_j = sum_k X_k e^{+2 pi i j k / n} (no 1/n factor).
  void backward(std::span<std::complex<double>> data) const;

  struct Plans;

 private:
  std::size_t n_;
  std::shared_ptr<const Plans> plans_;
};

}  // namespace ckdyn
