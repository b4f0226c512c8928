#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

namespace wegnerlab {

/// Complex-to-complex DFT of a fixed 1-D or 2-D (row-major) shape.
///
/// Plans are created once (FFTW, estimate mode, unaligned) and executed with
/// the new-array interface, so a const Dft may be used concurrently from any
/// number of threads with distinct buffers. Transforms are unnormalized:
/// forward kernel e^{-2πi jm/N}, backward e^{+2πi jm/N}.
class Dft {
 public:
  explicit Dft(int n0);
  Dft(int n0, int n1);
  ~Dft();
  Dft(const Dft&) = delete;
  Dft& operator=(const Dft&) = delete;

  std::size_t size() const { return size_; }

  void forward(std::span<const std::complex<double>> in,
               std::span<std::complex<double>> out) const;
  void backward(std::span<const std::complex<double>> in,
                std::span<std::complex<double>> out) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::size_t size_ = 0;
};

}  // namespace wegnerlab
