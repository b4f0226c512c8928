#include "wegnerlab/fft.hpp"

#include <fftw3.h>

#include <cassert>
#include <mutex>
#include <stdexcept>

namespace wegnerlab {

namespace {
// FFTW's planner is not thread-safe; plan creation/destruction is serialized.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(std::complex<double>* p) {
  return reinterpret_cast<fftw_complex*>(p);
}
}  // namespace

struct Dft::Impl {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  std::vector<std::complex<double>> scratch_in, scratch_out;
};

Dft::Dft(int n0) : impl_(std::make_unique<Impl>()) {
  if (n0 < 2) throw std::invalid_argument("Dft: size must be >= 2");
  size_ = static_cast<std::size_t>(n0);
  impl_->scratch_in.resize(size_);
  impl_->scratch_out.resize(size_);
  std::lock_guard<std::mutex> lock(planner_mutex());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  impl_->fwd = fftw_plan_dft_1d(n0, as_fftw(impl_->scratch_in.data()),
                                as_fftw(impl_->scratch_out.data()),
                                FFTW_FORWARD, flags);
  impl_->bwd = fftw_plan_dft_1d(n0, as_fftw(impl_->scratch_in.data()),
                                as_fftw(impl_->scratch_out.data()),
                                FFTW_BACKWARD, flags);
}

Dft::Dft(int n0, int n1) : impl_(std::make_unique<Impl>()) {
  if (n0 < 2 || n1 < 2) throw std::invalid_argument("Dft: sizes must be >= 2");
  size_ = static_cast<std::size_t>(n0) * static_cast<std::size_t>(n1);
  impl_->scratch_in.resize(size_);
  impl_->scratch_out.resize(size_);
  std::lock_guard<std::mutex> lock(planner_mutex());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  impl_->fwd = fftw_plan_dft_2d(n0, n1, as_fftw(impl_->scratch_in.data()),
                                as_fftw(impl_->scratch_out.data()),
                                FFTW_FORWARD, flags);
  impl_->bwd = fftw_plan_dft_2d(n0, n1, as_fftw(impl_->scratch_in.data()),
                                as_fftw(impl_->scratch_out.data()),
                                FFTW_BACKWARD, flags);
}

Dft::~Dft() {
  if (!impl_) return;
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (impl_->fwd) fftw_destroy_plan(impl_->fwd);
  if (impl_->bwd) fftw_destroy_plan(impl_->bwd);
}

void Dft::forward(std::span<const std::complex<double>> in,
                  std::span<std::complex<double>> out) const {
  assert(in.size() == size_ && out.size() == size_);
  fftw_execute_dft(impl_->fwd,
                   as_fftw(const_cast<std::complex<double>*>(in.data())),
                   as_fftw(out.data()));
}

void Dft::backward(std::span<const std::complex<double>> in,
                   std::span<std::complex<double>> out) const {
  assert(in.size() == size_ && out.size() == size_);
  fftw_execute_dft(impl_->bwd,
                   as_fftw(const_cast<std::complex<double>*>(in.data())),
                   as_fftw(out.data()));
}

}  // namespace wegnerlab
