#pragma once

// Thin FFTW wrapper: in-place complex transforms on fftw_malloc'd buffers.
//
// Plans are created once per (length, direction) under a mutex and executed
// through the new-array interface, which FFTW guarantees to be thread-safe.
// All buffers come from fftw_malloc, so they share the alignment of the
// buffers the plans were created with.

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <new>
#include <span>
#include <utility>

namespace halfwave::fft {

enum class Direction { Forward, Backward };

class Buffer {
 public:
  explicit Buffer(std::size_t n)
      : n_(n), data_(static_cast<std::complex<double>*>(fftw_malloc(sizeof(fftw_complex) * n))) {
    if (!data_) throw std::bad_alloc();
    std::fill(data_.get(), data_.get() + n_, std::complex<double>{});
  }
  Buffer(const Buffer& o) : Buffer(o.n_) { std::copy(o.begin(), o.end(), begin()); }
  Buffer& operator=(const Buffer& o) {
    if (this != &o) {
      Buffer tmp(o);
      *this = std::move(tmp);
    }
    return *this;
  }
  Buffer(Buffer&&) noexcept = default;
  Buffer& operator=(Buffer&&) noexcept = default;

  std::size_t size() const { return n_; }
  std::complex<double>* data() { return data_.get(); }
  const std::complex<double>* data() const { return data_.get(); }
  std::complex<double>& operator[](std::size_t i) { return data_.get()[i]; }
  const std::complex<double>& operator[](std::size_t i) const { return data_.get()[i]; }
  std::complex<double>* begin() { return data(); }
  std::complex<double>* end() { return data() + n_; }
  const std::complex<double>* begin() const { return data(); }
  const std::complex<double>* end() const { return data() + n_; }
  std::span<std::complex<double>> span() { return {data(), n_}; }
  std::span<const std::complex<double>> span() const { return {data(), n_}; }

 private:
  struct Free {
    void operator()(std::complex<double>* p) const { fftw_free(p); }
  };
  std::size_t n_;
  std::unique_ptr<std::complex<double>, Free> data_;
};

namespace detail {

inline fftw_plan plan_for(int n, Direction dir) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, fftw_plan> cache;
  const auto key = std::make_pair(n, dir == Direction::Forward ? 0 : 1);
  std::lock_guard lock(mutex);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  Buffer scratch(static_cast<std::size_t>(n));
  auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
  fftw_plan plan = fftw_plan_dft_1d(n, p, p, dir == Direction::Forward ? FFTW_FORWARD : FFTW_BACKWARD,
                                    FFTW_ESTIMATE);
  cache.emplace(key, plan);
  return plan;
}

}  // namespace detail

/// Unnormalized in-place DFT. Forward uses e^{-2 pi i jk/n}, Backward e^{+2 pi i jk/n}.
inline void transform(Buffer& buf, Direction dir) {
  fftw_plan plan = detail::plan_for(static_cast<int>(buf.size()), dir);
  auto* p = reinterpret_cast<fftw_complex*>(buf.data());
  fftw_execute_dft(plan, p, p);
}

}  // namespace halfwave::fft
