#pragma once

// Fourier-side representation of band-limited fields on the torus.
//
// A field u = sum_{|k| <= N} u_k e^{ikx} is stored by its 2N+1 coefficients.
// The torus carries the normalized measure dx/2pi, so (u|v) = sum u_k conj(v_k)
// and ||e^{ikx}||_{L^2} = 1.

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace halfwave {

using complex = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;

/// Retained band k in [-N, N] plus the FFT length used for dealiased products.
struct GridSpec {
  int max_mode = 1;
  int padded_len = 5;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

namespace detail {

inline bool is_5_smooth(int n) {
  for (int p : {2, 3, 5})
    while (n % p == 0) n /= p;
  return n == 1;
}

}  // namespace detail

/// Smallest 2^a 3^b 5^c length >= 4N+1. A triple product of band-N fields has
/// degree 3N; any length above 4N keeps the wraparound off [-N, N].
inline GridSpec make_grid(int max_mode) {
  if (max_mode < 1) throw std::invalid_argument("make_grid: max_mode must be >= 1");
  int m = 4 * max_mode + 1;
  while (!detail::is_5_smooth(m)) ++m;
  return GridSpec{max_mode, m};
}

inline GridSpec make_grid(int max_mode, int padded_len) {
  if (max_mode < 1) throw std::invalid_argument("make_grid: max_mode must be >= 1");
  if (padded_len < 4 * max_mode + 1)
    throw std::invalid_argument("make_grid: padded length " + std::to_string(padded_len) +
                                " is below 4N+1 = " + std::to_string(4 * max_mode + 1));
  return GridSpec{max_mode, padded_len};
}

class TorusField {
 public:
  TorusField() : TorusField(make_grid(1)) {}
  explicit TorusField(GridSpec grid)
      : grid_(grid), coeff_(static_cast<std::size_t>(2 * grid.max_mode + 1)) {}
  TorusField(GridSpec grid, std::vector<complex> coeff) : grid_(grid), coeff_(std::move(coeff)) {
    if (coeff_.size() != static_cast<std::size_t>(2 * grid_.max_mode + 1))
      throw std::invalid_argument("TorusField: coefficient count must be 2N+1");
  }

  static TorusField single_mode(GridSpec grid, int k, complex amplitude = 1.0) {
    TorusField f(grid);
    f.at(k) = amplitude;
    return f;
  }

  const GridSpec& grid() const { return grid_; }
  int max_mode() const { return grid_.max_mode; }
  std::size_t size() const { return coeff_.size(); }

  // Indexed by wavenumber, k in [-N, N].
  complex& operator[](int k) { return coeff_[static_cast<std::size_t>(k + grid_.max_mode)]; }
  const complex& operator[](int k) const {
    return coeff_[static_cast<std::size_t>(k + grid_.max_mode)];
  }
  complex& at(int k) {
    check_mode(k);
    return (*this)[k];
  }
  const complex& at(int k) const {
    check_mode(k);
    return (*this)[k];
  }
  bool in_band(int k) const { return k >= -grid_.max_mode && k <= grid_.max_mode; }

  std::span<complex> coefficients() { return coeff_; }
  std::span<const complex> coefficients() const { return coeff_; }

  bool all_finite() const {
    for (const auto& c : coeff_)
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
    return true;
  }

  TorusField& operator+=(const TorusField& o) {
    require_same_grid(o, "operator+=");
    for (std::size_t i = 0; i < coeff_.size(); ++i) coeff_[i] += o.coeff_[i];
    return *this;
  }
  TorusField& operator-=(const TorusField& o) {
    require_same_grid(o, "operator-=");
    for (std::size_t i = 0; i < coeff_.size(); ++i) coeff_[i] -= o.coeff_[i];
    return *this;
  }
  TorusField& operator*=(complex s) {
    for (auto& c : coeff_) c *= s;
    return *this;
  }

  friend TorusField operator+(TorusField a, const TorusField& b) { return a += b; }
  friend TorusField operator-(TorusField a, const TorusField& b) { return a -= b; }
  friend TorusField operator*(complex s, TorusField a) { return a *= s; }
  friend TorusField operator*(TorusField a, complex s) { return a *= s; }
  friend TorusField operator-(TorusField a) { return a *= -1.0; }

  friend bool operator==(const TorusField& a, const TorusField& b) {
    return a.grid_ == b.grid_ && a.coeff_ == b.coeff_;
  }

  void require_same_grid(const TorusField& o, const char* what) const {
    if (!(grid_ == o.grid_)) throw std::invalid_argument(std::string(what) + ": grid mismatch");
  }

 private:
  void check_mode(int k) const {
    if (!in_band(k))
      throw std::out_of_range("TorusField: mode " + std::to_string(k) + " outside [-" +
                              std::to_string(grid_.max_mode) + ", " +
                              std::to_string(grid_.max_mode) + "]");
  }

  GridSpec grid_;
  std::vector<complex> coeff_;
};

/// Largest coefficient modulus of a - b.
inline double max_coefficient_difference(const TorusField& a, const TorusField& b) {
  a.require_same_grid(b, "max_coefficient_difference");
  double m = 0.0;
  auto ca = a.coefficients();
  auto cb = b.coefficients();
  for (std::size_t i = 0; i < ca.size(); ++i) m = std::max(m, std::abs(ca[i] - cb[i]));
  return m;
}

/// Copies the coefficients of f into a grid with a different band, dropping
/// modes that do not fit.
inline TorusField resample(const TorusField& f, GridSpec grid) {
  TorusField out(grid);
  const int n = std::min(f.max_mode(), grid.max_mode);
  for (int k = -n; k <= n; ++k) out[k] = f[k];
  return out;
}

}  // namespace halfwave
