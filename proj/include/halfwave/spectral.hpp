#pragma once

// Elementary operators on torus fields: Szego projectors, Fourier multipliers,
// dealiased cubic products and the norms used throughout the toolkit.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

#include "halfwave/fft.hpp"
#include "halfwave/field.hpp"

namespace halfwave {

/// Values of a field on the padded grid x_j = 2 pi j / M.
using PhysicalField = fft::Buffer;

/// Wavenumber attached to slot i of a length-M DFT, in (-M/2, M/2].
inline int padded_wavenumber(std::size_t i, std::size_t m) {
  const auto ii = static_cast<long>(i);
  const auto mm = static_cast<long>(m);
  return static_cast<int>(2 * ii <= mm ? ii : ii - mm);
}

inline PhysicalField to_physical(const TorusField& f) {
  const auto m = static_cast<std::size_t>(f.grid().padded_len);
  PhysicalField buf(m);
  const int n = f.max_mode();
  for (int k = -n; k <= n; ++k) buf[static_cast<std::size_t>((k + static_cast<long>(m)) % static_cast<long>(m))] = f[k];
  fft::transform(buf, fft::Direction::Backward);
  return buf;
}

/// Fourier coefficients of grid values, truncated to the band of `grid`.
/// Destroys the contents of `values`.
inline TorusField from_physical(PhysicalField&& values, GridSpec grid) {
  const auto m = values.size();
  if (m != static_cast<std::size_t>(grid.padded_len))
    throw std::invalid_argument("from_physical: buffer length does not match the grid");
  fft::transform(values, fft::Direction::Forward);
  TorusField f(grid);
  const double scale = 1.0 / static_cast<double>(m);
  const int n = grid.max_mode;
  for (int k = -n; k <= n; ++k)
    f[k] = values[static_cast<std::size_t>((k + static_cast<long>(m)) % static_cast<long>(m))] * scale;
  return f;
}

/// Mean of grid values, i.e. the quadrature of (1/2pi) * integral.
inline complex grid_mean(const PhysicalField& v) {
  complex s{};
  for (const auto& x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline TorusField project_plus(const TorusField& f) {
  TorusField out(f.grid());
  for (int k = 0; k <= f.max_mode(); ++k) out[k] = f[k];
  return out;
}

inline TorusField project_minus(const TorusField& f) {
  TorusField out(f.grid());
  for (int k = -f.max_mode(); k < 0; ++k) out[k] = f[k];
  return out;
}

enum class Multiplier { AbsD, D, D0Inv };

inline double multiplier_symbol(Multiplier which, int k) {
  switch (which) {
    case Multiplier::AbsD:
      return std::abs(static_cast<double>(k));
    case Multiplier::D:
      return static_cast<double>(k);
    case Multiplier::D0Inv:
      return k == 0 ? 0.0 : 1.0 / static_cast<double>(k);
  }
  return 0.0;
}

inline TorusField apply_multiplier(const TorusField& f, Multiplier which) {
  TorusField out(f.grid());
  for (int k = -f.max_mode(); k <= f.max_mode(); ++k) out[k] = multiplier_symbol(which, k) * f[k];
  return out;
}

/// Applies a multiplier to grid values over the full padded spectrum. Exact for
/// intermediate products whose degree stays below M/2.
inline void apply_multiplier_physical(PhysicalField& v, Multiplier which) {
  const auto m = v.size();
  fft::transform(v, fft::Direction::Forward);
  const double scale = 1.0 / static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i) v[i] *= multiplier_symbol(which, padded_wavenumber(i, m)) * scale;
  fft::transform(v, fft::Direction::Backward);
}

/// Exact band coefficients of a * conj(b) * c.
inline TorusField cubic_term(const TorusField& a, const TorusField& b, const TorusField& c) {
  a.require_same_grid(b, "cubic_term");
  a.require_same_grid(c, "cubic_term");
  PhysicalField pa = to_physical(a);
  const PhysicalField pb = to_physical(b);
  const PhysicalField pc = to_physical(c);
  for (std::size_t i = 0; i < pa.size(); ++i) pa[i] *= std::conj(pb[i]) * pc[i];
  return from_physical(std::move(pa), a.grid());
}

/// |u|^2 u with a single forward/backward transform pair.
inline TorusField cubic_term(const TorusField& u) {
  PhysicalField p = to_physical(u);
  for (auto& x : p) x *= std::norm(x);
  return from_physical(std::move(p), u.grid());
}

/// (u|v) = sum_k u_k conj(v_k).
inline complex inner(const TorusField& u, const TorusField& v) {
  u.require_same_grid(v, "inner");
  complex s{};
  for (int k = -u.max_mode(); k <= u.max_mode(); ++k) s += u[k] * std::conj(v[k]);
  return s;
}

class NormKind {
 public:
  enum class Tag { L2, L4, L1, Hs, B111, Momentum };

  static NormKind L2() { return NormKind(Tag::L2); }
  static NormKind L4() { return NormKind(Tag::L4); }
  static NormKind L1() { return NormKind(Tag::L1); }
  static NormKind Hs(double s) { return NormKind(Tag::Hs, s); }
  static NormKind B111() { return NormKind(Tag::B111); }
  static NormKind Momentum() { return NormKind(Tag::Momentum); }

  Tag tag() const { return tag_; }
  double sobolev_index() const {
    if (tag_ != Tag::Hs) throw std::logic_error("NormKind: only Hs carries an exponent");
    return s_;
  }

 private:
  explicit NormKind(Tag tag, double s = 0.0) : tag_(tag), s_(s) {}
  Tag tag_;
  double s_;
};

// Littlewood-Paley blocks with sharp cutoffs: block -1 is S_0 (|k| <= 1), block
// j >= 0 keeps 2^j < |k| <= 2^{j+1}.
inline int lp_block_of(int k) {
  const int a = std::abs(k);
  if (a <= 1) return -1;
  int j = 0;
  while ((2 << j) < a) ++j;
  return j;
}

inline int lp_block_count(int max_mode) { return lp_block_of(max_mode) + 2; }

inline TorusField lp_block(const TorusField& f, int j) {
  TorusField out(f.grid());
  for (int k = -f.max_mode(); k <= f.max_mode(); ++k)
    if (lp_block_of(k) == j) out[k] = f[k];
  return out;
}

inline double sobolev_weight(int k, double s) {
  return std::pow(1.0 + static_cast<double>(k) * static_cast<double>(k), s);
}

namespace detail {

inline double l1_on_grid(const TorusField& f) {
  const PhysicalField p = to_physical(f);
  double s = 0.0;
  for (const auto& x : p) s += std::abs(x);
  return s / static_cast<double>(p.size());
}

}  // namespace detail

/// Norms with the normalized measure. Momentum is the signed value sum k|u_k|^2.
/// L1 and L4 use the padded grid as quadrature (exact for L4 of band fields).
inline double norm(const TorusField& f, const NormKind& kind) {
  const int n = f.max_mode();
  switch (kind.tag()) {
    case NormKind::Tag::L2: {
      double s = 0.0;
      for (int k = -n; k <= n; ++k) s += std::norm(f[k]);
      return std::sqrt(s);
    }
    case NormKind::Tag::Hs: {
      const double sob = kind.sobolev_index();
      double s = 0.0;
      for (int k = -n; k <= n; ++k) s += sobolev_weight(k, sob) * std::norm(f[k]);
      return std::sqrt(s);
    }
    case NormKind::Tag::L4: {
      const PhysicalField p = to_physical(f);
      double s = 0.0;
      for (const auto& x : p) s += std::norm(x) * std::norm(x);
      return std::pow(s / static_cast<double>(p.size()), 0.25);
    }
    case NormKind::Tag::L1:
      return detail::l1_on_grid(f);
    case NormKind::Tag::B111: {
      double s = 0.0;
      for (int j = -1; j < lp_block_count(n) - 1; ++j) {
        const double w = j < 0 ? 1.0 : std::ldexp(1.0, j);
        s += w * detail::l1_on_grid(lp_block(f, j));
      }
      return s;
    }
    case NormKind::Tag::Momentum: {
      double s = 0.0;
      for (int k = -n; k <= n; ++k) s += static_cast<double>(k) * std::norm(f[k]);
      return s;
    }
  }
  throw std::logic_error("norm: unknown kind");
}

inline double grid_max_abs(const TorusField& f) {
  const PhysicalField p = to_physical(f);
  double m = 0.0;
  for (const auto& x : p) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace halfwave
