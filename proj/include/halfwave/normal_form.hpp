#pragma once

// Quartic normal form of the gauged half-wave Hamiltonian H0 + eps^2 R.
//
// Quartic functionals are stored as sums over momentum-conserving quadruples,
//   G(u) = sum_{k1-k2+k3-k4=0} g(k) u_{k1} conj(u_{k2}) u_{k3} conj(u_{k4}),
// and Hamiltonian fields use X_G = -2i dG/d(conj u_k), so that
// {A,B} = dB.X_A = Im((X_A|X_B)).
//
// DirectSum evaluates the quadruple sums literally inside the retained band.
// ClosedForm assembles the same objects from products, projectors and D0^{-1}
// on the padded grid. Both are exact for band-limited fields.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "halfwave/field.hpp"
#include "halfwave/hankel.hpp"
#include "halfwave/spectral.hpp"

namespace halfwave {

struct QuadrupleKey {
  int k1 = 0, k2 = 0, k3 = 0, k4 = 0;

  bool zero_sum() const { return k1 - k2 + k3 - k4 == 0; }
  friend auto operator<=>(const QuadrupleKey&, const QuadrupleKey&) = default;
};

enum class ResonanceClass { AllNonNegative, AllNonPositive, Pair12_34, Pair14_32, NonResonant };

inline int phase(const QuadrupleKey& q) {
  return std::abs(q.k1) - std::abs(q.k2) + std::abs(q.k3) - std::abs(q.k4);
}

/// Cases of the resonance characterization satisfied by q. NonResonant is
/// never returned; an empty set means no case holds.
inline std::set<ResonanceClass> classify(const QuadrupleKey& q) {
  std::set<ResonanceClass> out;
  if (q.k1 >= 0 && q.k2 >= 0 && q.k3 >= 0 && q.k4 >= 0) out.insert(ResonanceClass::AllNonNegative);
  if (q.k1 <= 0 && q.k2 <= 0 && q.k3 <= 0 && q.k4 <= 0) out.insert(ResonanceClass::AllNonPositive);
  if (q.k1 == q.k2 && q.k3 == q.k4) out.insert(ResonanceClass::Pair12_34);
  if (q.k1 == q.k4 && q.k3 == q.k2) out.insert(ResonanceClass::Pair14_32);
  return out;
}

/// i / (4 phase) off resonance, 0 on it.
inline complex f_coeff(const QuadrupleKey& q) {
  if (!q.zero_sum()) throw std::invalid_argument("f_coeff: k1 - k2 + k3 - k4 != 0");
  const int p = phase(q);
  if (p == 0) return {};
  return complex(0.0, 1.0 / (4.0 * static_cast<double>(p)));
}

/// Weight of R = (||u||_4^4 - 2||u||_2^4)/4 on a zero-sum quadruple.
inline double r_coeff(const QuadrupleKey& q) {
  return 0.25 * (1.0 - (q.k1 == q.k2 ? 1.0 : 0.0) - (q.k1 == q.k4 ? 1.0 : 0.0));
}

/// Weight of the resonant part: r restricted to one-signed quadruples.
inline double rtilde_coeff(const QuadrupleKey& q) {
  const bool nonneg = q.k1 >= 0 && q.k2 >= 0 && q.k3 >= 0 && q.k4 >= 0;
  const bool nonpos = q.k1 <= 0 && q.k2 <= 0 && q.k3 <= 0 && q.k4 <= 0;
  return nonneg || nonpos ? r_coeff(q) : 0.0;
}

enum class FunctionalTag { H0, R, Rtilde, F };
enum class EvalMode { DirectSum, ClosedForm };

inline constexpr int direct_sum_max_mode = 32;

namespace detail {

inline void require_direct_size(const TorusField& u, const char* what) {
  if (u.max_mode() > direct_sum_max_mode)
    throw std::invalid_argument(std::string(what) + ": DirectSum needs N <= " +
                                std::to_string(direct_sum_max_mode) + ", got " +
                                std::to_string(u.max_mode()));
}

inline complex quartic_coefficient(FunctionalTag tag, const QuadrupleKey& q) {
  switch (tag) {
    case FunctionalTag::R:
      return r_coeff(q);
    case FunctionalTag::Rtilde:
      return rtilde_coeff(q);
    case FunctionalTag::F:
      return f_coeff(q);
    case FunctionalTag::H0:
      break;
  }
  throw std::logic_error("quartic_coefficient: H0 is quadratic");
}

inline double h0_value(const TorusField& u) {
  double s = 0.0;
  for (int k = -u.max_mode(); k <= u.max_mode(); ++k) s += 0.5 * std::abs(static_cast<double>(k)) * std::norm(u[k]);
  return s;
}

inline TorusField h0_field(const TorusField& u) {
  TorusField x = apply_multiplier(u, Multiplier::AbsD);
  x *= complex(0.0, -1.0);
  return x;
}

// Complex value of the quadruple sum; real part is the functional.
inline complex direct_value(FunctionalTag tag, const TorusField& u) {
  const int n = u.max_mode();
  complex total{};
  for (int k1 = -n; k1 <= n; ++k1)
    for (int k2 = -n; k2 <= n; ++k2) {
      const complex a = u[k1] * std::conj(u[k2]);
      if (a == complex{}) continue;
      complex row{};
      for (int k3 = -n; k3 <= n; ++k3) {
        const int k4 = k1 - k2 + k3;
        if (k4 < -n || k4 > n) continue;
        const complex c = quartic_coefficient(tag, {k1, k2, k3, k4});
        if (c != complex{}) row += c * u[k3] * std::conj(u[k4]);
      }
      total += a * row;
    }
  return total;
}

inline TorusField direct_field(FunctionalTag tag, const TorusField& u) {
  const int n = u.max_mode();
  TorusField x(u.grid());
  for (int k = -n; k <= n; ++k) {
    complex g{};
    // k2 = k: sum g(k1,k,k3,k4) u1 u3 conj(u4)
    for (int k1 = -n; k1 <= n; ++k1)
      for (int k3 = -n; k3 <= n; ++k3) {
        const int k4 = k1 - k + k3;
        if (k4 < -n || k4 > n) continue;
        const complex c = quartic_coefficient(tag, {k1, k, k3, k4});
        if (c != complex{}) g += c * u[k1] * u[k3] * std::conj(u[k4]);
      }
    // k4 = k: sum g(k1,k2,k3,k) u1 conj(u2) u3
    for (int k1 = -n; k1 <= n; ++k1)
      for (int k2 = -n; k2 <= n; ++k2) {
        const int k3 = k - k1 + k2;
        if (k3 < -n || k3 > n) continue;
        const complex c = quartic_coefficient(tag, {k1, k2, k3, k});
        if (c != complex{}) g += c * u[k1] * std::conj(u[k2]) * u[k3];
      }
    x[k] = complex(0.0, -2.0) * g;
  }
  return x;
}

// Pointwise products on the padded grid.
struct Grid {
  GridSpec spec;
  PhysicalField up, um, dup, dum;  // u_+, u_-, D0^{-1}u_+, D0^{-1}u_-
  complex mean;                    // (u|1)

  explicit Grid(const TorusField& u)
      : spec(u.grid()),
        up(to_physical(project_plus(u))),
        um(to_physical(project_minus(u))),
        dup(to_physical(apply_multiplier(project_plus(u), Multiplier::D0Inv))),
        dum(to_physical(apply_multiplier(project_minus(u), Multiplier::D0Inv))),
        mean(u[0]) {}

  template <class Fn>
  PhysicalField pointwise(Fn fn) const {
    PhysicalField out(up.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = fn(i);
    return out;
  }
  TorusField band(PhysicalField p) const { return from_physical(std::move(p), spec); }
};

inline double l2sq(const TorusField& f) {
  const double n = norm(f, NormKind::L2());
  return n * n;
}

inline double l4pow4(const TorusField& f) {
  const double n = norm(f, NormKind::L4());
  return n * n * n * n;
}

inline double closed_value(FunctionalTag tag, const TorusField& u) {
  const TorusField up = project_plus(u);
  const TorusField um = project_minus(u);
  switch (tag) {
    case FunctionalTag::H0:
      return h0_value(u);
    case FunctionalTag::R: {
      const double q = l2sq(u);
      return 0.25 * (l4pow4(u) - 2.0 * q * q);
    }
    case FunctionalTag::Rtilde: {
      const double qp = l2sq(up);
      const double qm = l2sq(um);
      const TorusField um2 = from_physical(
          [&] {
            PhysicalField p = to_physical(um);
            for (auto& x : p) x *= x;
            return p;
          }(),
          u.grid());
      return 0.25 * (l4pow4(up) + l4pow4(um)) + std::real(u[0] * inner(um, um2)) - 0.5 * (qp * qp + qm * qm);
    }
    case FunctionalTag::F: {
      const Grid g(u);
      const TorusField dum = apply_multiplier(um, Multiplier::D0Inv);
      const TorusField dup = apply_multiplier(up, Multiplier::D0Inv);
      const TorusField cubic_p = cubic_term(up);
      const TorusField cubic_m = cubic_term(um);
      const TorusField abs_p = g.band(g.pointwise([&](std::size_t i) { return complex(std::norm(g.up[i])); }));
      const TorusField abs_m = g.band(g.pointwise([&](std::size_t i) { return complex(std::norm(g.um[i])); }));
      return 0.5 * std::imag(inner(dum, cubic_p)) - 0.5 * std::imag(inner(dup, cubic_m)) -
             0.5 * std::imag(inner(apply_multiplier(abs_p, Multiplier::D0Inv), abs_m));
    }
  }
  throw std::logic_error("functional_value: unknown tag");
}

inline TorusField closed_field(FunctionalTag tag, const TorusField& u) {
  const complex i1(0.0, 1.0);
  switch (tag) {
    case FunctionalTag::H0:
      return h0_field(u);
    case FunctionalTag::R: {
      TorusField x = cubic_term(u) - (2.0 * l2sq(u)) * u;
      return -i1 * x;
    }
    case FunctionalTag::Rtilde: {
      const TorusField up = project_plus(u);
      const TorusField um = project_minus(u);
      const Grid g(u);
      const TorusField cp = cubic_term(up);
      const TorusField cm = cubic_term(um);
      const TorusField abs_m = g.band(g.pointwise([&](std::size_t i) { return complex(std::norm(g.um[i])); }));
      const TorusField sq_m = g.band(g.pointwise([&](std::size_t i) { return g.um[i] * g.um[i]; }));
      const complex c = g.mean;
      TorusField ix = project_plus(cp) + project_minus(cm) - (2.0 * l2sq(up)) * up - (2.0 * l2sq(um)) * um +
                      (2.0 * c) * project_minus(abs_m) + std::conj(c) * sq_m;
      ix[0] += cm[0];
      return -i1 * ix;
    }
    case FunctionalTag::F: {
      const Grid g(u);
      auto pplus = [&](PhysicalField p) { return project_plus(g.band(std::move(p))); };
      auto pminus = [&](PhysicalField p) { return project_minus(g.band(std::move(p))); };
      auto d0inv = [](const TorusField& f) { return apply_multiplier(f, Multiplier::D0Inv); };

      // D0^{-1} |u_-|^2 and D0^{-1} |u_+|^2 over the full padded spectrum.
      PhysicalField dabs_m = g.pointwise([&](std::size_t i) { return complex(std::norm(g.um[i])); });
      apply_multiplier_physical(dabs_m, Multiplier::D0Inv);
      PhysicalField dabs_p = g.pointwise([&](std::size_t i) { return complex(std::norm(g.up[i])); });
      apply_multiplier_physical(dabs_p, Multiplier::D0Inv);

      const TorusField t1 =
          -0.5 * (2.0 * pplus(g.pointwise([&](std::size_t i) { return g.dum[i] * std::norm(g.up[i]); })) -
                  d0inv(pminus(g.pointwise([&](std::size_t i) { return std::norm(g.up[i]) * g.up[i]; }))) -
                  pplus(g.pointwise([&](std::size_t i) { return std::conj(g.dum[i]) * g.up[i] * g.up[i]; })));
      const TorusField t2 =
          0.5 * (2.0 * pminus(g.pointwise([&](std::size_t i) { return g.dup[i] * std::norm(g.um[i]); })) -
                 d0inv(pplus(g.pointwise([&](std::size_t i) { return std::norm(g.um[i]) * g.um[i]; }))) -
                 pminus(g.pointwise([&](std::size_t i) { return std::conj(g.dup[i]) * g.um[i] * g.um[i]; })));
      const TorusField t3 = pminus(g.pointwise([&](std::size_t i) { return g.um[i] * dabs_p[i]; })) -
                            pplus(g.pointwise([&](std::size_t i) { return g.up[i] * dabs_m[i]; }));
      return t1 + t2 + t3;
    }
  }
  throw std::logic_error("vector_field: unknown tag");
}

}  // namespace detail

inline double functional_value(FunctionalTag tag, const TorusField& u, EvalMode mode) {
  if (mode == EvalMode::ClosedForm) return detail::closed_value(tag, u);
  detail::require_direct_size(u, "functional_value");
  if (tag == FunctionalTag::H0) return detail::h0_value(u);
  return detail::direct_value(tag, u).real();
}

/// Imaginary part of the DirectSum quadruple sum, which vanishes for real functionals.
inline double functional_imaginary_part(FunctionalTag tag, const TorusField& u) {
  detail::require_direct_size(u, "functional_imaginary_part");
  if (tag == FunctionalTag::H0) return 0.0;
  return detail::direct_value(tag, u).imag();
}

inline TorusField vector_field(FunctionalTag tag, const TorusField& u, EvalMode mode) {
  if (mode == EvalMode::ClosedForm) return detail::closed_field(tag, u);
  detail::require_direct_size(u, "vector_field");
  if (tag == FunctionalTag::H0) return detail::h0_field(u);
  return detail::direct_field(tag, u);
}

/// {A,B}(u) = Im((X_A(u)|X_B(u))).
inline double poisson_bracket(FunctionalTag a, FunctionalTag b, const TorusField& u,
                              EvalMode mode = EvalMode::ClosedForm) {
  return std::imag(inner(vector_field(a, u, mode), vector_field(b, u, mode)));
}

enum class FlowDirection { Forward, Backward };

struct ChiFlowOptions {
  int substeps = 16;
  double smallness = 0.1;  // bound on eps * ||u||_{B^1_{1,1}}
  EvalMode mode = EvalMode::ClosedForm;
};

/// Time-sigma map of d(phi)/d(sigma) = eps^2 X_F(phi) by RK4. Checks only finiteness.
inline TorusField phi_flow(const TorusField& u, double eps, double sigma, const ChiFlowOptions& opts = {}) {
  if (opts.substeps < 1) throw std::invalid_argument("phi_flow: substeps must be >= 1");
  if (eps == 0.0 || sigma == 0.0) return u;
  const double scale = eps * eps;
  const double h = sigma / static_cast<double>(opts.substeps);
  auto field = [&](const TorusField& v) { return scale * vector_field(FunctionalTag::F, v, opts.mode); };
  TorusField v = u;
  for (int i = 0; i < opts.substeps; ++i) {
    const TorusField a = field(v);
    const TorusField b = field(v + (0.5 * h) * a);
    const TorusField c = field(v + (0.5 * h) * b);
    const TorusField d = field(v + h * c);
    v += (h / 6.0) * (a + 2.0 * b + 2.0 * c + d);
    if (!v.all_finite()) throw numerical_error("phi_flow: non-finite state");
  }
  return v;
}

inline void require_small(const TorusField& u, double eps, double threshold, const char* what) {
  const double size = std::abs(eps) * norm(u, NormKind::B111());
  if (size > threshold)
    throw std::domain_error(std::string(what) + ": eps * ||u||_B111 = " + std::to_string(size) +
                            " exceeds " + std::to_string(threshold));
}

/// chi_eps = exp(eps^2 X_F) or its inverse.
inline TorusField chi_flow(const TorusField& u, double eps, FlowDirection dir, const ChiFlowOptions& opts = {}) {
  require_small(u, eps, opts.smallness, "chi_flow");
  return phi_flow(u, eps, dir == FlowDirection::Forward ? 1.0 : -1.0, opts);
}

/// |H_eps(chi_eps(u)) - H0(u) - eps^2 Rtilde(u)| with H_eps = H0 + eps^2 R.
inline double taylor_residual(const TorusField& u, double eps, const ChiFlowOptions& opts = {}) {
  const TorusField v = chi_flow(u, eps, FlowDirection::Forward, opts);
  const double e2 = eps * eps;
  const double lhs = functional_value(FunctionalTag::H0, v, EvalMode::ClosedForm) +
                     e2 * functional_value(FunctionalTag::R, v, EvalMode::ClosedForm);
  const double rhs_value = functional_value(FunctionalTag::H0, u, EvalMode::ClosedForm) +
                           e2 * functional_value(FunctionalTag::Rtilde, u, EvalMode::ClosedForm);
  return std::abs(lhs - rhs_value);
}

inline constexpr int resonance_max_box = 40;

/// All zero-sum, zero-phase quadruples with |k_j| <= K, by brute force.
inline std::vector<QuadrupleKey> enumerate_resonances(int K) {
  if (K < 0 || K > resonance_max_box)
    throw std::invalid_argument("enumerate_resonances: K must lie in [0, " + std::to_string(resonance_max_box) + "]");
  std::vector<QuadrupleKey> out;
  for (int k1 = -K; k1 <= K; ++k1)
    for (int k2 = -K; k2 <= K; ++k2)
      for (int k3 = -K; k3 <= K; ++k3) {
        const int k4 = k1 - k2 + k3;
        if (k4 < -K || k4 > K) continue;
        const QuadrupleKey q{k1, k2, k3, k4};
        if (phase(q) == 0) out.push_back(q);
      }
  return out;
}

/// Zero-sum quadruples with |k_j| <= K generated from the four cases directly.
inline std::set<QuadrupleKey> resonances_by_case(int K) {
  if (K < 0 || K > resonance_max_box)
    throw std::invalid_argument("resonances_by_case: K must lie in [0, " + std::to_string(resonance_max_box) + "]");
  std::set<QuadrupleKey> out;
  auto one_signed = [&](int sign) {
    for (int a = 0; a <= K; ++a)
      for (int b = 0; b <= K; ++b)
        for (int c = 0; c <= K; ++c) {
          const int d = a - b + c;
          if (d < 0 || d > K) continue;
          out.insert({sign * a, sign * b, sign * c, sign * d});
        }
  };
  one_signed(1);
  one_signed(-1);
  for (int a = -K; a <= K; ++a)
    for (int b = -K; b <= K; ++b) {
      out.insert({a, a, b, b});
      out.insert({a, b, b, a});
    }
  return out;
}

}  // namespace halfwave
