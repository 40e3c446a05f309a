#pragma once

// Reference solutions that do not go through the spectral solver: exact
// single-mode solutions, and a brute-force Galerkin integrator (explicit
// midpoint, direct convolutions, no FFT).

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "halfwave/dynamics.hpp"
#include "halfwave/field.hpp"

namespace halfwave {

struct PlaneWaveSpec {
  complex amplitude{1.0};
  int mode = 0;
  EvolutionProblem problem = problems::HalfWave{};
};

namespace detail {

inline bool is_szego(const EvolutionProblem& p) {
  return std::holds_alternative<problems::SzegoPlain>(p) || std::holds_alternative<problems::SzegoTransport>(p);
}

// Frequency of c e^{ikx} along each flow.
inline double plane_wave_frequency(const EvolutionProblem& p, int k, double a2) {
  using namespace problems;
  const double ak = std::abs(static_cast<double>(k));
  return std::visit(
      [&](const auto& q) -> double {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, HalfWave>) return ak + a2;
        if constexpr (std::is_same_v<T, HalfWaveScaled>) return ak + q.eps * q.eps * a2;
        if constexpr (std::is_same_v<T, HalfWaveGauged>) return ak + q.eps * q.eps * (a2 - 2.0 * q.q0);
        if constexpr (std::is_same_v<T, SzegoPlain>) return a2;
        if constexpr (std::is_same_v<T, SzegoTransport>)
          return static_cast<double>(k) + q.eps * q.eps * (a2 - 2.0 * q.q0);
        if constexpr (std::is_same_v<T, FreeHalfWave>) return ak;
      },
      p);
}

}  // namespace detail

inline void validate(const PlaneWaveSpec& s) {
  validate(s.problem);
  if (detail::is_szego(s.problem) && s.mode < 0)
    throw std::invalid_argument("PlaneWaveSpec: Szego plane waves need mode >= 0");
}

/// c e^{ikx} e^{-i w t} on the given grid.
inline TorusField plane_wave_solution(const PlaneWaveSpec& s, GridSpec grid, double t) {
  validate(s);
  if (s.mode < -grid.max_mode || s.mode > grid.max_mode)
    throw std::invalid_argument("plane_wave_solution: mode " + std::to_string(s.mode) + " outside the band");
  const double w = detail::plane_wave_frequency(s.problem, s.mode, std::norm(s.amplitude));
  return TorusField::single_mode(grid, s.mode, s.amplitude * std::polar(1.0, -w * t));
}

inline constexpr int galerkin_max_mode = 32;

namespace detail {

struct GalerkinModel {
  int n;
  std::vector<double> freq;  // index k + n
  double coupling;
  bool project_plus;
};

inline GalerkinModel galerkin_model(const EvolutionProblem& p, int n) {
  using namespace problems;
  GalerkinModel m{n, std::vector<double>(static_cast<std::size_t>(2 * n + 1)), 0.0, false};
  for (int k = -n; k <= n; ++k) {
    const double ak = std::abs(static_cast<double>(k));
    m.freq[static_cast<std::size_t>(k + n)] = std::visit(
        [&](const auto& q) -> double {
          using T = std::decay_t<decltype(q)>;
          if constexpr (std::is_same_v<T, HalfWaveGauged>) return ak - 2.0 * q.eps * q.eps * q.q0;
          if constexpr (std::is_same_v<T, SzegoPlain>) return 0.0;
          if constexpr (std::is_same_v<T, SzegoTransport>) return static_cast<double>(k) - 2.0 * q.eps * q.eps * q.q0;
          return ak;
        },
        p);
  }
  std::visit(
      [&](const auto& q) {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, HalfWave> || std::is_same_v<T, SzegoPlain>) m.coupling = 1.0;
        if constexpr (requires { q.eps; }) m.coupling = q.eps * q.eps;
        m.project_plus = std::is_same_v<T, SzegoPlain> || std::is_same_v<T, SzegoTransport>;
      },
      p);
  return m;
}

// du/dt with |u|^2 u from two direct convolutions: rho = u * conj(u), then rho * u.
inline std::vector<complex> galerkin_rhs(const GalerkinModel& m, const std::vector<complex>& u) {
  const int n = m.n;
  std::vector<complex> rho(static_cast<std::size_t>(4 * n + 1));
  if (m.coupling != 0.0)
    for (int a = -n; a <= n; ++a) {
      const complex ua = u[static_cast<std::size_t>(a + n)];
      if (ua == complex{}) continue;
      for (int b = -n; b <= n; ++b)
        rho[static_cast<std::size_t>(a - b + 2 * n)] += ua * std::conj(u[static_cast<std::size_t>(b + n)]);
    }
  std::vector<complex> out(u.size());
  for (int k = -n; k <= n; ++k) {
    complex s{};
    if (m.coupling != 0.0 && !(m.project_plus && k < 0))
      for (int j = -n; j <= n; ++j) {
        const int d = k - j;
        if (d < -2 * n || d > 2 * n) continue;
        s += rho[static_cast<std::size_t>(d + 2 * n)] * u[static_cast<std::size_t>(j + n)];
      }
    const auto i = static_cast<std::size_t>(k + n);
    out[i] = complex(0.0, -1.0) * (m.freq[i] * u[i] + m.coupling * s);
  }
  return out;
}

}  // namespace detail

/// Explicit midpoint on the coefficient ODE. The step is t_end / round(t_end / dt).
inline TorusField galerkin_reference(const EvolutionProblem& problem, const TorusField& u0, double t_end, double dt) {
  validate(problem);
  const int n = u0.max_mode();
  if (n > galerkin_max_mode)
    throw std::invalid_argument("galerkin_reference: N must be <= " + std::to_string(galerkin_max_mode));
  if (!(dt > 0.0) || dt > 0.1 / n)
    throw std::invalid_argument("galerkin_reference: dt must lie in (0, 0.1/N]");
  if (!(t_end >= 0.0)) throw std::invalid_argument("galerkin_reference: t_end must be >= 0");

  const detail::GalerkinModel model = detail::galerkin_model(problem, n);
  const long steps = t_end == 0.0 ? 0 : std::max(1L, std::lround(t_end / dt));
  const double h = steps > 0 ? t_end / static_cast<double>(steps) : dt;

  std::vector<complex> u(u0.coefficients().begin(), u0.coefficients().end());
  std::vector<complex> mid(u.size());
  for (long s = 0; s < steps; ++s) {
    const auto k1 = detail::galerkin_rhs(model, u);
    for (std::size_t i = 0; i < u.size(); ++i) mid[i] = u[i] + 0.5 * h * k1[i];
    const auto k2 = detail::galerkin_rhs(model, mid);
    for (std::size_t i = 0; i < u.size(); ++i) {
      u[i] += h * k2[i];
      if (!std::isfinite(u[i].real()) || !std::isfinite(u[i].imag()))
        throw numerical_error("galerkin_reference: non-finite state after t = " +
                              std::to_string(static_cast<double>(s) * h));
    }
  }
  return TorusField(u0.grid(), std::move(u));
}

}  // namespace halfwave
