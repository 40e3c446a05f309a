#pragma once

// Time integration of the half-wave family and the cubic Szego flows.
//
// Every problem has the form du/dt = -i w_k u_k - i g P(|u|^2 u) with a real
// diagonal frequency w_k, a coupling g and P either the identity or Pi_+.
// IFRK4 treats the diagonal part exactly (Lawson integrating factor) and runs
// classical RK4 on the transformed nonlinearity. Explicit midpoint on the full
// right-hand side is kept as a low-order cross-check.

#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "halfwave/field.hpp"
#include "halfwave/hankel.hpp"
#include "halfwave/spectral.hpp"

namespace halfwave {

namespace problems {

/// i u_t - |D|u = |u|^2 u
struct HalfWave {};
/// i u_t - |D|u = eps^2 |u|^2 u
struct HalfWaveScaled {
  double eps;
};
/// i u_t - |D|u = eps^2 (|u|^2 - 2 q0) u, with q0 standing for the conserved ||u||^2.
struct HalfWaveGauged {
  double eps;
  double q0;
};
/// i w_t = Pi_+(|w|^2 w)
struct SzegoPlain {};
/// i v_t - Dv = eps^2 (Pi_+(|v|^2 v) - 2 q0 v); eps = 1, q0 = 0 is the transport form.
struct SzegoTransport {
  double eps;
  double q0;
};
/// i u_t - |D|u = 0
struct FreeHalfWave {};

}  // namespace problems

using EvolutionProblem =
    std::variant<problems::HalfWave, problems::HalfWaveScaled, problems::HalfWaveGauged,
                 problems::SzegoPlain, problems::SzegoTransport, problems::FreeHalfWave>;

inline std::string problem_name(const EvolutionProblem& p) {
  static const char* names[] = {"HalfWave",   "HalfWaveScaled", "HalfWaveGauged",
                                "SzegoPlain", "SzegoTransport", "FreeHalfWave"};
  return names[p.index()];
}

inline void validate(const EvolutionProblem& p) {
  std::visit(
      [](const auto& q) {
        using T = std::decay_t<decltype(q)>;
        if constexpr (requires { q.eps; }) {
          if (!(q.eps > 0.0)) throw std::invalid_argument(std::string("eps must be > 0"));
        }
        if constexpr (requires { q.q0; }) {
          if (!(q.q0 >= 0.0)) throw std::invalid_argument(std::string("q0 must be >= 0"));
        }
        (void)sizeof(T);
      },
      p);
}

enum class LinearPart { None, AbsD, D };

struct ProblemTraits {
  LinearPart linear = LinearPart::None;
  double shift = 0.0;     // added to the frequency of every mode
  double coupling = 0.0;  // g in front of the cubic term
  bool project_plus = false;
  double eps = 1.0;  // scale of the nonlinear time, 1 for unscaled problems
};

inline ProblemTraits traits(const EvolutionProblem& p) {
  using namespace problems;
  return std::visit(
      [](const auto& q) -> ProblemTraits {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, HalfWave>) return {LinearPart::AbsD, 0.0, 1.0, false, 1.0};
        if constexpr (std::is_same_v<T, HalfWaveScaled>)
          return {LinearPart::AbsD, 0.0, q.eps * q.eps, false, q.eps};
        if constexpr (std::is_same_v<T, HalfWaveGauged>)
          return {LinearPart::AbsD, -2.0 * q.eps * q.eps * q.q0, q.eps * q.eps, false, q.eps};
        if constexpr (std::is_same_v<T, SzegoPlain>) return {LinearPart::None, 0.0, 1.0, true, 1.0};
        if constexpr (std::is_same_v<T, SzegoTransport>)
          return {LinearPart::D, -2.0 * q.eps * q.eps * q.q0, q.eps * q.eps, true, q.eps};
        if constexpr (std::is_same_v<T, FreeHalfWave>) return {LinearPart::AbsD, 0.0, 0.0, false, 1.0};
      },
      p);
}

inline double linear_frequency(const ProblemTraits& t, int k) {
  switch (t.linear) {
    case LinearPart::None:
      return t.shift;
    case LinearPart::AbsD:
      return std::abs(static_cast<double>(k)) + t.shift;
    case LinearPart::D:
      return static_cast<double>(k) + t.shift;
  }
  return t.shift;
}

namespace detail {

inline TorusField nonlinear_part(const ProblemTraits& t, const TorusField& u) {
  if (t.coupling == 0.0) return TorusField(u.grid());
  TorusField c = cubic_term(u);
  if (t.project_plus) c = project_plus(c);
  c *= complex(0.0, -t.coupling);
  return c;
}

}  // namespace detail

/// du/dt for the tagged equation.
inline TorusField rhs(const EvolutionProblem& p, const TorusField& u) {
  const ProblemTraits t = traits(p);
  TorusField out = detail::nonlinear_part(t, u);
  for (int k = -u.max_mode(); k <= u.max_mode(); ++k)
    out[k] += complex(0.0, -linear_frequency(t, k)) * u[k];
  return out;
}

/// e^{2 i t eps^2 q0} u: removes the diagonal resonances of the scaled equation.
inline TorusField gauge_transform(const TorusField& u, double t, double eps, double q0) {
  return std::polar(1.0, 2.0 * t * eps * eps * q0) * u;
}

/// The Hamiltonian conserved by each flow. The gauged and transport problems
/// use H0 + eps^2 R with R = (||u||_4^4 - 2||u||_2^4)/4, which differs from the
/// exact Hamiltonian of the q0-shifted flow by a function of the conserved charge.
inline double energy(const EvolutionProblem& p, const TorusField& u) {
  using namespace problems;
  const double l4 = norm(u, NormKind::L4());
  const double quartic = l4 * l4 * l4 * l4;
  const double q = norm(u, NormKind::L2()) * norm(u, NormKind::L2());
  double h0 = 0.0;
  double m = 0.0;
  for (int k = -u.max_mode(); k <= u.max_mode(); ++k) {
    h0 += 0.5 * std::abs(static_cast<double>(k)) * std::norm(u[k]);
    m += 0.5 * static_cast<double>(k) * std::norm(u[k]);
  }
  return std::visit(
      [&](const auto& pr) -> double {
        using T = std::decay_t<decltype(pr)>;
        if constexpr (std::is_same_v<T, HalfWave>) return h0 + 0.25 * quartic;
        if constexpr (std::is_same_v<T, HalfWaveScaled>) return h0 + 0.25 * pr.eps * pr.eps * quartic;
        if constexpr (std::is_same_v<T, HalfWaveGauged>)
          return h0 + pr.eps * pr.eps * 0.25 * (quartic - 2.0 * q * q);
        if constexpr (std::is_same_v<T, SzegoPlain>) return 0.25 * quartic;
        if constexpr (std::is_same_v<T, SzegoTransport>)
          return m + pr.eps * pr.eps * 0.25 * (quartic - 2.0 * q * q);
        if constexpr (std::is_same_v<T, FreeHalfWave>) return h0;
      },
      p);
}

/// min(0.01, 0.1 / (eps^2 max(1, ||u0||_{B^1}^2))).
inline double default_dt(const EvolutionProblem& p, const TorusField& u0) {
  const double eps = traits(p).eps;
  const double b = norm(u0, NormKind::B111());
  return std::min(0.01, 0.1 / (eps * eps * std::max(1.0, b * b)));
}

enum class Scheme { IFRK4, Midpoint };

struct StepperConfig {
  double dt = 0.01;
  Scheme scheme = Scheme::IFRK4;
  int monitor_stride = 100;
};

struct InvariantRecord {
  double time = 0.0;
  double energy = 0.0;
  double charge = 0.0;
  double momentum = 0.0;
  double b111 = 0.0;
  double hs = 0.0;
  std::optional<double> hankel_trace;
};

using Observer = std::function<void(double time, const TorusField& state)>;

struct MonitorOptions {
  double sobolev = 1.0;
  bool hankel_trace = false;
  bool invariants = true;
  std::vector<Observer> observers;
};

inline InvariantRecord record_invariants(const EvolutionProblem& p, double t, const TorusField& u,
                                         const MonitorOptions& opts) {
  InvariantRecord r;
  r.time = t;
  r.energy = energy(p, u);
  const double l2 = norm(u, NormKind::L2());
  r.charge = l2 * l2;
  r.momentum = norm(u, NormKind::Momentum());
  r.b111 = norm(u, NormKind::B111());
  r.hs = norm(u, NormKind::Hs(opts.sobolev));
  if (opts.hankel_trace) r.hankel_trace = spectral_summary(u).trace_norm;
  return r;
}

/// Thrown when the discrete state stops being finite.
class blowup_error : public numerical_error {
 public:
  blowup_error(double last_valid_time, TorusField last_state)
      : numerical_error("non-finite state after t = " + std::to_string(last_valid_time)),
        last_valid_time_(last_valid_time),
        last_state_(std::move(last_state)) {}
  double last_valid_time() const { return last_valid_time_; }
  const TorusField& last_state() const { return last_state_; }

 private:
  double last_valid_time_;
  TorusField last_state_;
};

/// Fixed-step integrator holding the state of one run.
class Integrator {
 public:
  Integrator(EvolutionProblem problem, TorusField u0, double dt, Scheme scheme = Scheme::IFRK4)
      : problem_(problem), traits_(traits(problem)), u_(std::move(u0)), dt_(dt), scheme_(scheme) {
    validate(problem_);
    if (!(dt_ > 0.0)) throw std::invalid_argument("Integrator: dt must be > 0");
    const int n = u_.max_mode();
    half_phase_.resize(static_cast<std::size_t>(2 * n + 1));
    full_phase_.resize(half_phase_.size());
    for (int k = -n; k <= n; ++k) {
      const double w = linear_frequency(traits_, k);
      half_phase_[static_cast<std::size_t>(k + n)] = std::polar(1.0, -0.5 * w * dt_);
      full_phase_[static_cast<std::size_t>(k + n)] = std::polar(1.0, -w * dt_);
    }
  }

  const TorusField& state() const { return u_; }
  double time() const { return time_; }
  double dt() const { return dt_; }
  long steps_taken() const { return steps_; }
  const EvolutionProblem& problem() const { return problem_; }

  void step() {
    TorusField next = scheme_ == Scheme::IFRK4 ? ifrk4_step() : midpoint_step();
    if (!next.all_finite()) throw blowup_error(time_, u_);
    u_ = std::move(next);
    ++steps_;
    time_ = static_cast<double>(steps_) * dt_;
  }

 private:
  TorusField phase(const TorusField& f, const std::vector<complex>& e) const {
    TorusField out(f.grid());
    auto src = f.coefficients();
    auto dst = out.coefficients();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = e[i] * src[i];
    return out;
  }

  TorusField ifrk4_step() const {
    const double h = dt_;
    const TorusField k1 = detail::nonlinear_part(traits_, u_);
    const TorusField k2 = detail::nonlinear_part(traits_, phase(u_ + (0.5 * h) * k1, half_phase_));
    const TorusField eu = phase(u_, half_phase_);
    const TorusField k3 = detail::nonlinear_part(traits_, eu + (0.5 * h) * k2);
    const TorusField k4 = detail::nonlinear_part(traits_, phase(eu, half_phase_) + h * phase(k3, half_phase_));

    TorusField out(u_.grid());
    auto o = out.coefficients();
    auto u = u_.coefficients();
    auto a = k1.coefficients();
    auto b = k2.coefficients();
    auto c = k3.coefficients();
    auto d = k4.coefficients();
    for (std::size_t i = 0; i < o.size(); ++i) {
      const complex e = half_phase_[i];
      const complex e2 = full_phase_[i];
      o[i] = e2 * u[i] + (h / 6.0) * (e2 * a[i] + 2.0 * e * (b[i] + c[i]) + d[i]);
    }
    return out;
  }

  TorusField midpoint_step() const {
    const TorusField mid = u_ + (0.5 * dt_) * rhs(problem_, u_);
    return u_ + dt_ * rhs(problem_, mid);
  }

  EvolutionProblem problem_;
  ProblemTraits traits_;
  TorusField u_;
  double dt_;
  Scheme scheme_;
  double time_ = 0.0;
  long steps_ = 0;
  std::vector<complex> half_phase_;
  std::vector<complex> full_phase_;
};

struct Trajectory {
  TorusField state;
  std::vector<InvariantRecord> records;
};

/// Number of steps used to reach t_end: the step is t_end / round(t_end / dt)
/// so that the run lands exactly on t_end.
inline long step_count(double t_end, double dt) {
  if (t_end == 0.0) return 0;
  return std::max(1L, std::lround(t_end / dt));
}

/// Integrates to t_end. Invariants and observers are sampled at t = 0, every
/// monitor_stride steps and at t_end.
inline Trajectory evolve(const EvolutionProblem& problem, const TorusField& u0, double t_end,
                         const StepperConfig& cfg, const MonitorOptions& monitors = {}) {
  if (!(t_end >= 0.0)) throw std::invalid_argument("evolve: t_end must be >= 0");
  if (cfg.monitor_stride < 1) throw std::invalid_argument("evolve: monitor_stride must be >= 1");
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("evolve: dt must be > 0");
  const long n = step_count(t_end, cfg.dt);
  const double dt = n > 0 ? t_end / static_cast<double>(n) : cfg.dt;
  Integrator integ(problem, u0, dt, cfg.scheme);

  Trajectory out{u0, {}};
  auto sample = [&] {
    if (monitors.invariants) out.records.push_back(record_invariants(problem, integ.time(), integ.state(), monitors));
    for (const auto& obs : monitors.observers) obs(integ.time(), integ.state());
  };
  sample();
  for (long i = 1; i <= n; ++i) {
    integ.step();
    if (i % cfg.monitor_stride == 0 || i == n) sample();
  }
  out.state = integ.state();
  return out;
}

}  // namespace halfwave
