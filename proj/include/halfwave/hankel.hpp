#pragma once

// Finite sections of the Hankel operator H_w(h) = Pi_+(w conj(h)).
//
// In coefficients (H_w h)_j = sum_k w_{j+k} conj(h_k), so the section is the
// symmetric matrix Gamma[j][k] = w_{j+k}. The operator is antilinear; its
// spectral data is read off the linear composite H_w^2 = Gamma conj(Gamma),
// which is Hermitian positive semidefinite because Gamma is symmetric.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "halfwave/field.hpp"
#include "halfwave/spectral.hpp"

namespace halfwave {

class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct HankelTruncation {
  int size = 0;
  Eigen::MatrixXcd gamma;
  // Set when the symbol had nonzero negative modes; they are ignored.
  bool ignored_negative_modes = false;
};

struct SpectralSummary {
  std::vector<double> singular_values;  // nonincreasing
  double trace_norm = 0.0;
  std::vector<double> hw2_eigenvalues;  // nonincreasing
  // Largest relative mismatch between hw2_eigenvalues and squared singular values.
  double cross_check = 0.0;
};

inline constexpr double hankel_noise_floor = 1e-13;

inline HankelTruncation build_hankel(const TorusField& w, int size) {
  if (size < 1) throw std::invalid_argument("build_hankel: size must be >= 1");
  HankelTruncation h;
  h.size = size;
  h.gamma = Eigen::MatrixXcd::Zero(size, size);
  for (int k = 1; k <= w.max_mode(); ++k)
    if (w[-k] != complex{}) h.ignored_negative_modes = true;
  for (int j = 0; j < size; ++j)
    for (int k = 0; k < size; ++k)
      if (j + k <= w.max_mode()) h.gamma(j, k) = w[j + k];
  return h;
}

/// Section of size N+1, which is exact for a band-limited symbol.
inline HankelTruncation build_hankel(const TorusField& w) { return build_hankel(w, w.max_mode() + 1); }

inline SpectralSummary spectral_summary(const HankelTruncation& h) {
  SpectralSummary out;
  if (h.size == 0) return out;

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(h.gamma);
  Eigen::VectorXd sv = svd.singularValues();

  const Eigen::MatrixXcd hw2 = h.gamma * h.gamma.conjugate();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(hw2, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success)
    throw numerical_error("spectral_summary: Hermitian eigensolver did not converge (size " +
                          std::to_string(h.size) + ")");

  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  out.singular_values.resize(static_cast<std::size_t>(sv.size()));
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    out.singular_values[static_cast<std::size_t>(i)] = sv(i) <= hankel_noise_floor * smax ? 0.0 : sv(i);

  // Eigen returns eigenvalues in increasing order.
  Eigen::VectorXd ev = eig.eigenvalues();
  const double emax = ev.size() > 0 ? std::max(ev(ev.size() - 1), 0.0) : 0.0;
  out.hw2_eigenvalues.resize(static_cast<std::size_t>(ev.size()));
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    const double e = ev(ev.size() - 1 - i);
    out.hw2_eigenvalues[static_cast<std::size_t>(i)] = e <= hankel_noise_floor * emax ? 0.0 : e;
  }

  double trace = 0.0;
  for (double s : out.singular_values) trace += s;
  out.trace_norm = trace;

  // Eigenvalues carry absolute error ~ eps * emax, so compare on that scale.
  double worst = 0.0;
  for (std::size_t i = 0; i < out.singular_values.size(); ++i) {
    const double sq = out.singular_values[i] * out.singular_values[i];
    const double scale = std::max(sq, emax * 1e-6);
    if (scale > 0.0) worst = std::max(worst, std::abs(sq - out.hw2_eigenvalues[i]) / scale);
  }
  out.cross_check = worst;
  if (worst > 1e-6)
    throw numerical_error("spectral_summary: singular values and H_w^2 eigenvalues disagree (" +
                          std::to_string(worst) + ")");
  return out;
}

inline SpectralSummary spectral_summary(const TorusField& w) { return spectral_summary(build_hankel(w)); }

/// Hankel trace norm over the B^1_{1,1} norm of the symbol.
inline double peller_ratio(const TorusField& w) {
  const double b = norm(w, NormKind::B111());
  if (b == 0.0) throw std::invalid_argument("peller_ratio: zero field");
  return spectral_summary(w).trace_norm / b;
}

}  // namespace halfwave
