#pragma once

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace halfwave {

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double standard_error = 0.0;
  std::pair<double, double> interval{0.0, 0.0};
};

struct FitPoint {
  double x = 0.0;
  double y = 0.0;
};

/// Least-squares slope of log y against log x, with a two-sided Student-t
/// interval at the given confidence level.
inline SlopeFit fit_loglog_slope(std::span<const FitPoint> rows, double confidence = 0.95) {
  if (rows.size() < 3) throw std::invalid_argument("fit_loglog_slope: need at least 3 rows");
  if (!(confidence > 0.0 && confidence < 1.0)) throw std::invalid_argument("fit_loglog_slope: confidence must be in (0,1)");
  const auto n = static_cast<double>(rows.size());
  double mx = 0.0, my = 0.0;
  for (const auto& r : rows) {
    if (!(r.x > 0.0) || !(r.y > 0.0)) throw std::invalid_argument("fit_loglog_slope: rows must be positive");
    mx += std::log(r.x);
    my += std::log(r.y);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& r : rows) {
    const double dx = std::log(r.x) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(r.y) - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_loglog_slope: all x values coincide");

  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (const auto& r : rows) {
    const double e = std::log(r.y) - (fit.intercept + fit.slope * std::log(r.x));
    ssr += e * e;
  }
  fit.standard_error = std::sqrt(ssr / (n - 2.0) / sxx);
  const boost::math::students_t dist(n - 2.0);
  const double t = boost::math::quantile(boost::math::complement(dist, 0.5 * (1.0 - confidence)));
  fit.interval = {fit.slope - t * fit.standard_error, fit.slope + t * fit.standard_error};
  return fit;
}

inline SlopeFit fit_loglog_slope(const std::vector<FitPoint>& rows, double confidence = 0.95) {
  return fit_loglog_slope(std::span<const FitPoint>(rows), confidence);
}

}  // namespace halfwave
