#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace eprsim::testing {

inline double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

inline double sample_variance(const std::vector<double>& xs) {
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(xs.size() - 1);
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

inline LineFit least_squares(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
    syy += ys[i] * ys[i];
  }
  const double dn = static_cast<double>(n);
  const double cov = sxy - sx * sy / dn;
  const double vx = sxx - sx * sx / dn;
  const double vy = syy - sy * sy / dn;
  LineFit fit;
  fit.slope = cov / vx;
  fit.intercept = (sy - fit.slope * sx) / dn;
  fit.r_squared = vy > 0 ? (cov * cov) / (vx * vy) : 1.0;
  return fit;
}

inline double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  const LineFit f = least_squares(xs, ys);
  return (f.slope < 0 ? -1.0 : 1.0) * std::sqrt(f.r_squared);
}

// Exact moments of the geometric distribution on {1, 2, ...} with success
// probability p, summed from the pmf until the tail is negligible. Serves as
// an oracle independent of any closed form used elsewhere.
struct GeometricMoments {
  double mean = 0.0;
  double variance = 0.0;
  double fourth_central = 0.0;
};

inline GeometricMoments geometric_moments(double p) {
  GeometricMoments m;
  double q = 1.0;    // probability of reaching attempt k
  double pk = 0.0;   // pmf at k
  // first pass for the mean
  for (long long k = 1; q > 1e-18; ++k) {
    pk = q * p;
    m.mean += pk * static_cast<double>(k);
    q *= (1.0 - p);
  }
  q = 1.0;
  for (long long k = 1; q > 1e-18; ++k) {
    pk = q * p;
    const double d = static_cast<double>(k) - m.mean;
    m.variance += pk * d * d;
    m.fourth_central += pk * d * d * d * d;
    q *= (1.0 - p);
  }
  return m;
}

} // namespace eprsim::testing
