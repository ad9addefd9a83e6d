#pragma once

// Least-squares line fit and basic sample statistics shared by the reports.

#include <cmath>
#include <cstddef>
#include <vector>

#include "ergolab/linalg.hpp"

namespace ergolab {

struct LineFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
  bool degenerate = false; // fewer than two usable points or zero variance in x
};

inline LineFit fit_line(const Vec& x, const Vec& y) {
  LineFit f;
  const std::size_t n = x.size();
  if (n < 2) {
    f.degenerate = true;
    return f;
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx < 1e-30) {
    f.degenerate = true;
    return f;
  }
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (syy < 1e-30) {
    f.r2 = 1.0;
  } else {
    double ss_res = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double e = y[i] - (f.intercept + f.slope * x[i]);
      ss_res += e * e;
    }
    f.r2 = 1.0 - ss_res / syy;
  }
  return f;
}

struct SampleStats {
  double mean = 0;
  double variance = 0; // unbiased
  double se = 0;       // standard error of the mean
  std::size_t n = 0;
};

inline SampleStats sample_stats(const Vec& values) {
  SampleStats s;
  s.n = values.size();
  if (s.n == 0) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(s.n);
  if (s.n > 1) {
    for (double v : values) s.variance += (v - s.mean) * (v - s.mean);
    s.variance /= static_cast<double>(s.n - 1);
    s.se = std::sqrt(s.variance / static_cast<double>(s.n));
  }
  return s;
}

} // namespace ergolab
