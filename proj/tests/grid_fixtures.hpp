#pragma once

// Grid-set fixtures shared by the sobolev suite and the acceptance runner.

#include <array>

#include "ergolab/rng.hpp"
#include "ergolab/sobolev.hpp"

namespace fixtures {

using namespace ergolab;

inline GridSet disk_set(double radius, double res, double box = 2.0) {
  return make_grid_set({-box, -box}, {box, box}, res, [&](double x, double y) {
    return x * x + y * y <= radius * radius;
  });
}

// Multi-scale dust: disjoint disks of dyadic radii r_k = 0.2 * 2^-k with total
// volume per scale ~ 2^{-k s}. Points inside scale-k disks stop being density
// points once delta exceeds r_k, so the complement measure of A_{delta,
// 1-delta^s} decays like delta^s; a single smooth disk decays like delta and
// cannot exhibit the critical rate.
inline GridSet dyadic_dust(double s_build = 0.25, int kmax = 6, double res = 1024) {
  RngStream rng(77);
  std::vector<std::array<double, 3>> disks;
  const double r0 = 0.2, v0 = 0.08;
  for (int k = 0; k <= kmax; ++k) {
    double rk = r0 * std::pow(2.0, -k);
    double vk = v0 * std::pow(2.0, -k * s_build);
    int nk = std::max(1, static_cast<int>(std::lround(vk / (3.14159265358979 * rk * rk))));
    for (int i = 0; i < nk; ++i)
      for (int attempt = 0; attempt < 2000; ++attempt) {
        double x = rng.uniform(-0.95, 0.95), y = rng.uniform(-0.95, 0.95);
        bool ok = true;
        for (const auto& d : disks)
          if (std::hypot(x - d[0], y - d[1]) < 2.0 * (d[2] + rk)) {
            ok = false;
            break;
          }
        if (ok) {
          disks.push_back({x, y, rk});
          break;
        }
      }
  }
  return make_grid_set({-1.3, -1.3}, {1.3, 1.3}, res, [disks](double x, double y) {
    for (const auto& d : disks) {
      double dx = x - d[0], dy = y - d[1];
      if (dx * dx + dy * dy <= d[2] * d[2]) return true;
    }
    return false;
  });
}

} // namespace fixtures
