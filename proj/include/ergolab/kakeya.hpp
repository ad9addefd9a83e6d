#pragma once

// Desk-scale verification of the curved multilinear Kakeya functional in its
// parametric form: d families of near-arclength polynomial curves, each family
// aligned with one leg of a transverse frame, rasterized occupancy counts
//   F_j(y) = sum_curves chi_{tube(curve, rho)}(y),
// and the functional  integral over B(0, delta) of  prod_j F_j^{p/(d-1)}.
//
// Rasterization marks candidate cells by walking each curve and stamping
// balls of radius rho + cell, then resolves each candidate with a Newton
// projection onto the curve seeded from the stamping parameter. Cells are
// accumulated sparsely and summed in sorted cell order, so results do not
// depend on scheduling.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "ergolab/common.hpp"
#include "ergolab/fit.hpp"
#include "ergolab/linalg.hpp"
#include "ergolab/rng.hpp"

namespace ergolab {

// polynomial curve t -> c0 + c1 t + c2 t^2 + c3 t^3 in R^d, domain [t_min, t_max]
struct PolyCurve {
  int dim = 2;
  std::array<Vec, 4> coef;
  double t_min = 0, t_max = 0;

  Vec eval(double t) const {
    Vec p(dim, 0.0);
    double tk = 1.0;
    for (int k = 0; k < 4; ++k) {
      if (!coef[k].empty())
        for (int i = 0; i < dim; ++i) p[i] += coef[k][i] * tk;
      tk *= t;
    }
    return p;
  }
  Vec deriv1(double t) const {
    Vec p(dim, 0.0);
    double tk = 1.0;
    for (int k = 1; k < 4; ++k) {
      if (!coef[k].empty())
        for (int i = 0; i < dim; ++i) p[i] += k * coef[k][i] * tk;
      tk *= t;
    }
    return p;
  }
  Vec deriv2(double t) const {
    Vec p(dim, 0.0);
    if (!coef[2].empty())
      for (int i = 0; i < dim; ++i) p[i] += 2 * coef[2][i];
    if (!coef[3].empty())
      for (int i = 0; i < dim; ++i) p[i] += 6 * coef[3][i] * t;
    return p;
  }
};

inline PolyCurve straight_curve(Vec base, Vec direction, double half_domain) {
  PolyCurve c;
  c.dim = static_cast<int>(base.size());
  c.coef[0] = std::move(base);
  c.coef[1] = std::move(direction);
  c.t_min = -half_domain;
  c.t_max = half_domain;
  return c;
}

struct TubeFamily {
  Vec direction; // unit vector v_j
  std::vector<PolyCurve> curves;
  Vec weights; // empty = counting measure

  double total_weight() const {
    if (weights.empty()) return static_cast<double>(curves.size());
    double s = 0;
    for (double w : weights) s += w;
    return s;
  }
  double weight(std::size_t i) const { return weights.empty() ? 1.0 : weights[i]; }
};

// ---------------------------------------------------------------------------
// Family invariants

struct FamilyInvariantReport {
  bool ok = true;
  double max_speed_defect = 0;  // max |speed - 1|
  double max_c2 = 0;            // max of |l|, |l'|, |l''| over the domain
  double max_alignment = 0;     // max angle(tangent, v_j)
  double frame_det = 0;         // |det(v_1 ... v_d)|
};

inline FamilyInvariantReport check_family_invariants(const std::vector<TubeFamily>& families,
                                                     double b1, double eps0, double theta,
                                                     int samples = 33) {
  FamilyInvariantReport rep;
  const int d = static_cast<int>(families.size());
  Matrix frame(d, d);
  for (int j = 0; j < d; ++j) frame.set_col(j, families[j].direction);
  rep.frame_det = std::abs(det(frame));
  if (rep.frame_det <= theta) rep.ok = false;
  for (const TubeFamily& fam : families) {
    for (const PolyCurve& c : fam.curves) {
      for (int s = 0; s < samples; ++s) {
        double t = c.t_min + (c.t_max - c.t_min) * s / (samples - 1);
        Vec p = c.eval(t), v = c.deriv1(t), a = c.deriv2(t);
        double speed = norm2(v);
        rep.max_speed_defect = std::max(rep.max_speed_defect, std::abs(speed - 1.0));
        rep.max_c2 = std::max({rep.max_c2, norm2(p), speed, norm2(a)});
        double cosang = dot(v, fam.direction) / speed;
        rep.max_alignment =
            std::max(rep.max_alignment, std::acos(std::min(1.0, std::abs(cosang))));
      }
    }
  }
  if (rep.max_speed_defect > 0.01 || rep.max_c2 > b1 || rep.max_alignment >= eps0)
    rep.ok = false;
  return rep;
}

// ---------------------------------------------------------------------------
// Family generation

struct TubeFamilyOptions {
  double b1 = 2.0;    // C^2 bound
  double eps0 = 0.25; // alignment bound (radians)
  int max_redraws = 10000;
};

inline std::vector<TubeFamily> make_tube_families(int d, double theta, double curvature_scale,
                                                  const std::vector<int>& counts, double delta,
                                                  std::uint64_t seed,
                                                  const TubeFamilyOptions& opts = {}) {
  if (d != 2 && d != 3) throw InvalidConfig("tube families require d in {2, 3}");
  if (theta <= 0 || theta >= 1) throw InvalidConfig("theta must lie in (0, 1)");
  if (static_cast<int>(counts.size()) != d) throw InvalidConfig("counts must have d entries");
  for (int c : counts)
    if (c < 1) throw InvalidConfig("counts must be >= 1");
  RngStream rng(seed, 0x6b616bULL);
  // frame with |det| > theta
  Matrix frame(d, d);
  int redraws = 0;
  for (;;) {
    for (int j = 0; j < d; ++j) frame.set_col(j, rng.unit_vector(d));
    if (std::abs(det(frame)) > theta) break;
    if (++redraws > opts.max_redraws)
      throw RejectionOverflow("could not sample a frame with |det| > theta");
  }
  std::vector<TubeFamily> families(d);
  for (int j = 0; j < d; ++j) {
    TubeFamily& fam = families[j];
    fam.direction = frame.col(j);
    while (static_cast<int>(fam.curves.size()) < counts[j]) {
      if (++redraws > opts.max_redraws)
        throw RejectionOverflow("curve rejection limit exceeded; parameters inconsistent");
      // base point uniform in the ball B(0, delta)
      Vec base(d);
      do {
        for (int i = 0; i < d; ++i) base[i] = rng.uniform(-delta, delta);
      } while (norm2(base) > delta);
      // bending orthogonal to the family direction
      auto orth_vec = [&](double scale) {
        Vec u = rng.unit_vector(d);
        double c = dot(u, fam.direction);
        axpy(-c, fam.direction, u);
        double n = norm2(u);
        if (n < 1e-6) return Vec(d, 0.0);
        return scaled(u, scale * rng.uniform01() / n);
      };
      PolyCurve c;
      c.dim = d;
      c.coef[0] = base;
      c.coef[1] = fam.direction;
      c.coef[2] = orth_vec(curvature_scale / 2.0);
      c.coef[3] = orth_vec(curvature_scale / 8.0);
      c.t_min = -4.0 * delta;
      c.t_max = 4.0 * delta;
      std::vector<TubeFamily> probe{TubeFamily{fam.direction, {c}, {}}};
      FamilyInvariantReport rep =
          check_family_invariants(probe, opts.b1, opts.eps0, 0.0);
      rep.ok = rep.max_speed_defect <= 0.01 && rep.max_c2 <= opts.b1 &&
               rep.max_alignment < opts.eps0;
      if (rep.ok) fam.curves.push_back(std::move(c));
    }
  }
  return families;
}

// ---------------------------------------------------------------------------
// Distance to a curve (Newton projection with stamped seeds)

namespace detail {

// minimizes |l(t) - y|^2 with Newton from the seed, clamped to the domain;
// returns squared distance, sets *diverged on failure
inline double curve_dist2(const PolyCurve& c, const Vec& y, double seed_t, bool* diverged) {
  double t = seed_t;
  double best = 1e300;
  for (int it = 0; it < 24; ++it) {
    Vec p = c.eval(t);
    Vec v = c.deriv1(t);
    Vec a = c.deriv2(t);
    Vec r = p;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= y[i];
    double g = 2.0 * dot(r, v);
    double h = 2.0 * (dot(v, v) + dot(r, a));
    best = std::min(best, dot(r, r));
    if (std::abs(g) < 1e-16) break;
    if (h <= 1e-12) { // non-convex patch: fall back to a damped gradient step
      t -= 0.1 * g;
    } else {
      t -= g / h;
    }
    if (t < c.t_min) t = c.t_min;
    if (t > c.t_max) t = c.t_max;
    if (it > 0 && std::abs(g / std::max(h, 1e-12)) < 1e-13) {
      Vec rr = c.eval(t);
      for (std::size_t i = 0; i < rr.size(); ++i) rr[i] -= y[i];
      best = std::min(best, dot(rr, rr));
      return best;
    }
  }
  // Newton did not settle; dense fallback
  if (diverged) *diverged = true;
  for (int s = 0; s <= 200; ++s) {
    double ts = c.t_min + (c.t_max - c.t_min) * s / 200.0;
    Vec p = c.eval(ts);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] -= y[i];
    best = std::min(best, dot(p, p));
  }
  return best;
}

struct CellKey {
  std::int64_t flat;
};

} // namespace detail

// ---------------------------------------------------------------------------
// Rasterized occupancy and the functional

struct KakeyaGrid {
  int d = 2;
  int n = 0;        // cells per axis over [-delta, delta]
  double delta = 0; // half extent
  double cell() const { return 2.0 * delta / n; }
  // cell center from flat index
  Vec center(std::int64_t flat) const {
    Vec y(d);
    for (int i = 0; i < d; ++i) {
      y[i] = -delta + (static_cast<double>(flat % n) + 0.5) * cell();
      flat /= n;
    }
    return y;
  }
  std::int64_t flatten(const std::vector<int>& idx) const {
    std::int64_t f = 0;
    for (int i = d - 1; i >= 0; --i) f = f * n + idx[i];
    return f;
  }
};

struct KakeyaEvalStats {
  long newton_fallbacks = 0;
};

// occupancy map of one family: flat cell index -> weighted count
inline std::unordered_map<std::int64_t, double> rasterize_family(
    const TubeFamily& fam, const KakeyaGrid& grid, double rho,
    KakeyaEvalStats* stats = nullptr) {
  std::unordered_map<std::int64_t, double> occupancy;
  const double cell = grid.cell();
  const int reach = static_cast<int>(std::ceil((rho + cell) / cell)) + 1;
  std::unordered_map<std::int64_t, double> seeds; // cell -> seed t (best stamp)
  std::unordered_map<std::int64_t, double> seed_d2;
  for (std::size_t ci = 0; ci < fam.curves.size(); ++ci) {
    const PolyCurve& c = fam.curves[ci];
    seeds.clear();
    seed_d2.clear();
    const int steps = std::max(8, static_cast<int>(std::ceil((c.t_max - c.t_min) / (cell / 2))));
    for (int s = 0; s <= steps; ++s) {
      double t = c.t_min + (c.t_max - c.t_min) * s / steps;
      Vec p = c.eval(t);
      bool near = true;
      for (int i = 0; i < grid.d; ++i)
        if (p[i] < -grid.delta - rho - cell || p[i] > grid.delta + rho + cell) near = false;
      if (!near) continue;
      std::vector<int> base(grid.d), idx(grid.d);
      for (int i = 0; i < grid.d; ++i)
        base[i] = static_cast<int>(std::floor((p[i] + grid.delta) / cell));
      // stamp the cube of radius `reach` cells around the sample
      std::vector<int> off(grid.d, -reach);
      for (;;) {
        bool in = true;
        for (int i = 0; i < grid.d; ++i) {
          idx[i] = base[i] + off[i];
          if (idx[i] < 0 || idx[i] >= grid.n) in = false;
        }
        if (in) {
          std::int64_t flat = grid.flatten(idx);
          Vec y = grid.center(flat);
          double d2 = 0;
          for (int i = 0; i < grid.d; ++i) d2 += (y[i] - p[i]) * (y[i] - p[i]);
          if (d2 <= (rho + cell) * (rho + cell)) {
            auto it = seed_d2.find(flat);
            if (it == seed_d2.end() || d2 < it->second) {
              seed_d2[flat] = d2;
              seeds[flat] = t;
            }
          }
        }
        int i = 0;
        while (i < grid.d && ++off[i] > reach) off[i++] = -reach;
        if (i == grid.d) break;
      }
    }
    // resolve candidates by Newton projection
    for (const auto& [flat, seed_t] : seeds) {
      Vec y = grid.center(flat);
      bool diverged = false;
      double d2 = detail::curve_dist2(c, y, seed_t, &diverged);
      if (diverged && stats) ++stats->newton_fallbacks;
      if (d2 <= rho * rho) occupancy[flat] += fam.weight(ci);
    }
  }
  return occupancy;
}

inline double kakeya_functional(const std::vector<TubeFamily>& families, double delta,
                                double rho, double p, int grid_n,
                                KakeyaEvalStats* stats = nullptr) {
  const int d = static_cast<int>(families.size());
  if (rho >= delta / 2) throw InvalidConfig("requires rho < delta / 2");
  KakeyaGrid grid{d, grid_n, delta};
  if (grid.cell() > rho / 4.0 * (1 + 1e-12))
    throw GridTooCoarse("grid spacing must be <= rho / 4");
  for (const TubeFamily& fam : families)
    if (fam.curves.empty()) return 0.0;
  std::vector<std::unordered_map<std::int64_t, double>> occ;
  occ.reserve(d);
  for (const TubeFamily& fam : families) occ.push_back(rasterize_family(fam, grid, rho, stats));
  // iterate the support of the first family in sorted order
  std::vector<std::int64_t> keys;
  keys.reserve(occ[0].size());
  for (const auto& [flat, w] : occ[0]) keys.push_back(flat);
  std::sort(keys.begin(), keys.end());
  const double exponent = p / (d - 1.0);
  const double cell_vol = std::pow(grid.cell(), d);
  double total = 0;
  for (std::int64_t flat : keys) {
    Vec y = grid.center(flat);
    if (norm2(y) > delta) continue;
    double prod = std::pow(occ[0].at(flat), exponent);
    bool zero = false;
    for (int j = 1; j < d; ++j) {
      auto it = occ[j].find(flat);
      if (it == occ[j].end()) {
        zero = true;
        break;
      }
      prod *= std::pow(it->second, exponent);
    }
    if (!zero) total += prod;
  }
  return total * cell_vol;
}

// ---------------------------------------------------------------------------
// Scale scan

struct KakeyaScan {
  double delta = 0, p = 0;
  Vec rho_list;
  Vec lhs_values;
  Vec ratios; // lhs / (rho^d * prod_j mu_j^{p/(d-1)})
  double max_min_ratio = 0;
  long newton_fallbacks = 0;
};

// grid_n <= 0 auto-sizes each rho to spacing rho/4 (times grid_factor)
inline KakeyaScan kakeya_scan(const std::vector<TubeFamily>& families, double delta,
                              const Vec& rho_list, double p, int grid_n = 0,
                              int grid_factor = 1) {
  for (std::size_t i = 1; i < rho_list.size(); ++i)
    if (rho_list[i] >= rho_list[i - 1]) throw InvalidConfig("rho_list must be decreasing");
  const int d = static_cast<int>(families.size());
  KakeyaScan scan;
  scan.delta = delta;
  scan.p = p;
  scan.rho_list = rho_list;
  double mu_prod = 1.0;
  for (const TubeFamily& fam : families)
    mu_prod *= std::pow(fam.total_weight(), p / (d - 1.0));
  KakeyaEvalStats stats;
  for (double rho : rho_list) {
    int n = grid_n > 0 ? grid_n
                       : grid_factor * static_cast<int>(std::ceil(8.0 * delta / rho));
    double lhs = kakeya_functional(families, delta, rho, p, n, &stats);
    scan.lhs_values.push_back(lhs);
    scan.ratios.push_back(lhs / (std::pow(rho, d) * mu_prod));
  }
  scan.newton_fallbacks = stats.newton_fallbacks;
  double mx = 0, mn = 1e300;
  for (double r : scan.ratios) {
    mx = std::max(mx, r);
    mn = std::min(mn, r);
  }
  scan.max_min_ratio = mn > 0 ? mx / mn : 1e300;
  return scan;
}

} // namespace ergolab
