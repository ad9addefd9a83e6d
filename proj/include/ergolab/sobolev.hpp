#pragma once

// Discrete fractional-Sobolev toolkit on flat 2-d grids: Gagliardo seminorms
// of indicator bitmaps, convolution defect against the normalized ball kernel,
// density points, density profiles along paths, and the density-gap formula
// evaluator.
//
// The seminorm is the truncated double Riemann sum
//   sum_{|t| <= cutoff} |1_A(x+t) - 1_A(x)| / |t|^{d+2s} * cell^{2d}
// with x restricted to the interior margin so x+t never leaves the extent.
// Pair counts per displacement are computed on packed bit rows. The far tail
// is not added to the value (a full box must give zero); the analytic bound
// 2 vol(A) * tail-integral is available separately.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "ergolab/common.hpp"
#include "ergolab/fit.hpp"
#include "ergolab/linalg.hpp"
#include "ergolab/parallel.hpp"

namespace ergolab {

struct GridSet {
  Vec lo, hi;        // physical extent, size 2
  int nx = 0, ny = 0;
  double resolution; // cells per unit length
  std::vector<std::uint8_t> cells; // row-major, iy * nx + ix

  double cell_size() const { return 1.0 / resolution; }
  double cell_volume() const { return cell_size() * cell_size(); }
  bool at(int ix, int iy) const { return cells[static_cast<std::size_t>(iy) * nx + ix] != 0; }
  void set(int ix, int iy, bool v) {
    cells[static_cast<std::size_t>(iy) * nx + ix] = v ? 1 : 0;
  }
  long count() const {
    long c = 0;
    for (std::uint8_t v : cells) c += v;
    return c;
  }
  double volume() const { return static_cast<double>(count()) * cell_volume(); }

  // cell center coordinates
  double cx(int ix) const { return lo[0] + (ix + 0.5) * cell_size(); }
  double cy(int iy) const { return lo[1] + (iy + 0.5) * cell_size(); }

  bool contains(const Vec& p) const {
    if (p[0] < lo[0] || p[0] >= hi[0] || p[1] < lo[1] || p[1] >= hi[1]) return false;
    int ix = static_cast<int>((p[0] - lo[0]) * resolution);
    int iy = static_cast<int>((p[1] - lo[1]) * resolution);
    ix = std::min(ix, nx - 1);
    iy = std::min(iy, ny - 1);
    return at(ix, iy);
  }
};

inline GridSet make_grid_set(Vec lo, Vec hi, double resolution,
                             const std::function<bool(double, double)>& pred = {}) {
  if (resolution < 1) throw InvalidConfig("resolution must be >= 1 cell per unit");
  GridSet g;
  g.lo = std::move(lo);
  g.hi = std::move(hi);
  g.resolution = resolution;
  g.nx = static_cast<int>(std::lround((g.hi[0] - g.lo[0]) * resolution));
  g.ny = static_cast<int>(std::lround((g.hi[1] - g.lo[1]) * resolution));
  if (g.nx <= 0 || g.ny <= 0) throw InvalidConfig("empty grid extent");
  g.cells.assign(static_cast<std::size_t>(g.nx) * g.ny, 0);
  if (pred)
    for (int iy = 0; iy < g.ny; ++iy)
      for (int ix = 0; ix < g.nx; ++ix)
        if (pred(g.cx(ix), g.cy(iy))) g.set(ix, iy, true);
  return g;
}

// ---------------------------------------------------------------------------
// H^s seminorm

namespace detail {

struct BitRows {
  int nx = 0, ny = 0, words = 0;
  std::vector<std::uint64_t> bits;

  explicit BitRows(const GridSet& g) : nx(g.nx), ny(g.ny), words((g.nx + 63) / 64) {
    bits.assign(static_cast<std::size_t>(ny) * words, 0);
    for (int y = 0; y < ny; ++y)
      for (int x = 0; x < nx; ++x)
        if (g.at(x, y)) row(y)[x >> 6] |= (1ULL << (x & 63));
  }
  std::uint64_t* row(int y) { return bits.data() + static_cast<std::size_t>(y) * words; }
  const std::uint64_t* row(int y) const {
    return bits.data() + static_cast<std::size_t>(y) * words;
  }
};

// dst[x] = src[x + dx] for the bit rows (reads beyond nx are zero)
inline void shift_row(const std::uint64_t* src, std::uint64_t* dst, int words, int dx) {
  if (dx == 0) {
    std::copy(src, src + words, dst);
    return;
  }
  if (dx > 0) {
    int q = dx >> 6, r = dx & 63;
    for (int i = 0; i < words; ++i) {
      std::uint64_t v = (i + q < words) ? (src[i + q] >> r) : 0;
      if (r != 0 && i + q + 1 < words) v |= src[i + q + 1] << (64 - r);
      dst[i] = v;
    }
  } else {
    int q = (-dx) >> 6, r = (-dx) & 63;
    for (int i = words - 1; i >= 0; --i) {
      std::uint64_t v = (i - q >= 0) ? (src[i - q] << r) : 0;
      if (r != 0 && i - q - 1 >= 0) v |= src[i - q - 1] >> (64 - r);
      dst[i] = v;
    }
  }
}

} // namespace detail

struct HsOptions {
  double cutoff_radius = 0.5;
  int threads = 1;
  double min_resolution = 64;
};

inline double hs_seminorm(const GridSet& set, double s, const HsOptions& opts = {}) {
  if (s <= 0 || s >= 0.5) throw InvalidConfig("hs_seminorm requires 0 < s < 1/2");
  if (set.resolution < opts.min_resolution)
    throw ResolutionTooLow("resolution below acceptance grade (" +
                           std::to_string(opts.min_resolution) + " cells per unit)");
  const double cell = set.cell_size();
  const int m = static_cast<int>(std::ceil(opts.cutoff_radius / cell));
  if (2 * m >= set.nx || 2 * m >= set.ny)
    throw InvalidConfig("cutoff radius leaves no interior cells");
  detail::BitRows rows(set);
  // interior mask in x
  std::vector<std::uint64_t> xmask(rows.words, 0);
  for (int x = m; x < set.nx - m; ++x) xmask[x >> 6] |= (1ULL << (x & 63));
  // enumerate displacements
  struct Offset {
    int dx, dy;
    double weight;
  };
  std::vector<Offset> offsets;
  for (int dy = -m; dy <= m; ++dy)
    for (int dx = -m; dx <= m; ++dx) {
      if (dx == 0 && dy == 0) continue;
      double r = std::hypot(dx * cell, dy * cell);
      if (r > opts.cutoff_radius) continue;
      offsets.push_back({dx, dy, std::pow(r, -(2.0 + 2.0 * s))});
    }
  Vec partial(offsets.size(), 0.0);
  parallel_for(offsets.size(), opts.threads, [&](std::size_t oi) {
    const Offset& off = offsets[oi];
    std::vector<std::uint64_t> scratch(rows.words);
    long cnt = 0;
    for (int y = m; y < set.ny - m; ++y) {
      const std::uint64_t* a = rows.row(y);
      detail::shift_row(rows.row(y + off.dy), scratch.data(), rows.words, off.dx);
      for (int w = 0; w < rows.words; ++w)
        cnt += __builtin_popcountll((a[w] ^ scratch[w]) & xmask[w]);
    }
    partial[oi] = static_cast<double>(cnt) * off.weight;
  });
  double total = 0;
  for (double v : partial) total += v;
  const double cell2 = set.cell_volume();
  return total * cell2 * cell2;
}

// analytic bound on the discarded far tail: 2 vol(A) * int_{|t| > cutoff}
inline double hs_tail_bound(const GridSet& set, double s, double cutoff_radius = 0.5) {
  double tail = 2.0 * 3.141592653589793 * std::pow(cutoff_radius, -2.0 * s) / (2.0 * s);
  return 2.0 * set.volume() * tail;
}

inline double hs_norm_sq(const GridSet& set, double s, const HsOptions& opts = {}) {
  return set.volume() + hs_seminorm(set, s, opts);
}

// ---------------------------------------------------------------------------
// Ball averages (exact cell-in-ball mask, per-row prefix sums)

namespace detail {

class BallAverager {
public:
  BallAverager(const GridSet& g, double delta) : g_(g) {
    rc_ = static_cast<int>(std::floor(delta / g.cell_size()));
    if (rc_ < 4) throw ResolutionTooLow("delta must span at least 4 grid cells");
    half_width_.resize(2 * rc_ + 1);
    count_ = 0;
    for (int dy = -rc_; dy <= rc_; ++dy) {
      double rem = delta * delta - dy * dy * g.cell_size() * g.cell_size();
      int w = rem >= 0 ? static_cast<int>(std::floor(std::sqrt(rem) / g.cell_size())) : -1;
      half_width_[dy + rc_] = w;
      if (w >= 0) count_ += 2 * w + 1;
    }
    prefix_.assign(static_cast<std::size_t>(g.ny) * (g.nx + 1), 0);
    for (int y = 0; y < g.ny; ++y) {
      long acc = 0;
      for (int x = 0; x < g.nx; ++x) {
        acc += g.at(x, y) ? 1 : 0;
        prefix_[static_cast<std::size_t>(y) * (g.nx + 1) + x + 1] = acc;
      }
    }
  }

  int radius_cells() const { return rc_; }
  bool valid(int x, int y) const {
    return x >= rc_ && x < g_.nx - rc_ && y >= rc_ && y < g_.ny - rc_;
  }
  double average(int x, int y) const {
    long sum = 0;
    for (int dy = -rc_; dy <= rc_; ++dy) {
      int w = half_width_[dy + rc_];
      if (w < 0) continue;
      const long* row = prefix_.data() + static_cast<std::size_t>(y + dy) * (g_.nx + 1);
      sum += row[x + w + 1] - row[x - w];
    }
    return static_cast<double>(sum) / static_cast<double>(count_);
  }

private:
  const GridSet& g_;
  int rc_ = 0;
  long count_ = 0;
  std::vector<int> half_width_;
  std::vector<long> prefix_;
};

} // namespace detail

// ---------------------------------------------------------------------------
// Convolution defect (Lemma-style bound data)

struct ConvolutionDefectReport {
  Vec delta_list;
  Vec defects; // || 1_A - 1_A * psi_delta ||_L1 over the margin-valid region
  Vec ratios;  // defect / (delta^{2s} ||1_A||_{H^s}^2)
  double hs_norm_sq = 0;
};

inline ConvolutionDefectReport convolution_defect(const GridSet& set, const Vec& delta_list,
                                                  double s, const HsOptions& opts = {}) {
  ConvolutionDefectReport rep;
  rep.delta_list = delta_list;
  rep.hs_norm_sq = hs_norm_sq(set, s, opts);
  for (double delta : delta_list) {
    detail::BallAverager avg(set, delta);
    double defect = 0;
    for (int y = 0; y < set.ny; ++y)
      for (int x = 0; x < set.nx; ++x) {
        if (!avg.valid(x, y)) continue;
        double a = set.at(x, y) ? 1.0 : 0.0;
        defect += std::abs(a - avg.average(x, y));
      }
    defect *= set.cell_volume();
    rep.defects.push_back(defect);
    rep.ratios.push_back(defect / (std::pow(delta, 2.0 * s) * rep.hs_norm_sq));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Density points

struct DensityPointsReport {
  GridSet points;            // cells whose delta-ball density exceeds c0
  double complement_measure; // vol(A \ A_{delta, c0}), margin cells count as complement
};

inline DensityPointsReport density_points(const GridSet& set, double delta, double c0) {
  detail::BallAverager avg(set, delta);
  DensityPointsReport rep{set, 0.0};
  std::fill(rep.points.cells.begin(), rep.points.cells.end(), 0);
  long complement = 0;
  for (int y = 0; y < set.ny; ++y)
    for (int x = 0; x < set.nx; ++x) {
      bool dense = avg.valid(x, y) && avg.average(x, y) > c0;
      if (dense) rep.points.set(x, y, true);
      if (set.at(x, y) && !dense) ++complement;
    }
  rep.complement_measure = static_cast<double>(complement) * set.cell_volume();
  return rep;
}

// ---------------------------------------------------------------------------
// Density profile along a path

struct DensityProfile {
  Vec t;       // arclength parameter in [0, 1]
  Vec q;       // ball density along the path
  double t_bar = 0;   // location where q crosses the target
  double q_bar = 0;   // interpolated density at t_bar
};

inline DensityProfile density_profile(const GridSet& set, const std::vector<Vec>& path,
                                      double delta, double target, int n_samples = 200) {
  if (path.size() < 2) throw InvalidConfig("path needs at least two vertices");
  detail::BallAverager avg(set, delta);
  // arclength-uniform samples along the polyline
  Vec seg_len;
  double total = 0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    double l = std::hypot(path[i][0] - path[i - 1][0], path[i][1] - path[i - 1][1]);
    seg_len.push_back(l);
    total += l;
  }
  DensityProfile prof;
  for (int k = 0; k < n_samples; ++k) {
    double tt = total * k / (n_samples - 1);
    // locate segment
    double acc = 0;
    std::size_t seg = 0;
    while (seg + 1 < seg_len.size() && acc + seg_len[seg] < tt) acc += seg_len[seg++];
    double frac = seg_len[seg] > 0 ? (tt - acc) / seg_len[seg] : 0.0;
    double px = path[seg][0] + frac * (path[seg + 1][0] - path[seg][0]);
    double py = path[seg][1] + frac * (path[seg + 1][1] - path[seg][1]);
    int ix = static_cast<int>((px - set.lo[0]) * set.resolution);
    int iy = static_cast<int>((py - set.lo[1]) * set.resolution);
    if (!avg.valid(ix, iy))
      throw InvalidConfig("path leaves the delta-margin interior of the extent");
    prof.t.push_back(k / static_cast<double>(n_samples - 1));
    prof.q.push_back(avg.average(ix, iy));
  }
  // intermediate-value locator: first bracketing pair, linear interpolation
  bool found = false;
  for (std::size_t i = 1; i < prof.q.size(); ++i) {
    double a = prof.q[i - 1], b = prof.q[i];
    if ((a - target) * (b - target) <= 0) {
      double w = (a == b) ? 0.0 : (target - a) / (b - a);
      prof.t_bar = prof.t[i - 1] + w * (prof.t[i] - prof.t[i - 1]);
      prof.q_bar = a + w * (b - a);
      found = true;
      break;
    }
  }
  if (!found) throw NoBracket("density target not bracketed along the path");
  return prof;
}

// ---------------------------------------------------------------------------
// Density-gap inequality evaluator

struct DensityGapEval {
  double kappa_density = 0;
  double delta = 0, p = 0, s = 0, c_p = 0;
  int dim = 2;
  double eps_p = 0;  // (p-1) d (2d/s - 1)
  double lhs = 0;    // kappa - C_p delta^d
  double rhs = 0;    // C_p delta^{-eps_p} kappa^{pd/(d-1)}
  bool holds = false;   // lhs <= rhs (the inequality a real invariant set obeys)
  bool vacuous = false; // lhs < 0: no information at this scale
  double margin_at_delta_s = 0; // delta^s - C_p delta^d - C_p delta^{s + s/(d-1) - eps_p}
};

inline double density_gap_eps_p(double p, double s, int d) {
  return (p - 1.0) * d * (2.0 * d / s - 1.0);
}

// contradiction margin at kappa = delta^s, final form of the chain
inline double density_gap_margin(double delta, double p, double s, double c_p, int d) {
  double eps_p = density_gap_eps_p(p, s, d);
  return std::pow(delta, s) - c_p * std::pow(delta, d) -
         c_p * std::pow(delta, s + (s / (d - 1.0) - eps_p));
}

inline DensityGapEval density_gap_eval(double kappa_density, double delta, double p, double s,
                                       double c_p, int d = 2) {
  if (p <= 1.0) throw InvalidConfig("density gap requires p > 1");
  if (s <= 0 || s >= 0.5) throw InvalidConfig("density gap requires 0 < s < 1/2");
  DensityGapEval e;
  e.kappa_density = kappa_density;
  e.delta = delta;
  e.p = p;
  e.s = s;
  e.c_p = c_p;
  e.dim = d;
  e.eps_p = density_gap_eps_p(p, s, d);
  e.lhs = kappa_density - c_p * std::pow(delta, d);
  e.rhs = c_p * std::pow(delta, -e.eps_p) * std::pow(kappa_density, p * d / (d - 1.0));
  e.vacuous = e.lhs < 0;
  e.holds = e.lhs <= e.rhs;
  e.margin_at_delta_s = density_gap_margin(delta, p, s, c_p, d);
  return e;
}

// largest delta* below which the contradiction margin is positive (requires
// s/(d-1) > eps_p); bisection in log(delta)
inline double density_gap_delta_star(double p, double s, double c_p, int d = 2) {
  if (s / (d - 1.0) <= density_gap_eps_p(p, s, d))
    throw InvalidConfig("need s/(d-1) > eps_p for a contradiction scale");
  double lo = std::log(1e-12), hi = std::log(1.0);
  if (density_gap_margin(std::exp(lo), p, s, c_p, d) <= 0)
    throw NoBracket("margin not positive even at the smallest scale");
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (density_gap_margin(std::exp(mid), p, s, c_p, d) > 0)
      lo = mid;
    else
      hi = mid;
  }
  return std::exp(lo);
}

} // namespace ergolab
