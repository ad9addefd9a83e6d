#include <catch2/catch_amalgamated.hpp>

#include "ergolab/rng.hpp"
#include "ergolab/sobolev.hpp"
#include "grid_fixtures.hpp"

using namespace ergolab;
using fixtures::disk_set;

namespace {

// brute-force oracle: direct double loop over cell pairs
double hs_oracle(const GridSet& g, double s, double cutoff) {
  const double cell = g.cell_size();
  const int m = static_cast<int>(std::ceil(cutoff / cell));
  double total = 0;
  for (int y = m; y < g.ny - m; ++y)
    for (int x = m; x < g.nx - m; ++x)
      for (int dy = -m; dy <= m; ++dy)
        for (int dx = -m; dx <= m; ++dx) {
          if (dx == 0 && dy == 0) continue;
          double r = std::hypot(dx * cell, dy * cell);
          if (r > cutoff) continue;
          if (g.at(x, y) != g.at(x + dx, y + dy)) total += std::pow(r, -(2 + 2 * s));
        }
  return total * g.cell_volume() * g.cell_volume();
}

// exact L1 convolution defect of a disk against the ball kernel, via the
// circle-circle lens area formula and radial quadrature
double disk_defect_oracle(double radius, double delta) {
  auto lens = [](double r1, double r2, double dist) {
    if (dist >= r1 + r2) return 0.0;
    if (dist <= std::abs(r1 - r2)) {
      double rm = std::min(r1, r2);
      return 3.141592653589793 * rm * rm;
    }
    double a = r1 * r1 * std::acos((dist * dist + r1 * r1 - r2 * r2) / (2 * dist * r1));
    double b = r2 * r2 * std::acos((dist * dist + r2 * r2 - r1 * r1) / (2 * dist * r2));
    double c = 0.5 * std::sqrt((-dist + r1 + r2) * (dist + r1 - r2) * (dist - r1 + r2) *
                               (dist + r1 + r2));
    return a + b - c;
  };
  const double ball = 3.141592653589793 * delta * delta;
  const int n = 4000;
  double total = 0;
  for (int i = 0; i < n; ++i) {
    double r = radius - delta + (2 * delta) * (i + 0.5) / n;
    if (r < 0) continue;
    double frac = lens(radius, delta, r) / ball;
    double err = r <= radius ? 1.0 - frac : frac;
    total += err * 2 * 3.141592653589793 * r * (2 * delta / n);
  }
  return total;
}

} // namespace

TEST_CASE("seminorm: empty and full sets vanish") {
  GridSet empty = make_grid_set({-1, -1}, {1, 1}, 64);
  CHECK(hs_seminorm(empty, 0.25) == 0.0);
  GridSet full = make_grid_set({-1, -1}, {1, 1}, 64, [](double, double) { return true; });
  CHECK(hs_seminorm(full, 0.25) == 0.0);
}

TEST_CASE("seminorm: disk agrees with the brute-force oracle at half resolution") {
  GridSet fine = disk_set(1.0, 64);
  HsOptions opts;
  opts.threads = 2;
  double val = hs_seminorm(fine, 0.25, opts);
  GridSet coarse = disk_set(1.0, 32);
  double oracle = hs_oracle(coarse, 0.25, 0.5);
  CHECK(val == Catch::Approx(oracle).epsilon(0.10));
}

TEST_CASE("seminorm: preconditions") {
  GridSet low = disk_set(1.0, 32);
  CHECK_THROWS_AS(hs_seminorm(low, 0.25), ResolutionTooLow);
  GridSet g = disk_set(1.0, 64);
  CHECK_THROWS_AS(hs_seminorm(g, 0.7), InvalidConfig);
}

TEST_CASE("seminorm: dilation scaling lambda^{d-2s}") {
  const double s = 0.25;
  HsOptions half;
  half.cutoff_radius = 0.25;
  half.threads = 2;
  HsOptions full;
  full.cutoff_radius = 0.5;
  full.threads = 2;
  GridSet small = disk_set(0.5, 128);
  GridSet big = disk_set(1.0, 128);
  double v_small = hs_seminorm(small, s, half);
  double v_big = hs_seminorm(big, s, full);
  double lambda_pow = std::pow(2.0, 2 - 2 * s);
  CHECK(v_big == Catch::Approx(v_small * lambda_pow).epsilon(0.10));
}

TEST_CASE("seminorm: cutoff stability for smooth boundaries") {
  GridSet g = disk_set(1.0, 64);
  HsOptions a, b;
  a.cutoff_radius = 0.5;
  a.threads = 2;
  b.cutoff_radius = 1.0;
  b.threads = 2;
  double va = hs_seminorm(g, 0.25, a);
  double vb = hs_seminorm(g, 0.25, b);
  CHECK(std::abs(vb - va) < 0.15 * va);
}

TEST_CASE("cutoff property: restriction to balls adds a bounded amount") {
  // || 1_{A cap B} ||_{H^s} <= || 1_A ||_{H^s} + C_1 with one constant across
  // centers and radii; the underlying fact is the uniform seminorm bound for
  // balls of radius <= 1
  const double s = 0.25;
  HsOptions opts;
  opts.threads = 2;
  GridSet g = disk_set(1.0, 64);
  double base = hs_seminorm(g, s, opts);
  double c1 = 0;
  double max_ball = 0;
  for (double bx : {0.0, 0.5, 1.0}) {
    for (double br : {0.3, 0.6, 0.9}) {
      GridSet cut = g;
      for (int iy = 0; iy < cut.ny; ++iy)
        for (int ix = 0; ix < cut.nx; ++ix) {
          double dx = cut.cx(ix) - bx, dy = cut.cy(iy);
          if (dx * dx + dy * dy > br * br) cut.set(ix, iy, false);
        }
      double val = hs_seminorm(cut, s, opts);
      c1 = std::max(c1, val - base);
      GridSet ball = disk_set(br, 64);
      max_ball = std::max(max_ball, hs_seminorm(ball, s, opts));
    }
  }
  CHECK(c1 <= 2.0 * max_ball); // single constant, controlled by ball seminorms
}

TEST_CASE("convolution defect: empty set and disk ratios") {
  GridSet empty = make_grid_set({-1, -1}, {1, 1}, 128);
  HsOptions opts;
  opts.threads = 2;
  // empty set: defect identically zero for all delta
  {
    Vec deltas{1.0 / 8, 1.0 / 16};
    detail::BallAverager avg(empty, deltas[0]);
    (void)avg;
    ConvolutionDefectReport rep{{}, {}, {}, 0};
    // hs_norm of the empty set is zero; the official entry point divides by it,
    // so check the defect directly
    for (double d : deltas) {
      detail::BallAverager a(empty, d);
      double defect = 0;
      for (int y = 0; y < empty.ny; ++y)
        for (int x = 0; x < empty.nx; ++x)
          if (a.valid(x, y)) defect += std::abs(0.0 - a.average(x, y));
      CHECK(defect == 0.0);
    }
    (void)rep;
  }
  // disk: ratios bounded by a single constant across dyadic deltas, and the
  // defect itself matches the exact annulus-lens oracle
  GridSet disk = disk_set(1.0, 512);
  Vec deltas;
  for (int k = 3; k <= 7; ++k) deltas.push_back(std::pow(2.0, -k));
  ConvolutionDefectReport rep = convolution_defect(disk, deltas, 0.25, opts);
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    double oracle = disk_defect_oracle(1.0, deltas[i]);
    CHECK(rep.defects[i] == Catch::Approx(oracle).epsilon(0.08));
  }
  // bounded by one constant across the dyadic range (the constant 0.04 is a
  // frozen fixture from the first verified run; the ratio itself decays like
  // delta^{1-2s} for smooth boundaries, the lemma only asserts the bound)
  for (double r : rep.ratios) {
    CHECK(r > 0);
    CHECK(r < 0.04);
  }
}

TEST_CASE("convolution defect: checkerboard is rough") {
  const double res = 128;
  GridSet checker = make_grid_set({-1, -1}, {1, 1}, res, [&](double x, double y) {
    int ix = static_cast<int>(std::floor(x * res));
    int iy = static_cast<int>(std::floor(y * res));
    return ((ix + iy) & 1) == 0;
  });
  detail::BallAverager avg(checker, 8.0 / res);
  double defect = 0;
  long valid = 0;
  for (int y = 0; y < checker.ny; ++y)
    for (int x = 0; x < checker.nx; ++x)
      if (avg.valid(x, y)) {
        defect += std::abs((checker.at(x, y) ? 1.0 : 0.0) - avg.average(x, y));
        ++valid;
      }
  defect *= checker.cell_volume();
  double volume_valid = valid * checker.cell_volume();
  // ball averages sit at 1/2, so the defect is ~ vol/2 = 2 vol(A) (1 - 1/2) / 2
  CHECK(defect == Catch::Approx(volume_valid / 2).epsilon(0.05));
}

TEST_CASE("density points: full box complement is only the margin") {
  GridSet full = make_grid_set({-1, -1}, {1, 1}, 64, [](double, double) { return true; });
  const double delta = 0.125;
  DensityPointsReport rep = density_points(full, delta, 1.0 - std::pow(delta, 0.25));
  int rc = static_cast<int>(std::floor(delta * 64));
  double margin_vol = full.volume() - (full.nx - 2 * rc) * (full.ny - 2 * rc) *
                                          full.cell_volume();
  CHECK(rep.complement_measure <= margin_vol + 1e-12);
  CHECK(rep.complement_measure > 0);
}

TEST_CASE("density points: multi-scale dust complement decays like delta^s") {
  // a single smooth disk decays like delta (the corollary's bound is not
  // tight there); the dyadic dust saturates the delta^s rate
  const double s = 0.25;
  GridSet dust = fixtures::dyadic_dust();
  Vec deltas, complements, ratios;
  for (double delta : {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64}) {
    DensityPointsReport rep = density_points(dust, delta, 1.0 - std::pow(delta, s));
    deltas.push_back(std::log(delta));
    complements.push_back(std::log(rep.complement_measure));
    ratios.push_back(rep.complement_measure / std::pow(delta, s));
  }
  LineFit fit = fit_line(deltas, complements);
  CHECK(fit.slope > 0.7 * s);
  CHECK(fit.slope < 1.3 * s);
  // the corollary's constant, fit once, stays stable across delta halving
  for (double r : ratios) {
    CHECK(r > 0.5 * ratios.front());
    CHECK(r < 2.0 * ratios.front());
  }
}

TEST_CASE("density points: noise bitmap has no high-density points at small delta") {
  // ball averages of cell-scale noise concentrate at 1/2 with width
  // ~ 1/(delta * resolution); the threshold 1 - delta^s sits many sigmas above
  // once delta < 2^{-1/s} and the resolution is high
  RngStream rng(5);
  GridSet noise = make_grid_set({-0.5, -0.5}, {0.5, 0.5}, 2048,
                                [&rng](double, double) { return rng.uniform01() < 0.5; });
  const double delta = 0.05;
  DensityPointsReport rep = density_points(noise, delta, 1.0 - std::pow(delta, 0.25));
  CHECK(rep.points.count() == 0);
}

TEST_CASE("density profile: half-space ramp and locator") {
  GridSet half = make_grid_set({-1, -1}, {1, 1}, 128,
                               [](double x, double) { return x > 0; });
  const double delta = 0.1, s = 0.25;
  double target = std::pow(delta, s);
  std::vector<Vec> path{{-0.7, 0.0}, {0.7, 0.0}};
  DensityProfile prof = density_profile(half, path, delta, target);
  // monotone ramp from 0 to 1
  CHECK(prof.q.front() == 0.0);
  CHECK(prof.q.back() == 1.0);
  CHECK(std::abs(prof.q_bar - target) < 0.05);
  // empty set along the path: no bracket
  GridSet empty = make_grid_set({-1, -1}, {1, 1}, 128);
  CHECK_THROWS_AS(density_profile(empty, path, delta, 0.5), NoBracket);
}

TEST_CASE("density gap evaluator: endpoints and the contradiction scale") {
  // kappa = 0: vacuous
  DensityGapEval zero = density_gap_eval(0.0, 0.1, 1.05, 0.25, 2.0);
  CHECK(zero.vacuous);
  CHECK(zero.lhs < 0);
  // kappa = 1: satisfiable at full density for small delta
  DensityGapEval one = density_gap_eval(1.0, 0.01, 1.05, 0.25, 2.0);
  CHECK_FALSE(one.vacuous);
  CHECK(one.holds);
  // contradiction scale against the chain-form root: within one dyadic step
  const double p = 1.005, s = 0.25, c_p = 2.0;
  const int d = 2;
  REQUIRE(s / (d - 1.0) > density_gap_eps_p(p, s, d));
  double dstar = density_gap_delta_star(p, s, c_p, d);
  CHECK(dstar > 0);
  CHECK(density_gap_margin(dstar * 0.99, p, s, c_p, d) > 0);
  CHECK(density_gap_margin(dstar * 1.01, p, s, c_p, d) < 0);
  // oracle: root of the chain mid-form  delta^s - C_p delta^d = C_p
  // delta^{s p d/(d-1) - eps_p}
  auto chain_margin = [&](double delta) {
    double eps_p = density_gap_eps_p(p, s, d);
    return std::pow(delta, s) - c_p * std::pow(delta, d) -
           c_p * std::pow(delta, s * p * d / (d - 1.0) - eps_p);
  };
  double lo = std::log(1e-12), hi = std::log(1.0);
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (chain_margin(std::exp(mid)) > 0)
      lo = mid;
    else
      hi = mid;
  }
  double dstar_oracle = std::exp(lo);
  CHECK(std::abs(std::log2(dstar) - std::log2(dstar_oracle)) <= 1.0);
}
