#pragma once

// Strong-stable directions and curves.
//
// Finite-horizon conventions: the true strong stable direction is an n -> oo
// object; every routine here computes it at a declared horizon and reports a
// convergence angle (the angle between the horizon-n/2 and horizon-n results).
//
// Two independent constructions are provided. "svd" takes the bottom right
// singular vector of the n-step cocycle product. "graph" runs the block graph
// transform L_{m+1} = B_m L_m (A_m + C_m L_m)^{-1} on the reversed-word
// transposed cocycle: pushing a reference codimension-1 plane forward under
// that cocycle aligns it with the top right-singular plane of the original
// product, whose unit normal is the stable direction at the source point; the
// recursion certifies the alignment (the norms ||L_m|| decay geometrically
// exactly when the plane dynamics forgets its initial condition).

#include <algorithm>
#include <cmath>
#include <vector>

#include "ergolab/cocycle.hpp"
#include "ergolab/fit.hpp"
#include "ergolab/geometry.hpp"
#include "ergolab/parallel.hpp"

namespace ergolab {

// ---------------------------------------------------------------------------
// Orbits

struct Orbit {
  std::vector<SpherePoint> points;  // n+1
  std::vector<TangentFrame> frames; // n+1
  std::vector<Matrix> steps;        // n, frame-to-frame d x d
};

inline Orbit compute_orbit(const Model& model, const std::vector<int>& word,
                           const SpherePoint& x, int n) {
  if (static_cast<int>(word.size()) < n)
    throw InvalidConfig("word shorter than requested horizon");
  Orbit orb;
  orb.points.reserve(n + 1);
  orb.frames.reserve(n + 1);
  orb.steps.reserve(n);
  SpherePoint p = x;
  TangentFrame f = tangent_frame(p);
  orb.points.push_back(p);
  orb.frames.push_back(f);
  for (int k = 0; k < n; ++k) {
    Matrix m = step_tangent(model, word[k], p, f);
    orb.steps.push_back(std::move(m));
    orb.points.push_back(p);
    orb.frames.push_back(f);
  }
  return orb;
}

// Product steps[from] .. steps[to-1] (applied in that order) with the overall
// scale split off to avoid overflow over long horizons.
struct ScaledMatrix {
  Matrix m;
  double log_scale = 0;
};

inline ScaledMatrix scaled_product(const std::vector<Matrix>& steps, int from, int to) {
  const int d = steps.empty() ? 0 : steps[0].rows();
  ScaledMatrix acc{Matrix::identity(d), 0.0};
  for (int k = from; k < to; ++k) {
    acc.m = steps[k] * acc.m;
    double mx = acc.m.max_abs();
    if (mx > 1e120 || (mx < 1e-120 && mx > 0)) {
      acc.m.scale(1.0 / mx);
      acc.log_scale += std::log(mx);
    }
  }
  return acc;
}

inline double line_angle(const Vec& a, const Vec& b) {
  double c = std::abs(dot(a, b)) / (norm2(a) * norm2(b));
  return std::acos(std::min(1.0, c));
}

// deterministic sign fix for a line representative
inline void fix_sign(Vec& v) {
  int arg = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[arg])) arg = static_cast<int>(i);
  if (v[arg] < 0)
    for (double& c : v) c = -c;
}

// ---------------------------------------------------------------------------
// Stable direction

enum class StableMethod { svd, graph };

inline const char* to_string(StableMethod m) { return m == StableMethod::svd ? "svd" : "graph"; }

struct GraphBlockDiag {
  double a_inv_norm = 0; // ||A_m^{-1}||
  double b_abs = 0;      // |B_m|
  double l_before = 0;   // ||L_m||
  double l_after = 0;    // ||L_{m+1}||
  double hyp = 0;        // ||A_m^{-1} C_m L_m||
};

struct StableDirectionResult {
  Vec e_ss; // unit, source-frame coordinates at x
  StableMethod method = StableMethod::svd;
  int horizon = 0;
  double convergence_angle = 0;        // radians between horizons n/2 and n
  Vec graph_norm_history;              // ||L_m|| per block (graph method)
  std::vector<GraphBlockDiag> blocks;  // graph method diagnostics
};

struct StableOptions {
  double convergence_tol = 0.1;  // radians; larger angle raises NoConvergence
  double min_singular_gap = 2.0; // nats between the two smallest singular values
  int graph_block_len = 5;
  Vec graph_w_normal;            // initial plane normal; empty = random
  double graph_l0 = 0.1;         // initial ||L||
  int graph_max_resample = 4;
};

namespace detail {

// bottom right-singular vector plus the log gap separating it from the next
// singular value; a vanishing gap means the most contracted direction is not
// defined (zero bottom exponent, e.g. isometries)
inline Vec bottom_right_singular(const std::vector<Matrix>& steps, int n,
                                 double* log_gap = nullptr, int from = 0) {
  ScaledMatrix p = scaled_product(steps, from, n);
  Svd svd = jacobi_svd(p.m);
  const int d = svd.v.cols();
  if (log_gap)
    *log_gap = std::log(std::max(svd.sigma[d - 2], 1e-300)) -
               std::log(std::max(svd.sigma[d - 1], 1e-300));
  Vec v = svd.v.col(d - 1);
  fix_sign(v);
  return v;
}

struct GraphRun {
  Vec normal; // unit normal of the final pushed plane, at the source frame
  Vec history;
  std::vector<GraphBlockDiag> blocks;
  bool singular = false;
};

// One pass of the reversed-word transposed graph transform over steps[0..n).
inline GraphRun graph_transform_run(const std::vector<Matrix>& steps, int n, const Vec& w_normal,
                                    int block_len, double l0_norm) {
  const int d = steps[0].rows();
  GraphRun run;
  Matrix q_w = unit_complement(w_normal); // d x (d-1), basis of W
  Vec q = w_normal;                       // unit normal
  Vec l(d - 1, 0.0);                      // row vector W -> W^perp
  l[0] = l0_norm;
  run.history.push_back(norm2(l));
  int pos = n; // next factor is steps[pos-1]^T
  while (pos > 0) {
    int take = std::min(block_len, pos);
    Matrix blk = Matrix::identity(d);
    for (int t = 0; t < take; ++t) {
      blk = steps[pos - 1 - t].transposed() * blk;
    }
    pos -= take;
    Matrix v = blk * q_w; // d x (d-1)
    Qr f = qr_mgs(v);
    Matrix q_next = f.q;
    Matrix a_m = f.r; // (d-1) x (d-1)
    Vec gq = blk * q;
    Vec q_next_norm = orthonormal_complement(q_next).col(0);
    Vec c_m = q_next.transposed() * gq; // (d-1)
    double b_m = dot(q_next_norm, gq);
    // K = A + C L (outer product), L' = B L K^{-1}
    Matrix k(d - 1, d - 1);
    for (int i = 0; i < d - 1; ++i)
      for (int j = 0; j < d - 1; ++j) k(i, j) = a_m(i, j) + c_m[i] * l[j];
    Lu lu = lu_decompose(k.transposed());
    if (std::abs(lu_det(lu)) < 1e-250 || std::abs(b_m) < 1e-250) {
      run.singular = true;
      return run;
    }
    GraphBlockDiag diag;
    diag.l_before = norm2(l);
    Svd asvd = jacobi_svd(a_m);
    diag.a_inv_norm = 1.0 / asvd.sigma[d - 2];
    diag.b_abs = std::abs(b_m);
    // hyp = ||A^{-1} C L||, spectral norm of the rank-one (d-1)x(d-1) matrix
    {
      Matrix cl(d - 1, d - 1);
      for (int i = 0; i < d - 1; ++i)
        for (int j = 0; j < d - 1; ++j) cl(i, j) = c_m[i] * l[j];
      Lu alu = lu_decompose(a_m);
      Matrix acl(d - 1, d - 1);
      for (int j = 0; j < d - 1; ++j) acl.set_col(j, lu_solve(alu, cl.col(j)));
      diag.hyp = jacobi_svd(acl).sigma[0];
    }
    Vec y = lu_solve(lu, l);
    for (int i = 0; i < d - 1; ++i) l[i] = b_m * y[i];
    diag.l_after = norm2(l);
    run.blocks.push_back(diag);
    run.history.push_back(norm2(l));
    q_w = q_next;
    q = q_next_norm;
  }
  run.normal = q;
  fix_sign(run.normal);
  return run;
}

} // namespace detail

inline StableDirectionResult stable_direction(const Model& model, const std::vector<int>& word,
                                              const SpherePoint& x, int n, StableMethod method,
                                              RngStream* rng = nullptr,
                                              const StableOptions& opts = {}) {
  if (n < 2) throw InvalidConfig("stable_direction requires n >= 2");
  Orbit orb = compute_orbit(model, word, x, n);
  StableDirectionResult res;
  res.method = method;
  res.horizon = n;
  const int d = model.dimension();
  if (method == StableMethod::svd) {
    Vec half = detail::bottom_right_singular(orb.steps, n / 2);
    double gap = 0;
    res.e_ss = detail::bottom_right_singular(orb.steps, n, &gap);
    res.convergence_angle = line_angle(half, res.e_ss);
    if (gap < opts.min_singular_gap)
      throw NoConvergence("bottom singular value not separated (log gap " +
                          std::to_string(gap) + "), zero bottom exponent");
  } else {
    Vec w = opts.graph_w_normal;
    RngStream local = model.stream(0x677261ULL);
    RngStream& r = rng ? *rng : local;
    if (w.empty()) w = r.unit_vector(d);
    detail::GraphRun run;
    for (int attempt = 0;; ++attempt) {
      run = detail::graph_transform_run(orb.steps, n, w, opts.graph_block_len, opts.graph_l0);
      if (!run.singular) break;
      if (attempt >= opts.graph_max_resample)
        throw BlockSingular("graph transform block singular after resampling");
      w = r.unit_vector(d);
    }
    detail::GraphRun half =
        detail::graph_transform_run(orb.steps, n / 2, w, opts.graph_block_len, opts.graph_l0);
    res.e_ss = run.normal;
    res.graph_norm_history = run.history;
    res.blocks = run.blocks;
    res.convergence_angle = half.singular ? 0.0 : line_angle(half.normal, run.normal);
  }
  if (res.convergence_angle > opts.convergence_tol)
    throw NoConvergence("stable direction convergence angle " +
                        std::to_string(res.convergence_angle) + " rad at horizon " +
                        std::to_string(n));
  return res;
}

// ---------------------------------------------------------------------------
// Splitting constants

// Orbit data for V = the stable line along the orbit and W = V^perp(x) pushed
// forward: unit vectors v_k, cumulative log growth along V, orthonormal bases
// Q_k of W_k with the restricted steps S_k, unit normals q_k, and angles.
//
// The v_k are recomputed at every step from the suffix cocycle product rather
// than pushed forward: a pushed stable vector amplifies its O(eps) error at
// the rate of the exponent gap and is meaningless after ~36/(2 lambda) steps.
// The suffix bottom singular vector tracks the invariant line at x_k with a
// horizon that shrinks toward the end of the word, which is why callers must
// supply an orbit longer than the diagnostic window. The norm growth along V
// telescopes over per-step factors ||M_k v_k||, which stays accurate at any
// window length; W is genuinely pushed (plane pushing contracts errors).
struct SplittingOrbitData {
  std::vector<Matrix> steps;   // n_max of them (diagnostic window)
  Vec lg_v;                    // n_max+1 cumulative: log ||Df^k| V||
  std::vector<Vec> v;          // n_max+1 unit vectors spanning V_k
  std::vector<Matrix> w_basis; // n_max+1, d x (d-1)
  std::vector<Vec> w_normal;   // n_max+1 unit normals of W_k
  std::vector<Matrix> w_step;  // n_max: S_k = Q_{k+1}^T M_k Q_k
  Vec theta;                   // n_max+1 angles between V_k and W_k

  int horizon() const { return static_cast<int>(steps.size()); }
};

inline SplittingOrbitData splitting_orbit(const Orbit& orb_full, int n_max) {
  const int h = static_cast<int>(orb_full.steps.size());
  if (n_max >= h)
    throw InvalidConfig("splitting_orbit needs an orbit longer than the window");
  SplittingOrbitData data;
  data.steps.assign(orb_full.steps.begin(), orb_full.steps.begin() + n_max);
  data.lg_v.assign(n_max + 1, 0.0);
  data.v.resize(n_max + 1);
  data.w_basis.resize(n_max + 1);
  data.w_normal.resize(n_max + 1);
  data.w_step.resize(n_max);
  data.theta.assign(n_max + 1, 0.0);
  for (int k = 0; k <= n_max; ++k)
    data.v[k] = detail::bottom_right_singular(orb_full.steps, h, nullptr, k);
  for (int k = 0; k < n_max; ++k)
    data.lg_v[k + 1] = data.lg_v[k] + std::log(norm2(orb_full.steps[k] * data.v[k]));
  data.w_basis[0] = unit_complement(data.v[0]);
  data.w_normal[0] = data.v[0];
  for (int k = 0; k <= n_max; ++k) {
    if (k > 0) {
      Matrix wimg = orb_full.steps[k - 1] * data.w_basis[k - 1];
      Qr f = qr_mgs(wimg);
      data.w_basis[k] = f.q;
      data.w_step[k - 1] = f.r;
      data.w_normal[k] = orthonormal_complement(f.q).col(0);
    }
    double s = std::abs(dot(data.v[k], data.w_normal[k]));
    data.theta[k] = std::asin(std::min(1.0, s));
  }
  return data;
}

inline double log_norm_v(const SplittingOrbitData& d, int k, int j) {
  return d.lg_v[k + j] - d.lg_v[k];
}

// log con(Df^{k,j} | W_k) from the restricted steps
inline double log_con_w(const SplittingOrbitData& d, int k, int j) {
  const int dd = d.steps[0].rows();
  ScaledMatrix p{Matrix::identity(dd - 1), 0.0};
  for (int t = 0; t < j; ++t) {
    p.m = d.w_step[k + t] * p.m;
    double mx = p.m.max_abs();
    if (mx > 1e120) {
      p.m.scale(1.0 / mx);
      p.log_scale += std::log(mx);
    }
  }
  Vec sv = jacobi_svd(p.m).sigma;
  return std::log(sv[dd - 2]) + p.log_scale;
}

// log || P_{W_{k+j}^perp} Df^{k,j} q_k ||
inline double log_proj_w(const SplittingOrbitData& d, int k, int j) {
  Vec u = d.w_normal[k];
  double logs = 0;
  for (int t = 0; t < j; ++t) {
    u = d.steps[k + t] * u;
    double n = norm2(u);
    logs += std::log(n);
    for (double& c : u) c /= n;
  }
  return logs + std::log(std::abs(dot(u, d.w_normal[k + j])));
}

struct SplittingReport {
  double kappa = 0, kappa_prime = 0, eps = 0;
  double c_norm = 0;     // minimal constant for the domination inequality
  double c_angle = 0;    // minimal constant for the angle lower bound
  double c_contract = 0; // minimal constant for the contraction inequality
  int n_max = 0;
  int direction_horizon = 0;
};

// Defect maxima over 0 <= k, 1 <= j, k+j <= n_max. Each c_* is the exact
// maximum of the corresponding defect, so the minimal constant making the
// inequality hold on the tested range.
inline SplittingReport splitting_constants_from(const SplittingOrbitData& data, double kappa,
                                                double kappa_prime, double eps) {
  const int n = data.horizon();
  SplittingReport rep;
  rep.kappa = kappa;
  rep.kappa_prime = kappa_prime;
  rep.eps = eps;
  rep.n_max = n;
  double c_norm = -1e300, c_contract = -1e300, c_angle = -1e300;
  const int dd = data.steps[0].rows();
  for (int k = 0; k < n; ++k) {
    ScaledMatrix p{Matrix::identity(dd - 1), 0.0};
    for (int j = 1; k + j <= n; ++j) {
      p.m = data.w_step[k + j - 1] * p.m;
      double mx = p.m.max_abs();
      if (mx > 1e120) {
        p.m.scale(1.0 / mx);
        p.log_scale += std::log(mx);
      }
      double log_con = std::log(jacobi_svd(p.m).sigma[dd - 2]) + p.log_scale;
      double lv = log_norm_v(data, k, j);
      c_norm = std::max(c_norm, lv - log_con + kappa * j - eps * k);
      c_contract = std::max(c_contract, lv + kappa_prime * j - eps * k);
    }
  }
  for (int k = 0; k <= n; ++k)
    c_angle = std::max(c_angle, -std::log(data.theta[k]) - eps * k);
  rep.c_norm = c_norm;
  rep.c_angle = c_angle;
  rep.c_contract = c_contract;
  return rep;
}

// The stable direction is computed at horizon n_max + margin. The margin is
// required: the pushforward of a horizon-H direction only tracks the true
// invariant line up to step k with error ~ exp(-2 lambda (H - k)), so the
// diagnostic window must end well before the direction horizon.
inline int splitting_direction_horizon(int n_max, int margin = -1) {
  if (margin < 0) margin = std::max(50, n_max / 2);
  return n_max + margin;
}

inline SplittingReport splitting_constant(const Model& model, const std::vector<int>& word,
                                          const SpherePoint& x, double kappa, double kappa_prime,
                                          double eps, int n_max,
                                          StableMethod method = StableMethod::svd,
                                          int margin = -1) {
  if (kappa <= 0 || kappa_prime <= 0) throw InvalidConfig("kappa, kappa' must be positive");
  if (eps >= std::min(kappa, kappa_prime) / 10.0)
    throw InvalidConfig("eps must be < min(kappa, kappa')/10");
  const int horizon = splitting_direction_horizon(n_max, margin);
  // raises NoConvergence when the bottom exponent is not separated
  StableDirectionResult dir = stable_direction(model, word, x, horizon, method);
  Orbit orb = compute_orbit(model, word, x, horizon);
  SplittingOrbitData data = splitting_orbit(orb, n_max);
  SplittingReport rep = splitting_constants_from(data, kappa, kappa_prime, eps);
  rep.direction_horizon = dir.horizon;
  return rep;
}

// ---------------------------------------------------------------------------
// Splitting tail over random itineraries

struct SplittingTailReport {
  Vec c_values; // per converged trial: max of the three constants
  int n_failed = 0;
  Vec thresholds;
  Vec log_tail; // log P(c > t)
  double slope = 0;
  double r2 = 0;
  bool fit_ok = false;
};

inline SplittingTailReport splitting_tail(const Model& model, const SpherePoint& x, double kappa,
                                          double kappa_prime, double eps, int n_max, long trials,
                                          int threads = 1) {
  if (trials < 32) throw InsufficientSamples("splitting_tail requires trials >= 32");
  std::vector<double> values(trials, 0.0);
  std::vector<char> ok(trials, 0);
  const int word_len = splitting_direction_horizon(n_max);
  parallel_for(static_cast<std::size_t>(trials), threads, [&](std::size_t t) {
    RngStream rng = model.stream(0x7461696cULL).derive(t);
    MapWord w = model.sample_word(word_len, rng);
    try {
      SplittingReport rep =
          splitting_constant(model, w.indices, x, kappa, kappa_prime, eps, n_max);
      values[t] = std::max({rep.c_norm, rep.c_angle, rep.c_contract});
      ok[t] = 1;
    } catch (const NumericalError&) {
      ok[t] = 0;
    }
  });
  SplittingTailReport rep;
  for (long t = 0; t < trials; ++t) {
    if (ok[t])
      rep.c_values.push_back(values[t]);
    else
      ++rep.n_failed;
  }
  if (rep.c_values.size() < 16) {
    rep.fit_ok = false;
    return rep;
  }
  Vec sorted = rep.c_values;
  std::sort(sorted.begin(), sorted.end());
  const int levels = 12;
  for (int i = 0; i < levels; ++i) {
    double qfrac = 0.5 + 0.45 * i / (levels - 1); // quantiles 50%..95%
    std::size_t idx = static_cast<std::size_t>(qfrac * (sorted.size() - 1));
    double t = sorted[idx];
    double p =
        static_cast<double>(sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), t)) /
        static_cast<double>(sorted.size());
    if (p <= 0) continue;
    if (!rep.thresholds.empty() && t <= rep.thresholds.back()) continue;
    rep.thresholds.push_back(t);
    rep.log_tail.push_back(std::log(p));
  }
  LineFit fit = fit_line(rep.thresholds, rep.log_tail);
  rep.slope = fit.slope;
  rep.r2 = fit.r2;
  rep.fit_ok = !fit.degenerate && rep.thresholds.size() >= 4;
  return rep;
}

// ---------------------------------------------------------------------------
// Angle tail (non-determinism of the stable direction)

struct AngleTailReport {
  Vec rho_list;
  Vec tail_probs; // P(angle(E^ss, W) < rho)
  double alpha_fit = 0;
  double c_prime_fit = 0;
  double r2 = 0;
  bool degenerate = false;
  int horizon = 0;
  int n_failed = 0;
};

inline AngleTailReport angle_tail(const Model& model, const SpherePoint& x, const Vec& w_normal,
                                  const Vec& rho_list, long trials, int horizon = 100,
                                  int threads = 1) {
  for (double r : rho_list)
    if (r <= 0 || r >= 1.5707963267948966)
      throw InvalidConfig("rho values must lie in (0, pi/2)");
  if (trials < 32) throw InsufficientSamples("angle_tail requires trials >= 32");
  Vec angles(trials, -1.0);
  parallel_for(static_cast<std::size_t>(trials), threads, [&](std::size_t t) {
    RngStream rng = model.stream(0x616e67ULL).derive(t);
    MapWord w = model.sample_word(horizon, rng);
    try {
      StableDirectionResult dir =
          stable_direction(model, w.indices, x, horizon, StableMethod::svd);
      double s = std::abs(dot(dir.e_ss, w_normal));
      angles[t] = std::asin(std::min(1.0, s));
    } catch (const NumericalError&) {
      angles[t] = -1.0;
    }
  });
  AngleTailReport rep;
  rep.horizon = horizon;
  rep.rho_list = rho_list;
  Vec good;
  for (double a : angles) {
    if (a < 0)
      ++rep.n_failed;
    else
      good.push_back(a);
  }
  if (good.size() < static_cast<std::size_t>(trials) / 2)
    throw NoConvergence("angle_tail: stable direction failed on most itineraries");
  rep.tail_probs.resize(rho_list.size());
  for (std::size_t i = 0; i < rho_list.size(); ++i) {
    long c = 0;
    for (double a : good)
      if (a < rho_list[i]) ++c;
    rep.tail_probs[i] = static_cast<double>(c) / static_cast<double>(good.size());
  }
  double amin = 1e300, amax = -1e300;
  for (double a : good) {
    amin = std::min(amin, a);
    amax = std::max(amax, a);
  }
  Vec lx, ly;
  for (std::size_t i = 0; i < rho_list.size(); ++i)
    if (rep.tail_probs[i] > 0) {
      lx.push_back(std::log(rho_list[i]));
      ly.push_back(std::log(rep.tail_probs[i]));
    }
  if (lx.size() < 2 || amax - amin < 1e-12) {
    rep.degenerate = true;
    return rep;
  }
  LineFit fit = fit_line(lx, ly);
  rep.alpha_fit = fit.slope;
  rep.c_prime_fit = std::exp(fit.intercept);
  rep.r2 = fit.r2;
  rep.degenerate = fit.degenerate;
  return rep;
}

// ---------------------------------------------------------------------------
// Frame determinant statistics

// theta_1 = sup { theta : P(|det| > theta) > theta }, from the empirical law.
inline double theta1_estimate(Vec dets) {
  std::sort(dets.begin(), dets.end());
  auto tail_prob = [&](double t) {
    return static_cast<double>(dets.end() - std::upper_bound(dets.begin(), dets.end(), t)) /
           static_cast<double>(dets.size());
  };
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    if (tail_prob(mid) > mid)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

struct FrameDetReport {
  Vec dets;
  double theta1 = 0;
  double theta1_lo = 0, theta1_hi = 0; // bootstrap 95% interval
  int horizon = 0;
  int n_failed = 0;
};

inline FrameDetReport frame_det_stats(const Model& model, const SpherePoint& x, long trials,
                                      int horizon = 100, int threads = 1, int bootstrap = 200) {
  if (trials < 32) throw InsufficientSamples("frame_det_stats requires trials >= 32");
  const int d = model.dimension();
  Vec dets(trials, -1.0);
  parallel_for(static_cast<std::size_t>(trials), threads, [&](std::size_t t) {
    RngStream rng = model.stream(0x646574ULL).derive(t);
    Matrix dirs(d, d);
    bool fail = false;
    for (int c = 0; c < d; ++c) {
      MapWord w = model.sample_word(horizon, rng);
      try {
        StableDirectionResult dir =
            stable_direction(model, w.indices, x, horizon, StableMethod::svd);
        dirs.set_col(c, dir.e_ss);
      } catch (const NumericalError&) {
        fail = true;
        break;
      }
    }
    dets[t] = fail ? -1.0 : std::abs(det(dirs));
  });
  FrameDetReport rep;
  rep.horizon = horizon;
  for (double v : dets) {
    if (v < 0)
      ++rep.n_failed;
    else
      rep.dets.push_back(v);
  }
  if (rep.dets.size() < static_cast<std::size_t>(trials) / 2)
    throw NoConvergence("frame_det_stats: stable direction failed on most tuples");
  rep.theta1 = theta1_estimate(rep.dets);
  RngStream boot(model.seed(), 0x626f6fULL);
  Vec thetas(bootstrap);
  for (int b = 0; b < bootstrap; ++b) {
    Vec resample(rep.dets.size());
    for (std::size_t i = 0; i < resample.size(); ++i)
      resample[i] = rep.dets[boot.next_u64() % rep.dets.size()];
    thetas[b] = theta1_estimate(resample);
  }
  std::sort(thetas.begin(), thetas.end());
  rep.theta1_lo = thetas[static_cast<std::size_t>(0.025 * (bootstrap - 1))];
  rep.theta1_hi = thetas[static_cast<std::size_t>(0.975 * (bootstrap - 1))];
  return rep;
}

// ---------------------------------------------------------------------------
// Stable curve tracing

struct CurveTrace {
  std::vector<SpherePoint> points; // ordered along the curve
  int base_index = 0;              // index of the starting point x
  double h_arc = 0;
  double goodness_constant = 0; // minimal c such that the trace is (c,2)-good at x
  double crossing_ratio = 0;    // length inside B(x, arclen) divided by arclen
};

namespace detail {

inline Vec stable_field_ambient(const Model& model, const std::vector<int>& word,
                                const SpherePoint& y, int horizon) {
  StableDirectionResult dir = stable_direction(model, word, y, horizon, StableMethod::svd);
  TangentFrame f = tangent_frame(y);
  return f.to_ambient(dir.e_ss);
}

// log map of the sphere at x, expressed in the frame at x
inline Vec chart_coords(const TangentFrame& frame, const SpherePoint& y) {
  double c = std::min(1.0, std::max(-1.0, dot(frame.base.x, y.x)));
  double theta = std::acos(c);
  Vec u = y.x;
  axpy(-c, frame.base.x, u);
  double n = norm2(u);
  if (n < 1e-14) return Vec(frame.dim(), 0.0);
  return frame.to_frame(scaled(u, theta / n));
}

} // namespace detail

inline CurveTrace trace_stable_curve(const Model& model, const std::vector<int>& word,
                                     const SpherePoint& x, double arclen, double h_arc,
                                     int dir_horizon = 60) {
  CurveTrace trace;
  trace.h_arc = h_arc;
  if (arclen <= 0) {
    trace.points.push_back(x);
    trace.base_index = 0;
    trace.goodness_constant = 0;
    trace.crossing_ratio = 0;
    return trace;
  }
  if (h_arc <= 0 || h_arc > arclen) throw InvalidConfig("h_arc must lie in (0, arclen]");
  const int n_steps = static_cast<int>(std::round(arclen / h_arc));
  Vec v0 = detail::stable_field_ambient(model, word, x, dir_horizon);
  auto advance = [&](SpherePoint y, Vec v_prev, std::vector<SpherePoint>& out) {
    for (int k = 0; k < n_steps; ++k) {
      Vec v1 = detail::stable_field_ambient(model, word, y, dir_horizon);
      double d1 = dot(v1, v_prev);
      if (std::abs(d1) < 0.05)
        throw SignFlip("direction field continuity lost at arclength " +
                       std::to_string(k * h_arc));
      if (d1 < 0) for (double& c : v1) c = -c;
      Vec xm = y.x;
      axpy(0.5 * h_arc, v1, xm);
      SpherePoint mid = sphere_point(std::move(xm));
      Vec v2 = detail::stable_field_ambient(model, word, mid, dir_horizon);
      double d2 = dot(v2, v1);
      if (std::abs(d2) < 0.05)
        throw SignFlip("direction field continuity lost at arclength " +
                       std::to_string(k * h_arc));
      if (d2 < 0) for (double& c : v2) c = -c;
      Vec xn = y.x;
      axpy(h_arc, v2, xn);
      y = sphere_point(std::move(xn));
      out.push_back(y);
      v_prev = v2;
    }
  };
  std::vector<SpherePoint> fwd, bwd;
  advance(x, v0, fwd);
  advance(x, scaled(v0, -1.0), bwd);
  trace.points.reserve(fwd.size() + bwd.size() + 1);
  for (auto it = bwd.rbegin(); it != bwd.rend(); ++it) trace.points.push_back(*it);
  trace.base_index = static_cast<int>(trace.points.size());
  trace.points.push_back(x);
  for (const SpherePoint& p : fwd) trace.points.push_back(p);

  // goodness: second differences of the graph over the tangent line in the
  // exponential chart at x, minimized over admissible window radii
  TangentFrame frame = tangent_frame(x);
  const int m = static_cast<int>(trace.points.size());
  Vec vdir = frame.to_frame(v0);
  vdir = normalized(vdir);
  Vec ts(m);
  std::vector<Vec> ws(m);
  for (int i = 0; i < m; ++i) {
    Vec z = detail::chart_coords(frame, trace.points[i]);
    double t = dot(z, vdir);
    Vec w = z;
    axpy(-t, vdir, w);
    ts[i] = t;
    ws[i] = w;
  }
  double best = 1e300;
  for (int rad = 1; rad <= n_steps; ++rad) {
    int lo = trace.base_index - rad, hi = trace.base_index + rad;
    if (lo < 0 || hi >= m) break;
    double window = std::min(std::abs(ts[lo]), std::abs(ts[hi]));
    if (window <= 0) continue;
    double c2 = 0;
    for (int i = lo; i <= hi; ++i) {
      c2 = std::max(c2, norm2(ws[i]));
      if (i > lo) {
        double dt = ts[i] - ts[i - 1];
        Vec dw = ws[i];
        axpy(-1.0, ws[i - 1], dw);
        if (std::abs(dt) > 1e-12) c2 = std::max(c2, norm2(dw) / std::abs(dt));
      }
      if (i > lo && i < hi) {
        double dt = 0.5 * (ts[i + 1] - ts[i - 1]);
        Vec d2w = ws[i + 1];
        axpy(-2.0, ws[i], d2w);
        axpy(1.0, ws[i - 1], d2w);
        if (std::abs(dt) > 1e-12) c2 = std::max(c2, norm2(d2w) / (dt * dt));
      }
    }
    best = std::min(best, std::max(c2, 1.0 / window));
  }
  trace.goodness_constant = best == 1e300 ? 0.0 : best;

  // crossing ratio for the ball of radius arclen
  double inside = 0;
  for (int i = trace.base_index; i + 1 < m; ++i) {
    if (geodesic_distance(x, trace.points[i + 1]) > arclen) break;
    inside += h_arc;
  }
  for (int i = trace.base_index; i - 1 >= 0; --i) {
    if (geodesic_distance(x, trace.points[i - 1]) > arclen) break;
    inside += h_arc;
  }
  trace.crossing_ratio = inside / arclen;
  return trace;
}

} // namespace ergolab
