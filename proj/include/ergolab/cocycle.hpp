#pragma once

// Linear-algebra layer over the derivative cocycle: tangent maps in frames,
// Lyapunov spectra by the QR method, restricted conorms/determinants and
// covector dynamics.

#include <cmath>
#include <string>
#include <vector>

#include "ergolab/common.hpp"
#include "ergolab/geometry.hpp"
#include "ergolab/linalg.hpp"

namespace ergolab {

struct TangentMap {
  Matrix m; // d x d, target-frame coordinates of the derivative
  TangentFrame source;
  TangentFrame target;
};

// D_x f_word expressed in the given frames:
//   m = target^T * (ambient Jacobian chain) * source.
inline TangentMap tangent_derivative(const Model& model, const MapWord& word,
                                     const SpherePoint& x, const TangentFrame& source,
                                     const TangentFrame& target) {
  if (chordal_distance(source.base, x) > 1e-9)
    throw FrameMismatch("source frame not based at x");
  SpherePoint p = x;
  Matrix chain = source.columns; // (d+1) x d
  for (int idx : word.indices) {
    Matrix jac = model.generator_jacobian(idx, p);
    chain = jac * chain;
  }
  if (chordal_distance(target.base, p) > 1e-9)
    throw FrameMismatch("target frame not based at f(x)");
  return TangentMap{target.columns.transposed() * chain, source, target};
}

inline TangentMap tangent_derivative(const Model& model, const MapWord& word,
                                     const SpherePoint& x) {
  SpherePoint y = apply_word(model, word, x);
  return tangent_derivative(model, word, x, tangent_frame(x), tangent_frame(y));
}

// Single generator step; advances the point and frame. Used by the orbit
// routines so that frames are always rebuilt from the deterministic rule.
inline Matrix step_tangent(const Model& model, int gen_index, SpherePoint& p,
                           TangentFrame& frame) {
  SpherePoint q = p;
  Matrix jac = model.generator_jacobian(gen_index, q);
  TangentFrame next = tangent_frame(q);
  Matrix m = next.columns.transposed() * (jac * frame.columns);
  p = q;
  frame = next;
  return m;
}

inline double volume_check(const Model& model, const MapWord& word, const SpherePoint& x) {
  return det(tangent_derivative(model, word, x).m);
}

// ---------------------------------------------------------------------------
// Codimension-1 planes and restricted statistics

struct CodimOnePlane {
  SpherePoint base;
  Vec unit_normal; // u_E in frame coordinates at base, unit length
};

struct RestrictedStats {
  double conorm;             // con(M|E), smallest singular value on E
  double abs_det_restricted; // |det(M|E)|, product of singular values on E
  double proj_norm;          // || P_{(ME)^perp} M u_E ||
};

inline RestrictedStats restricted_stats(const TangentMap& map, const CodimOnePlane& plane) {
  if (std::abs(norm2(plane.unit_normal) - 1.0) > 1e-12)
    throw DegeneratePlane("plane normal is not unit length");
  if (chordal_distance(plane.base, map.source.base) > 1e-9)
    throw FrameMismatch("plane not based at the map source");
  const int d = map.m.rows();
  Matrix basis_e = unit_complement(plane.unit_normal); // d x (d-1)
  Matrix b = map.m * basis_e;                          // d x (d-1)
  Svd svd = jacobi_svd(b);
  double conorm = svd.sigma[d - 2];
  double det_restricted = 1.0;
  for (double s : svd.sigma) det_restricted *= s;
  // unit vector orthogonal to the image plane ME
  Matrix image(d, d - 1);
  for (int j = 0; j < d - 1; ++j) image.set_col(j, svd.u.col(j));
  Vec w = orthonormal_complement(image).col(0);
  Vec mu = map.m * plane.unit_normal;
  double proj = std::abs(dot(w, mu));
  return RestrictedStats{conorm, det_restricted, proj};
}

// log ||(M^T)^{-1} xi|| for a unit covector xi in source-frame coordinates;
// for det M = 1 this equals the log (d-1)-volume expansion of M on xi^perp.
inline double coexpansion_integrand(const TangentMap& map, const Vec& xi) {
  if (std::abs(norm2(xi) - 1.0) > 1e-12)
    throw DegeneratePlane("covector is not unit length");
  Lu f = lu_decompose(map.m.transposed());
  double dt = std::abs(lu_det(f));
  if (!(dt > 1e-250))
    throw SingularMap("tangent map not invertible to working precision");
  Vec z = lu_solve(f, xi);
  return std::log(norm2(z));
}

// ---------------------------------------------------------------------------
// Lyapunov spectrum (QR method)

struct LyapunovReport {
  Vec exponents;      // descending, nats per step
  long n_steps = 0;
  double residual_sum = 0; // |sum of exponents|
};

struct LyapunovOptions {
  int k_qr = 1;               // re-orthonormalization cadence, 1..10
  double burn_in_frac = 0.1;  // prefix discarded from the averages
};

inline LyapunovReport lyapunov_spectrum(const Model& model, const SpherePoint& x0, long n,
                                        RngStream& rng, const LyapunovOptions& opts = {}) {
  if (n < 1) throw InvalidConfig("lyapunov_spectrum requires n >= 1");
  if (opts.k_qr < 1 || opts.k_qr > 10) throw InvalidConfig("k_qr must be in 1..10");
  const int d = model.dimension();
  const long burn = static_cast<long>(opts.burn_in_frac * static_cast<double>(n));
  SpherePoint p = x0;
  TangentFrame frame = tangent_frame(p);
  Matrix q = Matrix::identity(d);
  Vec sums(d, 0.0);
  long counted = 0;
  long pending = 0;
  for (long k = 0; k < n; ++k) {
    int idx = model.sample_index(rng);
    Matrix m = step_tangent(model, idx, p, frame);
    q = m * q;
    ++pending;
    if (pending == opts.k_qr || k == n - 1) {
      Qr f = qr_mgs(q);
      for (int i = 0; i < d; ++i) {
        double rii = f.r(i, i);
        if (!(rii > 1e-300))
          throw NumericalBreakdown("R diagonal underflow; reduce k_qr");
        if (k >= burn) sums[i] += std::log(rii);
      }
      q = f.q;
      if (k >= burn) counted += pending;
      pending = 0;
    }
  }
  LyapunovReport rep;
  rep.n_steps = n;
  rep.exponents = sums;
  for (double& e : rep.exponents) e /= static_cast<double>(counted);
  std::stable_sort(rep.exponents.begin(), rep.exponents.end(), std::greater<double>());
  double s = 0;
  for (double e : rep.exponents) s += e;
  rep.residual_sum = std::abs(s);
  return rep;
}

} // namespace ergolab
