#pragma once

// Real spherical harmonics on S^2 and deterministic product quadrature
// (Gauss-Legendre in cos(theta) x uniform azimuthal grid). Harmonics are
// orthonormal with respect to the normalized surface measure; the rule
// make_sphere_quadrature(n_theta) integrates polynomials of degree up to
// 2*n_theta - 2 exactly, so n_theta = L+1 handles products of degree-L
// harmonics.

#include <cmath>
#include <vector>

#include "ergolab/common.hpp"
#include "ergolab/geometry.hpp"

namespace ergolab {

struct SphereQuadrature {
  std::vector<SpherePoint> nodes;
  Vec weights; // sum to 1
};

namespace detail {

// Legendre P_n(x) and derivative by recurrence
inline void legendre_pair(int n, double x, double& p, double& dp) {
  double p0 = 1.0, p1 = x;
  if (n == 0) {
    p = 1.0;
    dp = 0.0;
    return;
  }
  for (int k = 2; k <= n; ++k) {
    double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  p = p1;
  dp = n * (x * p1 - p0) / (x * x - 1.0);
}

} // namespace detail

inline void gauss_legendre(int n, Vec& nodes, Vec& weights) {
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(3.141592653589793 * (i + 0.75) / (n + 0.5));
    double p = 0, dp = 1;
    for (int it = 0; it < 100; ++it) {
      detail::legendre_pair(n, x, p, dp);
      double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    detail::legendre_pair(n, x, p, dp);
    nodes[i] = x;
    weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

inline SphereQuadrature make_sphere_quadrature(int n_theta) {
  if (n_theta < 1) throw InvalidConfig("n_theta must be positive");
  const int n_phi = 2 * n_theta + 1;
  Vec gl_nodes, gl_weights;
  gauss_legendre(n_theta, gl_nodes, gl_weights);
  SphereQuadrature q;
  q.nodes.reserve(static_cast<std::size_t>(n_theta) * n_phi);
  q.weights.reserve(q.nodes.capacity());
  for (int i = 0; i < n_theta; ++i) {
    double z = gl_nodes[i];
    double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    for (int j = 0; j < n_phi; ++j) {
      double phi = 2.0 * 3.141592653589793 * (j + 0.5) / n_phi;
      q.nodes.push_back(SpherePoint{{s * std::cos(phi), s * std::sin(phi), z}});
      q.weights.push_back(gl_weights[i] / 2.0 / n_phi);
    }
  }
  return q;
}

// quadrature rule integrating products of degree-L harmonics exactly
inline SphereQuadrature quadrature_for_degree(int degree) {
  return make_sphere_quadrature(degree / 2 + 1);
}

// ---------------------------------------------------------------------------
// Real spherical harmonics (fully normalized, normalized measure)

inline int harmonic_index(int l, int m) { return l * l + (m + l); }
inline int harmonic_count(int max_l) { return (max_l + 1) * (max_l + 1); }

// All Y_{l,m} for l <= max_l at a point, flat-indexed by harmonic_index.
inline Vec eval_harmonics(int max_l, const SpherePoint& p) {
  if (p.ambient_dim() != 3) throw InvalidConfig("harmonics require S^2");
  const double z = p.x[2];
  const double rho = std::hypot(p.x[0], p.x[1]);
  const double phi = std::atan2(p.x[1], p.x[0]);
  const int lmx = max_l;
  // associated Legendre values P_l^m(z), no Condon-Shortley phase
  std::vector<Vec> plm(lmx + 1, Vec(lmx + 1, 0.0));
  plm[0][0] = 1.0;
  for (int m = 1; m <= lmx; ++m) plm[m][m] = plm[m - 1][m - 1] * (2 * m - 1) * rho;
  for (int m = 0; m < lmx; ++m) plm[m + 1][m] = z * (2 * m + 1) * plm[m][m];
  for (int m = 0; m <= lmx; ++m)
    for (int l = m + 2; l <= lmx; ++l)
      plm[l][m] = ((2 * l - 1) * z * plm[l - 1][m] - (l + m - 1) * plm[l - 2][m]) / (l - m);
  Vec out(harmonic_count(lmx));
  for (int l = 0; l <= lmx; ++l) {
    for (int m = 0; m <= l; ++m) {
      double norm = 2.0 * l + 1.0;
      for (int k = l - m + 1; k <= l + m; ++k) norm /= k;
      norm = std::sqrt(norm);
      if (m == 0) {
        out[harmonic_index(l, 0)] = norm * plm[l][0];
      } else {
        double base = std::sqrt(2.0) * norm * plm[l][m];
        out[harmonic_index(l, m)] = base * std::cos(m * phi);
        out[harmonic_index(l, -m)] = base * std::sin(m * phi);
      }
    }
  }
  return out;
}

inline double eval_harmonic(int l, int m, const SpherePoint& p) {
  return eval_harmonics(l, p)[harmonic_index(l, m)];
}

} // namespace ergolab
