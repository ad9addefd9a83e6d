#pragma once

// Statistical consequences: correlation decay, the central limit theorem with
// the series variance formula, and an L^2-Galerkin proxy for the spectral gap
// of the one-step generator on S^2.

#include <cmath>
#include <memory>
#include <vector>

#include "ergolab/fit.hpp"
#include "ergolab/geometry.hpp"
#include "ergolab/harmonics.hpp"
#include "ergolab/parallel.hpp"
#include "ergolab/sobolev.hpp"

namespace ergolab {

// ---------------------------------------------------------------------------
// Observables

class Observable {
public:
  enum class Kind { coordinate, harmonic, bitmap };

  static Observable coordinate(int index) {
    Observable o;
    o.kind_ = Kind::coordinate;
    o.index_ = index;
    return o;
  }
  static Observable harmonic(int l, int m) {
    Observable o;
    o.kind_ = Kind::harmonic;
    o.l_ = l;
    o.m_ = m;
    return o;
  }
  // indicator of a planar bitmap seen through the orthographic chart of the
  // upper hemisphere (grid coordinates = first d ambient coordinates)
  static Observable bitmap(std::shared_ptr<const GridSet> set) {
    Observable o;
    o.kind_ = Kind::bitmap;
    o.set_ = std::move(set);
    return o;
  }
  static Observable zero() { return coordinate(-1); }

  double eval(const SpherePoint& p) const {
    double v = 0;
    switch (kind_) {
      case Kind::coordinate:
        v = index_ < 0 ? 0.0 : p.x[index_];
        break;
      case Kind::harmonic:
        v = eval_harmonic(l_, m_, p);
        break;
      case Kind::bitmap: {
        if (p.x.back() <= 0) {
          v = 0.0;
        } else {
          Vec chart(p.x.begin(), p.x.end() - 1);
          v = set_->contains(chart) ? 1.0 : 0.0;
        }
        break;
      }
    }
    return v - offset_;
  }

  bool mean_zero() const { return mean_zero_; }

  // subtract the quadrature estimate of the mean
  Observable with_mean_subtracted(const SphereQuadrature& quad) const {
    Observable o = *this;
    o.offset_ = 0.0;
    double mean = 0;
    for (std::size_t i = 0; i < quad.nodes.size(); ++i)
      mean += quad.weights[i] * o.eval(quad.nodes[i]);
    o.offset_ = offset_ + mean;
    o.mean_zero_ = true;
    double residual = 0;
    for (std::size_t i = 0; i < quad.nodes.size(); ++i)
      residual += quad.weights[i] * o.eval(quad.nodes[i]);
    if (std::abs(residual) > 1e-6)
      throw NumericalBreakdown("mean subtraction residual above 1e-6");
    return o;
  }

private:
  Kind kind_ = Kind::coordinate;
  int index_ = 0, l_ = 0, m_ = 0;
  std::shared_ptr<const GridSet> set_;
  bool mean_zero_ = false;
  double offset_ = 0.0;
};

inline double quadrature_mean(const Observable& phi, const SphereQuadrature& quad) {
  double s = 0;
  for (std::size_t i = 0; i < quad.nodes.size(); ++i)
    s += quad.weights[i] * phi.eval(quad.nodes[i]);
  return s;
}

// ---------------------------------------------------------------------------
// Correlation decay

struct MixingReport {
  std::vector<int> n_list;
  Vec correlations;      // E[ int phi (psi o f^n) ] - int phi int psi
  double fitted_theta = 1.0; // exp(slope) of log|corr| vs n
  double r2 = 0;
  double c_fit = 0;      // exp(intercept)
  bool non_mixing = false;
};

struct MixingOptions {
  int quad_n_theta = 8;
  int threads = 1;
};

inline MixingReport correlation(const Model& model, const Observable& phi,
                                const Observable& psi, const std::vector<int>& n_list,
                                long n_mc, const MixingOptions& opts = {}) {
  if (n_mc < 1000) throw InsufficientSamples("correlation requires n_mc >= 1000");
  for (std::size_t i = 1; i < n_list.size(); ++i)
    if (n_list[i] <= n_list[i - 1]) throw InvalidConfig("n_list must be increasing");
  SphereQuadrature quad = make_sphere_quadrature(opts.quad_n_theta);
  const int n_max = n_list.back();
  const std::size_t nodes = quad.nodes.size();
  Vec phi_at_nodes(nodes);
  for (std::size_t q = 0; q < nodes; ++q) phi_at_nodes[q] = phi.eval(quad.nodes[q]);
  std::vector<Vec> partial(n_mc);
  parallel_for(static_cast<std::size_t>(n_mc), opts.threads, [&](std::size_t s) {
    RngStream rng = model.stream(0x6d6978ULL).derive(s);
    MapWord word = model.sample_word(n_max, rng);
    Vec acc(n_list.size(), 0.0);
    for (std::size_t q = 0; q < nodes; ++q) {
      SpherePoint p = quad.nodes[q];
      std::size_t ni = 0;
      for (int k = 1; k <= n_max; ++k) {
        p = model.apply_generator(word.indices[k - 1], p);
        if (ni < n_list.size() && n_list[ni] == k) {
          acc[ni] += quad.weights[q] * phi_at_nodes[q] * psi.eval(p);
          ++ni;
        }
      }
    }
    partial[s] = std::move(acc);
  });
  MixingReport rep;
  rep.n_list = n_list;
  rep.correlations.assign(n_list.size(), 0.0);
  for (long s = 0; s < n_mc; ++s)
    for (std::size_t i = 0; i < n_list.size(); ++i) rep.correlations[i] += partial[s][i];
  const double mean_product = quadrature_mean(phi, quad) * quadrature_mean(psi, quad);
  for (double& c : rep.correlations) c = c / static_cast<double>(n_mc) - mean_product;
  Vec xs, ys;
  for (std::size_t i = 0; i < n_list.size(); ++i)
    if (std::abs(rep.correlations[i]) > 1e-13) {
      xs.push_back(n_list[i]);
      ys.push_back(std::log(std::abs(rep.correlations[i])));
    }
  LineFit fit = fit_line(xs, ys);
  if (fit.degenerate) {
    rep.non_mixing = false; // all correlations at the noise floor: fast mixing
    rep.fitted_theta = 0.0;
    rep.r2 = 1.0;
    return rep;
  }
  rep.fitted_theta = std::exp(std::min(0.0, fit.slope));
  rep.r2 = fit.r2;
  rep.c_fit = std::exp(fit.intercept);
  rep.non_mixing = fit.slope > -1e-4 || fit.r2 < 0.5;
  if (fit.slope > -1e-4) rep.fitted_theta = 1.0;
  return rep;
}

// ---------------------------------------------------------------------------
// Central limit theorem

struct CltReport {
  double sigma2_formula = 0;
  double sigma2_empirical = 0;
  double ks_distance = 0;
  long n_steps = 0;
  long trials = 0;
  int truncation_n_star = 0;
  Vec series_terms; // correlation(n) for n = 1..n_star
};

struct CltOptions {
  long n_mc_corr = 4000; // samples for the series terms
  int quad_n_theta = 8;
  int threads = 1;
};

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline CltReport clt(const Model& model, const Observable& phi, long n_steps, long trials,
                     int n_star, const CltOptions& opts = {}) {
  if (!phi.mean_zero()) throw InvalidConfig("clt requires a mean-zero observable");
  if (n_star > 100) throw InvalidConfig("n_star must be <= 100");
  if (trials < 100) throw InsufficientSamples("clt requires trials >= 100");
  SphereQuadrature quad = make_sphere_quadrature(opts.quad_n_theta);
  double var0 = 0;
  for (std::size_t q = 0; q < quad.nodes.size(); ++q) {
    double v = phi.eval(quad.nodes[q]);
    var0 += quad.weights[q] * v * v;
  }
  CltReport rep;
  rep.n_steps = n_steps;
  rep.trials = trials;
  rep.truncation_n_star = n_star;
  double series = 0;
  if (var0 > 1e-14) {
    std::vector<int> n_list(n_star);
    for (int i = 0; i < n_star; ++i) n_list[i] = i + 1;
    MixingOptions mo;
    mo.quad_n_theta = opts.quad_n_theta;
    mo.threads = opts.threads;
    MixingReport mix = correlation(model, phi, phi, n_list, opts.n_mc_corr, mo);
    rep.series_terms = mix.correlations;
    if (std::abs(mix.correlations.back()) > 0.05 * var0)
      throw NonSummableTail("correlation at n_star exceeds 5% of the variance");
    for (double c : mix.correlations) series += c;
  }
  rep.sigma2_formula = var0 + 2.0 * series;
  if (rep.sigma2_formula < 0)
    throw NonSummableTail("truncated variance series is negative");
  // empirical law of S_N / sqrt(N)
  Vec values(trials);
  parallel_for(static_cast<std::size_t>(trials), opts.threads, [&](std::size_t t) {
    RngStream rng = model.stream(0x636c74ULL).derive(t);
    SpherePoint p = random_sphere_point(model.dimension(), rng);
    double s = phi.eval(p);
    for (long k = 1; k < n_steps; ++k) {
      p = model.apply_generator(model.sample_index(rng), p);
      s += phi.eval(p);
    }
    values[t] = s / std::sqrt(static_cast<double>(n_steps));
  });
  SampleStats st = sample_stats(values);
  rep.sigma2_empirical = st.variance;
  double sigma = std::sqrt(rep.sigma2_formula);
  Vec sorted = values;
  std::sort(sorted.begin(), sorted.end());
  if (sigma < 1e-9) {
    double mx = 0;
    for (double v : sorted) mx = std::max(mx, std::abs(v));
    rep.ks_distance = mx < 1e-9 ? 0.0 : 1.0;
  } else {
    double ks = 0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      double f = normal_cdf(sorted[i] / sigma);
      double lo = static_cast<double>(i) / sorted.size();
      double hi = static_cast<double>(i + 1) / sorted.size();
      ks = std::max({ks, std::abs(f - lo), std::abs(f - hi)});
    }
    rep.ks_distance = ks;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Galerkin spectral-gap proxy

struct GapProxyReport {
  int max_l = 0;
  int matrix_dim = 0;             // (L+1)^2 - 1, the l >= 1 block
  double second_singular_value = 0; // largest singular value of the block
  double gap = 0;                  // 1 - second_singular_value
  double constant_residual = 0;    // defect of L(1) = 1 in the Galerkin basis
};

// Assembles G[a][b] = sum_q w_q Y_a(x_q) * E_mu[ Y_b(f x_q) ]. For the finite
// generator support the map average is exact (weighted enumeration); n_mc > 0
// switches to Monte-Carlo sampling of maps instead.
inline GapProxyReport transfer_matrix(const Model& model, int max_l, int quadrature_size = 0,
                                      long n_mc = 0, int threads = 1) {
  if (model.dimension() != 2)
    throw InvalidConfig("transfer_matrix requires d = 2 (spherical harmonics)");
  const int n_theta = std::max(max_l + 1, quadrature_size);
  SphereQuadrature quad = make_sphere_quadrature(n_theta);
  const int dim = harmonic_count(max_l);
  const std::size_t nodes = quad.nodes.size();
  std::vector<Vec> rows(nodes);
  parallel_for(nodes, threads, [&](std::size_t q) {
    Vec avg(dim, 0.0);
    if (n_mc <= 0) {
      for (int g = 0; g < model.generator_count(); ++g) {
        SpherePoint img = model.apply_generator(g, quad.nodes[q]);
        Vec y = eval_harmonics(max_l, img);
        double w = model.spec().generators[g].weight;
        for (int b = 0; b < dim; ++b) avg[b] += w * y[b];
      }
    } else {
      RngStream rng = model.stream(0x676170ULL).derive(q);
      for (long s = 0; s < n_mc; ++s) {
        SpherePoint img = model.apply_generator(model.sample_index(rng), quad.nodes[q]);
        Vec y = eval_harmonics(max_l, img);
        for (int b = 0; b < dim; ++b) avg[b] += y[b] / static_cast<double>(n_mc);
      }
    }
    rows[q] = std::move(avg);
  });
  Matrix g(dim, dim);
  for (std::size_t q = 0; q < nodes; ++q) {
    Vec y = eval_harmonics(max_l, quad.nodes[q]);
    for (int a = 0; a < dim; ++a) {
      double wy = quad.weights[q] * y[a];
      if (wy == 0.0) continue;
      for (int b = 0; b < dim; ++b) g(a, b) += wy * rows[q][b];
    }
  }
  GapProxyReport rep;
  rep.max_l = max_l;
  rep.matrix_dim = dim - 1;
  // constant fixed vector: column (0,0) must be e_0 up to quadrature exactness
  double res = 0;
  for (int a = 0; a < dim; ++a) res = std::max(res, std::abs(g(a, 0) - (a == 0 ? 1.0 : 0.0)));
  rep.constant_residual = res;
  if (res > 1e-6)
    throw QuadratureTooCoarse("constant-function residual above 1e-6");
  Matrix block(dim - 1, dim - 1);
  for (int a = 1; a < dim; ++a)
    for (int b = 1; b < dim; ++b) block(a - 1, b - 1) = g(a, b);
  Svd svd = jacobi_svd(block);
  rep.second_singular_value = svd.sigma[0];
  rep.gap = 1.0 - rep.second_singular_value;
  return rep;
}

// off-degree block mass: rotations preserve harmonic degree, so this should
// vanish for rotation-only models (diagnostic used by tests)
inline double offdegree_mass(const Model& model, int max_l, int quadrature_size = 0) {
  const int n_theta = std::max(max_l + 1, quadrature_size);
  SphereQuadrature quad = make_sphere_quadrature(n_theta);
  const int dim = harmonic_count(max_l);
  Matrix g(dim, dim);
  for (std::size_t q = 0; q < quad.nodes.size(); ++q) {
    Vec y = eval_harmonics(max_l, quad.nodes[q]);
    Vec avg(dim, 0.0);
    for (int gi = 0; gi < model.generator_count(); ++gi) {
      SpherePoint img = model.apply_generator(gi, quad.nodes[q]);
      Vec yi = eval_harmonics(max_l, img);
      double w = model.spec().generators[gi].weight;
      for (int b = 0; b < dim; ++b) avg[b] += w * yi[b];
    }
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b) g(a, b) += quad.weights[q] * y[a] * avg[b];
  }
  double mass = 0;
  for (int la = 0; la <= max_l; ++la)
    for (int ma = -la; ma <= la; ++ma)
      for (int lb = 0; lb <= max_l; ++lb)
        for (int mb = -lb; mb <= lb; ++mb)
          if (la != lb)
            mass = std::max(mass, std::abs(g(harmonic_index(la, ma), harmonic_index(lb, mb))));
  return mass;
}

} // namespace ergolab
