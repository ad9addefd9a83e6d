#pragma once

// Monte-Carlo certification of the hypotheses: the codimension-1 hyperbolicity
// gap, coexpansion on average, and the fractional moment decay. Certificates
// are empirical (sampled infimum plus a local refinement pass, with a normal
// confidence interval); they are not verified enclosures.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "ergolab/cocycle.hpp"
#include "ergolab/fit.hpp"
#include "ergolab/geometry.hpp"
#include "ergolab/parallel.hpp"

namespace ergolab {

enum class GapForm { eq11, eq12 };

inline const char* to_string(GapForm f) { return f == GapForm::eq11 ? "eq11" : "eq12"; }

struct GapCertificate {
  int N = 1;
  GapForm form = GapForm::eq12;
  double est_min_gap = 0;  // nats, min over sampled (x, E) of the word mean
  double ci_halfwidth = 0; // standard error of the minimizing pair's mean
  SpherePoint argmin_point;
  Vec argmin_normal; // u_E in frame coordinates at argmin_point
  long n_base_samples = 0;
  long n_word_samples = 0;
  double max_form_defect = 0; // worst per-sample |log proj + log det|

  bool certified_positive() const { return est_min_gap - 2.0 * ci_halfwidth > 0; }
};

namespace detail {

// N-step tangent map at x with a fresh word from rng, in the frames given.
inline Matrix word_matrix(const Model& model, int length, SpherePoint p, TangentFrame frame,
                          RngStream& rng, TangentFrame* end_frame = nullptr) {
  Matrix m = Matrix::identity(model.dimension());
  for (int k = 0; k < length; ++k) {
    int idx = model.sample_index(rng);
    m = step_tangent(model, idx, p, frame) * m;
  }
  if (end_frame) *end_frame = frame;
  return m;
}

struct GapPairValue {
  double mean = 0;
  double se = 0;
  double max_form_defect = 0;
};

inline GapPairValue eval_gap_pair(const Model& model, int N, const SpherePoint& x,
                                  const TangentFrame& frame, const Vec& u_e, long n_words,
                                  GapForm form, RngStream rng) {
  Vec vals(n_words);
  double max_defect = 0;
  CodimOnePlane plane{x, u_e};
  for (long w = 0; w < n_words; ++w) {
    Matrix m = word_matrix(model, N, x, frame, rng);
    RestrictedStats rs = restricted_stats(TangentMap{m, frame, frame}, plane);
    double log_con = std::log(rs.conorm);
    double log_det = std::log(rs.abs_det_restricted);
    double log_proj = std::log(rs.proj_norm);
    double defect = std::abs(log_proj + log_det);
    max_defect = std::max(max_defect, defect);
    if (defect > 1e-8) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.3e", defect);
      throw FormMismatch(std::string("eq11/eq12 disagree by ") + buf +
                         " (volume-preservation identity violated)");
    }
    vals[w] = form == GapForm::eq12 ? log_con + log_det : log_con - log_proj;
  }
  SampleStats st = sample_stats(vals);
  return GapPairValue{st.mean, st.se, max_defect};
}

} // namespace detail

// Samples (x, E) pairs, estimates the word mean of the gap integrand for each,
// then runs a shrinking-step coordinate-descent refinement around the running
// minimizer. Forms eq11 and eq12 are checked against each other per sample.
inline GapCertificate gap_estimate(const Model& model, int N, long n_base, long n_words,
                                   GapForm form = GapForm::eq12, int threads = 1,
                                   int refine_iters = 20) {
  if (N < 1) throw InvalidConfig("gap_estimate requires N >= 1");
  if (n_base < 100 || n_words < 100)
    throw InsufficientSamples("gap_estimate requires n_base, n_words >= 100");
  const int d = model.dimension();
  struct Slot {
    double mean, se, defect;
    SpherePoint x;
    Vec u_e;
  };
  std::vector<Slot> slots(n_base);
  parallel_for(static_cast<std::size_t>(n_base), threads, [&](std::size_t i) {
    RngStream rng = model.stream(0x6a70ULL).derive(i);
    SpherePoint x = random_sphere_point(d, rng);
    TangentFrame frame = tangent_frame(x);
    Vec u_e = rng.unit_vector(d);
    detail::GapPairValue v =
        detail::eval_gap_pair(model, N, x, frame, u_e, n_words, form, rng.derive(1));
    slots[i] = Slot{v.mean, v.se, v.max_form_defect, x, u_e};
  });
  std::size_t best = 0;
  double max_defect = 0;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    max_defect = std::max(max_defect, slots[i].defect);
    if (slots[i].mean < slots[best].mean) best = i;
  }
  Slot cur = slots[best];
  // local refinement: random tangent perturbations with shrinking step
  double step = 0.3;
  RngStream refine_rng = model.stream(0x726566ULL);
  for (int it = 0; it < refine_iters; ++it) {
    TangentFrame frame = tangent_frame(cur.x);
    Vec dx = refine_rng.unit_vector(d);
    Vec cand_x = cur.x.x;
    axpy(step, frame.to_ambient(dx), cand_x);
    SpherePoint xp = sphere_point(cand_x);
    Vec du = refine_rng.unit_vector(d);
    Vec cand_u = cur.u_e;
    axpy(step, du, cand_u);
    cand_u = normalized(cand_u);
    TangentFrame fp = tangent_frame(xp);
    detail::GapPairValue v =
        detail::eval_gap_pair(model, N, xp, fp, cand_u, n_words, form, refine_rng.derive(it));
    max_defect = std::max(max_defect, v.max_form_defect);
    if (v.mean < cur.mean) {
      cur = Slot{v.mean, v.se, v.max_form_defect, xp, cand_u};
    } else {
      step *= 0.8;
    }
  }
  GapCertificate cert;
  cert.N = N;
  cert.form = form;
  cert.est_min_gap = cur.mean;
  cert.ci_halfwidth = cur.se;
  cert.argmin_point = cur.x;
  cert.argmin_normal = cur.u_e;
  cert.n_base_samples = n_base;
  cert.n_word_samples = n_words;
  cert.max_form_defect = max_defect;
  return cert;
}

struct CoexpEstimate {
  int N = 1;
  double est_min = 0; // min over sampled (x, xi) of the word mean of the integrand / N
  double ci_halfwidth = 0;
  SpherePoint argmin_point;
  Vec argmin_xi;
  long n_base_samples = 0;
  long n_word_samples = 0;

  bool certified_positive() const { return est_min - 2.0 * ci_halfwidth > 0; }
};

inline CoexpEstimate coexpanding_estimate(const Model& model, int N, long n_base, long n_words,
                                          int threads = 1) {
  if (N < 1) throw InvalidConfig("coexpanding_estimate requires N >= 1");
  if (n_base < 100 || n_words < 100)
    throw InsufficientSamples("coexpanding_estimate requires n_base, n_words >= 100");
  const int d = model.dimension();
  struct Slot {
    double mean, se;
    SpherePoint x;
    Vec xi;
  };
  std::vector<Slot> slots(n_base);
  parallel_for(static_cast<std::size_t>(n_base), threads, [&](std::size_t i) {
    RngStream rng = model.stream(0x636fULL).derive(i);
    SpherePoint x = random_sphere_point(d, rng);
    TangentFrame frame = tangent_frame(x);
    Vec xi = rng.unit_vector(d);
    RngStream words = rng.derive(1);
    Vec vals(n_words);
    for (long w = 0; w < n_words; ++w) {
      Matrix m = detail::word_matrix(model, N, x, frame, words);
      vals[w] = coexpansion_integrand(TangentMap{m, frame, frame}, xi) / N;
    }
    SampleStats st = sample_stats(vals);
    slots[i] = Slot{st.mean, st.se, x, xi};
  });
  std::size_t best = 0;
  for (std::size_t i = 0; i < slots.size(); ++i)
    if (slots[i].mean < slots[best].mean) best = i;
  CoexpEstimate est;
  est.N = N;
  est.est_min = slots[best].mean;
  est.ci_halfwidth = slots[best].se;
  est.argmin_point = slots[best].x;
  est.argmin_xi = slots[best].xi;
  est.n_base_samples = n_base;
  est.n_word_samples = n_words;
  return est;
}

struct MomentDecayReport {
  double sigma = 0;
  std::vector<int> n_list;
  Vec moment_values; // per n: max over base pairs of the word mean of (proj/con)^sigma
  double fitted_rate = 0; // slope of log(moment) vs n
  double fit_r2 = 0;
  double kappa1 = 0; // -2 * fitted_rate / sigma
  double c1 = 0;     // exp(intercept)
};

inline MomentDecayReport moment_decay(const Model& model, double sigma,
                                      const std::vector<int>& n_list, long n_samples,
                                      long n_base = 16, int threads = 1) {
  if (sigma < 0 || sigma > 1) throw InvalidConfig("sigma must lie in [0, 1]");
  for (std::size_t i = 1; i < n_list.size(); ++i)
    if (n_list[i] <= n_list[i - 1]) throw InvalidConfig("n_list must be increasing");
  if (n_samples < 100) throw InsufficientSamples("moment_decay requires n_samples >= 100");
  const int d = model.dimension();
  const std::size_t tasks = n_list.size() * static_cast<std::size_t>(n_base);
  Vec partial(tasks, 0.0);
  parallel_for(tasks, threads, [&](std::size_t t) {
    const std::size_t ni = t / n_base;
    const std::size_t pi = t % n_base;
    const int n = n_list[ni];
    RngStream rng = model.stream(0x6d6fULL).derive(pi); // pair (x, W) shared across n
    SpherePoint x = random_sphere_point(d, rng);
    TangentFrame frame = tangent_frame(x);
    Vec u_e = rng.unit_vector(d);
    CodimOnePlane plane{x, u_e};
    RngStream words = rng.derive(1000 + ni);
    double acc = 0;
    for (long w = 0; w < n_samples; ++w) {
      Matrix m = detail::word_matrix(model, n, x, frame, words);
      RestrictedStats rs = restricted_stats(TangentMap{m, frame, frame}, plane);
      acc += std::pow(rs.proj_norm / rs.conorm, sigma);
    }
    partial[t] = acc / static_cast<double>(n_samples);
  });
  MomentDecayReport rep;
  rep.sigma = sigma;
  rep.n_list = n_list;
  rep.moment_values.resize(n_list.size());
  for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
    double mx = 0;
    for (long pi = 0; pi < n_base; ++pi)
      mx = std::max(mx, partial[ni * n_base + pi]);
    rep.moment_values[ni] = mx;
  }
  Vec xs(n_list.begin(), n_list.end());
  Vec ys(n_list.size());
  for (std::size_t i = 0; i < n_list.size(); ++i) ys[i] = std::log(rep.moment_values[i]);
  LineFit fit = fit_line(xs, ys);
  rep.fitted_rate = fit.slope;
  rep.fit_r2 = fit.r2;
  rep.kappa1 = sigma > 0 ? -2.0 * fit.slope / sigma : 0.0;
  rep.c1 = std::exp(fit.intercept);
  return rep;
}

} // namespace ergolab
