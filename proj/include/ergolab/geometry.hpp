#pragma once

// Points, tangent frames and the generator zoo on S^d: exact rotations and
// closed-form volume-preserving twist maps.
//
// A twist on the coordinate pair (i, j) rotates (x_i, x_j) by the angle
// amplitude * h(y), where the profile h is a polynomial in the complementary
// coordinates y. Since h is constant along each orbit of the rotation the map
// is the exact time-one flow of a divergence-free field tangent to every
// sphere, so it maps S^d to S^d exactly and preserves the Riemannian volume.
// Its ambient Jacobian is the block rotation plus a rank-one term coupling the
// (i, j) rows to the profile gradient.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include "ergolab/common.hpp"
#include "ergolab/linalg.hpp"
#include "ergolab/rng.hpp"

namespace ergolab {

struct SpherePoint {
  Vec x; // ambient coordinates, size d+1, unit norm

  int ambient_dim() const { return static_cast<int>(x.size()); }
  void renormalize() {
    double n = norm2(x);
    for (double& c : x) c /= n;
  }
  double norm_defect() const { return std::abs(norm2(x) - 1.0); }
};

inline SpherePoint sphere_point(Vec coords) {
  SpherePoint p{std::move(coords)};
  p.renormalize();
  return p;
}

inline SpherePoint random_sphere_point(int d, RngStream& rng) {
  return SpherePoint{rng.unit_vector(d + 1)};
}

inline double geodesic_distance(const SpherePoint& a, const SpherePoint& b) {
  double c = dot(a.x, b.x);
  c = std::min(1.0, std::max(-1.0, c));
  return std::acos(c);
}

// chordal distance; resolves coincident points far below the acos noise floor
inline double chordal_distance(const SpherePoint& a, const SpherePoint& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.x.size(); ++i) s += (a.x[i] - b.x[i]) * (a.x[i] - b.x[i]);
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Tangent frames

struct TangentFrame {
  SpherePoint base;
  Matrix columns; // (d+1) x d, orthonormal, orthogonal to base

  int dim() const { return columns.cols(); }
  // ambient vector of frame coordinates
  Vec to_ambient(const Vec& v) const { return columns * v; }
  // frame coordinates of an ambient vector (projects out the normal part)
  Vec to_frame(const Vec& ambient) const { return columns.transposed() * ambient; }
};

// Completes the base point to an orthonormal basis by pivoted Gram-Schmidt:
// coordinate seeds are taken in increasing order of |x_k| (ties by index), so
// the frame is a deterministic function of the point.
inline TangentFrame tangent_frame(const SpherePoint& p) {
  const int n = p.ambient_dim();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return std::abs(p.x[a]) < std::abs(p.x[b]); });
  Matrix cols(n, n - 1);
  Matrix work(n, n);
  work.set_col(0, p.x);
  int have = 1;
  for (int idx : order) {
    if (have == n) break;
    Vec w(n, 0.0);
    w[idx] = 1.0;
    for (int pass = 0; pass < 2; ++pass)
      for (int j = 0; j < have; ++j) {
        double c = 0;
        for (int i = 0; i < n; ++i) c += work(i, j) * w[i];
        for (int i = 0; i < n; ++i) w[i] -= c * work(i, j);
      }
    double nrm = norm2(w);
    if (nrm < 0.1) continue;
    for (double& c : w) c /= nrm;
    work.set_col(have, w);
    cols.set_col(have - 1, w);
    ++have;
  }
  if (have != n) throw NumericalBreakdown("tangent frame completion failed");
  // canonical orientation: det[base | columns] > 0, so that frames at any two
  // points are consistently oriented and derivatives of orientation-preserving
  // maps have determinant +1
  Matrix full(n, n);
  full.set_col(0, p.x);
  for (int j = 0; j < n - 1; ++j) full.set_col(j + 1, cols.col(j));
  if (det(full) < 0) {
    Vec last = cols.col(n - 2);
    for (double& c : last) c = -c;
    cols.set_col(n - 2, last);
  }
  return TangentFrame{p, cols};
}

inline double frame_orthonormality_defect(const TangentFrame& f) {
  const int d = f.dim();
  double defect = 0;
  for (int a = 0; a < d; ++a) {
    defect = std::max(defect, std::abs(dot(f.columns.col(a), f.base.x)));
    for (int b = a; b < d; ++b) {
      double g = col_dot(f.columns, a, b) - (a == b ? 1.0 : 0.0);
      defect = std::max(defect, std::abs(g));
    }
  }
  return defect;
}

// ---------------------------------------------------------------------------
// Primitive maps

struct Rotation {
  Matrix mat; // (d+1) x (d+1), orthogonal, det +1
};

inline Rotation plane_rotation(int ambient_dim, int a, int b, double angle) {
  Matrix m = Matrix::identity(ambient_dim);
  double c = std::cos(angle), s = std::sin(angle);
  m(a, a) = c;
  m(a, b) = -s;
  m(b, a) = s;
  m(b, b) = c;
  return Rotation{std::move(m)};
}

// Polynomial in the ambient coordinates; twist profiles use terms whose
// exponents vanish on the twisted pair.
struct Polynomial {
  struct Term {
    double coef;
    std::vector<int> expo; // size d+1
  };
  std::vector<Term> terms;

  double eval(const Vec& x) const {
    double s = 0;
    for (const Term& t : terms) {
      double m = t.coef;
      for (std::size_t k = 0; k < t.expo.size(); ++k)
        for (int e = 0; e < t.expo[k]; ++e) m *= x[k];
      s += m;
    }
    return s;
  }

  Vec gradient(const Vec& x) const {
    Vec g(x.size(), 0.0);
    for (const Term& t : terms)
      for (std::size_t k = 0; k < t.expo.size(); ++k) {
        if (t.expo[k] == 0) continue;
        double m = t.coef * t.expo[k];
        for (std::size_t l = 0; l < t.expo.size(); ++l) {
          int e = t.expo[l] - (l == k ? 1 : 0);
          for (int r = 0; r < e; ++r) m *= x[l];
        }
        g[k] += m;
      }
    return g;
  }
};

inline Polynomial constant_profile(int ambient_dim, double value) {
  return Polynomial{{{value, std::vector<int>(ambient_dim, 0)}}};
}

inline Polynomial coordinate_profile(int ambient_dim, int k, double coef = 1.0) {
  std::vector<int> e(ambient_dim, 0);
  e[k] = 1;
  return Polynomial{{{coef, e}}};
}

struct Twist {
  int i = 0, j = 1;     // twisted coordinate pair, i < j
  double amplitude = 0; // angle scale
  Polynomial profile;   // h(y), must not depend on x_i, x_j
};

using PrimitiveMap = std::variant<Rotation, Twist>;

inline void apply_primitive_in_place(const PrimitiveMap& m, Vec& x) {
  if (const auto* rot = std::get_if<Rotation>(&m)) {
    x = rot->mat * x;
  } else {
    const Twist& tw = std::get<Twist>(m);
    double alpha = tw.amplitude * tw.profile.eval(x);
    double c = std::cos(alpha), s = std::sin(alpha);
    double xi = x[tw.i], xj = x[tw.j];
    x[tw.i] = c * xi - s * xj;
    x[tw.j] = s * xi + c * xj;
  }
}

// Ambient Jacobian of a primitive at x (before application).
inline Matrix primitive_jacobian(const PrimitiveMap& m, const Vec& x) {
  if (const auto* rot = std::get_if<Rotation>(&m)) return rot->mat;
  const Twist& tw = std::get<Twist>(m);
  const int n = static_cast<int>(x.size());
  double alpha = tw.amplitude * tw.profile.eval(x);
  double c = std::cos(alpha), s = std::sin(alpha);
  double xi = x[tw.i], xj = x[tw.j];
  Matrix jac = Matrix::identity(n);
  jac(tw.i, tw.i) = c;
  jac(tw.i, tw.j) = -s;
  jac(tw.j, tw.i) = s;
  jac(tw.j, tw.j) = c;
  Vec grad = tw.profile.gradient(x);
  for (int k = 0; k < n; ++k) {
    if (k == tw.i || k == tw.j) continue;
    double dk = tw.amplitude * grad[k];
    if (dk == 0.0) continue;
    jac(tw.i, k) += (-s * xi - c * xj) * dk;
    jac(tw.j, k) += (c * xi - s * xj) * dk;
  }
  return jac;
}

// ---------------------------------------------------------------------------
// Model

struct Generator {
  double weight = 0;
  std::vector<PrimitiveMap> maps; // applied in order
};

struct ModelSpec {
  int dimension = 2; // sphere dimension d >= 2
  std::vector<Generator> generators;
  int power = 1; // the N of the gap definition
  std::uint64_t seed = 0;
};

struct MapWord {
  std::vector<int> indices; // first index applied first
};

class Model {
public:
  explicit Model(ModelSpec spec) : spec_(std::move(spec)) {
    validate();
    cumulative_.resize(spec_.generators.size());
    double acc = 0;
    for (std::size_t i = 0; i < spec_.generators.size(); ++i) {
      acc += spec_.generators[i].weight;
      cumulative_[i] = acc;
    }
    cumulative_.back() = 1.0;
  }

  const ModelSpec& spec() const { return spec_; }
  int dimension() const { return spec_.dimension; }
  int ambient_dim() const { return spec_.dimension + 1; }
  int power() const { return spec_.power; }
  std::uint64_t seed() const { return spec_.seed; }
  int generator_count() const { return static_cast<int>(spec_.generators.size()); }

  RngStream stream(std::uint64_t substream = 0) const { return RngStream(spec_.seed, substream); }

  int sample_index(RngStream& rng) const { return rng.categorical(cumulative_); }

  MapWord sample_word(int length, RngStream& rng) const {
    MapWord w;
    w.indices.resize(length);
    for (int k = 0; k < length; ++k) w.indices[k] = sample_index(rng);
    return w;
  }

  SpherePoint apply_generator(int index, const SpherePoint& p) const {
    check_index(index);
    Vec x = p.x;
    for (const PrimitiveMap& m : spec_.generators[index].maps) {
      apply_primitive_in_place(m, x);
      double n = norm2(x);
      for (double& c : x) c /= n;
    }
    return SpherePoint{std::move(x)};
  }

  // Ambient Jacobian chain of one generator at p; also advances the point.
  Matrix generator_jacobian(int index, SpherePoint& p) const {
    check_index(index);
    Matrix jac = Matrix::identity(ambient_dim());
    for (const PrimitiveMap& m : spec_.generators[index].maps) {
      jac = primitive_jacobian(m, p.x) * jac;
      apply_primitive_in_place(m, p.x);
      p.renormalize();
    }
    return jac;
  }

private:
  void validate() const {
    if (spec_.dimension < 2) throw InvalidConfig("dimension must be >= 2");
    if (spec_.power < 1) throw InvalidConfig("power must be >= 1");
    if (spec_.generators.empty()) throw InvalidConfig("generator list empty");
    double sum = 0;
    for (const Generator& g : spec_.generators) {
      if (g.weight <= 0) throw InvalidWeights("weights must be positive");
      sum += g.weight;
      for (const PrimitiveMap& m : g.maps) validate_primitive(m);
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw InvalidWeights("weights sum to " + std::to_string(sum) + ", expected 1");
  }

  void validate_primitive(const PrimitiveMap& m) const {
    const int n = ambient_dim();
    if (const auto* rot = std::get_if<Rotation>(&m)) {
      if (rot->mat.rows() != n || rot->mat.cols() != n)
        throw DegenerateRotation("rotation matrix has wrong size");
      Matrix g = rot->mat.transposed() * rot->mat - Matrix::identity(n);
      if (g.max_abs() > 1e-10) throw DegenerateRotation("matrix is not orthogonal");
      if (det(rot->mat) < 0) throw DegenerateRotation("determinant is -1, expected +1");
    } else {
      const Twist& tw = std::get<Twist>(m);
      if (tw.i == tw.j || tw.i < 0 || tw.j < 0 || tw.i >= n || tw.j >= n)
        throw BadTwistPair("twist pair (" + std::to_string(tw.i) + ", " + std::to_string(tw.j) +
                           ") invalid for ambient dimension " + std::to_string(n));
      for (const Polynomial::Term& t : tw.profile.terms) {
        if (static_cast<int>(t.expo.size()) != n)
          throw InvalidConfig("profile exponent vector has wrong length");
        if (t.expo[tw.i] != 0 || t.expo[tw.j] != 0)
          throw BadTwistPair("profile must not depend on the twisted pair");
      }
    }
  }

  void check_index(int index) const {
    if (index < 0 || index >= generator_count())
      throw InvalidConfig("generator index out of range");
  }

  ModelSpec spec_;
  Vec cumulative_;
};

inline Model build_model(ModelSpec spec) { return Model(std::move(spec)); }

// f^n_w = f_{w_n} o ... o f_{w_1}: first index applied first.
inline SpherePoint apply_word(const Model& model, const MapWord& word, const SpherePoint& x) {
  SpherePoint p = x;
  for (int idx : word.indices) p = model.apply_generator(idx, p);
  return p;
}

} // namespace ergolab
