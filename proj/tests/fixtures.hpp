#pragma once

// Shared model fixtures for the test suites.

#include "ergolab/geometry.hpp"

namespace fixtures {

using namespace ergolab;

// two rotations with generic angles about different axes: dense in SO(3)
inline Model pure_rotations_s2(std::uint64_t seed = 11) {
  ModelSpec spec;
  spec.dimension = 2;
  spec.power = 4;
  spec.seed = seed;
  spec.generators.push_back({0.5, {plane_rotation(3, 0, 1, 1.0)}});
  spec.generators.push_back({0.5, {plane_rotation(3, 1, 2, std::sqrt(2.0))}});
  return build_model(std::move(spec));
}

// all generators rotate in the (0,1) plane: the last coordinate is invariant
inline Model common_axis_s2(std::uint64_t seed = 12) {
  ModelSpec spec;
  spec.dimension = 2;
  spec.power = 4;
  spec.seed = seed;
  spec.generators.push_back({0.5, {plane_rotation(3, 0, 1, 1.0)}});
  spec.generators.push_back({0.5, {plane_rotation(3, 0, 1, std::sqrt(2.0))}});
  return build_model(std::move(spec));
}

inline Model identity_only_s2(std::uint64_t seed = 13) {
  ModelSpec spec;
  spec.dimension = 2;
  spec.power = 4;
  spec.seed = seed;
  spec.generators.push_back({1.0, {plane_rotation(3, 0, 1, 0.0)}});
  return build_model(std::move(spec));
}

// three dense rotations each composed with a twist about a different
// coordinate pair: strongly hyperbolic (lambda_1 ~ 0.16 at amplitude 1.2),
// certifies the gap from N ~ 8, and has a Galerkin proxy gap stable in the
// truncation degree. Two-generator models are avoided for the proxy: for any
// pair (g1, g2) the zonal functions of the rotation g1 g2^{-1} give the
// averaged one-step operator an exact unit singular value.
inline Model twisted_s2(double amplitude = 1.2, std::uint64_t seed = 14, int power = 16) {
  ModelSpec spec;
  spec.dimension = 2;
  spec.power = power;
  spec.seed = seed;
  Twist twz{0, 1, amplitude, coordinate_profile(3, 2)};
  Twist twx{1, 2, amplitude, coordinate_profile(3, 0)};
  Twist twy{0, 2, amplitude, coordinate_profile(3, 1)};
  spec.generators.push_back({1.0 / 3, {plane_rotation(3, 0, 1, 1.0), twz}});
  spec.generators.push_back({1.0 / 3, {plane_rotation(3, 1, 2, std::sqrt(2.0)), twx}});
  spec.generators.push_back({1.0 / 3, {plane_rotation(3, 0, 2, 0.777), twy}});
  return build_model(std::move(spec));
}

// dense rotations plus separate twist generators: weakly hyperbolic mixture
// used for parameter grids
inline Model mixture_s2(double amplitude, std::uint64_t seed = 17, int power = 8) {
  ModelSpec spec;
  spec.dimension = 2;
  spec.power = power;
  spec.seed = seed;
  if (amplitude == 0.0) {
    spec.generators.push_back({0.5, {plane_rotation(3, 0, 1, 1.0)}});
    spec.generators.push_back({0.5, {plane_rotation(3, 1, 2, std::sqrt(2.0))}});
  } else {
    Twist tw{0, 1, amplitude, coordinate_profile(3, 2)};
    Twist tw2{1, 2, amplitude, coordinate_profile(3, 0)};
    spec.generators.push_back({0.3, {plane_rotation(3, 0, 1, 1.0)}});
    spec.generators.push_back({0.3, {plane_rotation(3, 1, 2, std::sqrt(2.0))}});
    spec.generators.push_back({0.2, {tw}});
    spec.generators.push_back({0.2, {tw2}});
  }
  return build_model(std::move(spec));
}

inline Model twisted_s3(double amplitude = 0.8, std::uint64_t seed = 15) {
  ModelSpec spec;
  spec.dimension = 3;
  spec.power = 8;
  spec.seed = seed;
  Twist tw{0, 1, amplitude, coordinate_profile(4, 2)};
  Twist tw2{2, 3, amplitude, coordinate_profile(4, 1)};
  spec.generators.push_back({0.3, {plane_rotation(4, 0, 1, 1.0)}});
  spec.generators.push_back({0.3, {plane_rotation(4, 1, 2, std::sqrt(2.0))}});
  spec.generators.push_back({0.2, {tw}});
  spec.generators.push_back({0.2, {tw2}});
  return build_model(std::move(spec));
}

// single strongly hyperbolic word repeated: twist then rotation
// (lambda_1 ~ 0.28 at the default amplitude; smaller amplitudes are elliptic)
inline Model deterministic_hyperbolic_s2(double amplitude = 3.0, std::uint64_t seed = 16) {
  ModelSpec spec;
  spec.dimension = 2;
  spec.power = 1;
  spec.seed = seed;
  Twist tw{0, 1, amplitude, coordinate_profile(3, 2)};
  spec.generators.push_back({1.0, {tw, plane_rotation(3, 1, 2, 0.7)}});
  return build_model(std::move(spec));
}

} // namespace fixtures
