#pragma once

// Deterministic random streams. Monte Carlo tasks receive streams derived from
// (seed, stream index) so results do not depend on scheduling or thread count.
// The generator is xoshiro256++ seeded through splitmix64; uniform and normal
// variates are generated here rather than through std:: distributions, whose
// output is implementation-defined.

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "ergolab/linalg.hpp"

namespace ergolab {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class RngStream {
public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0) {
    std::uint64_t s = seed ^ (0xd1342543de82ef95ULL * (stream + 1));
    for (auto& w : state_) w = splitmix64(s);
  }

  RngStream derive(std::uint64_t substream) const {
    std::uint64_t s = state_[0] ^ (state_[1] + 0x9e3779b97f4a7c15ULL * (substream + 1));
    RngStream r(s, substream);
    return r;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // uniform in [0, 1)
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // standard normal via Marsaglia polar rejection
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
  }

  // index sampled from weights with the given cumulative table (last entry 1)
  int categorical(const Vec& cumulative) {
    double u = uniform01();
    for (std::size_t i = 0; i < cumulative.size(); ++i)
      if (u < cumulative[i]) return static_cast<int>(i);
    return static_cast<int>(cumulative.size()) - 1;
  }

  // uniform direction on the unit sphere of R^dim
  Vec unit_vector(int dim) {
    Vec v(dim);
    double n = 0;
    do {
      for (int i = 0; i < dim; ++i) v[i] = normal();
      n = norm2(v);
    } while (n < 1e-8);
    for (double& c : v) c /= n;
    return v;
  }

private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::array<std::uint64_t, 4> state_{};
  bool have_spare_ = false;
  double spare_ = 0.0;
};

} // namespace ergolab
