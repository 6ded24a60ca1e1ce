#pragma once

#include "mvgp/linalg.hpp"

#include <cstdint>
#include <random>

namespace mvgp::rng {

/// splitmix64 step; used to derive substream seeds from (seed, stream, index).
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(a) ^ (0x9e3779b97f4a7c15ULL + b));
}

/// Substream seed for draw `index` of stream `stream` under master `seed`.
/// All randomness in the library flows through this scheme, so parallel and
/// serial execution produce identical ensembles.
inline std::uint64_t substream(std::uint64_t seed, std::uint64_t stream,
                               std::uint64_t index) {
  return mix(mix(seed, stream), index);
}

/// Standard-normal stream: mt19937_64 (fully specified by the standard)
/// plus an explicit Box-Muller transform, so identical seeds give
/// bit-identical draws regardless of the standard library.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : gen_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // u1 in (0,1], u2 in [0,1)
    double u1 = 1.0 - uniform01();
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * kPi * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  /// Fills row-major; the fill order is part of the determinism contract.
  void fill(Matrix& m) {
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index j = 0; j < m.cols(); ++j) m(i, j) = next();
    }
  }

 private:
  double uniform01() { return (gen_() >> 11) * 0x1.0p-53; }

  static constexpr double kPi = 3.14159265358979323846;
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace mvgp::rng
