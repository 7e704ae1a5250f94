#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace ipalm {

using Real = double;
using Index = Eigen::Index;
using Vector = Eigen::VectorXd;

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

inline bool all_finite(const Vector& v) { return v.allFinite(); }

inline void require_finite(const Vector& v, const std::string& what) {
  require(all_finite(v), what + ": non-finite entry");
}

// Deterministic RNG used everywhere randomness is needed. std::mt19937_64
// plus a fixed 53-bit mapping, so identical seeds give identical streams
// independent of the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ^ 0x9e3779b97f4a7c15ull) {
    // a few warm-up rounds so nearby seeds decorrelate
    for (int i = 0; i < 8; ++i) next();
  }

  std::uint64_t next() {
    // xorshift* — small, fast, reproducible
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545f4914f6cdd1dull;
  }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  Index uniform_index(Index n) {
    return static_cast<Index>(uniform() * static_cast<double>(n)) % n;
  }

  double normal() {
    // Box-Muller on the deterministic uniform stream
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  std::uint64_t state_;
};

}  // namespace ipalm
