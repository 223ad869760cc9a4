// include/mtlm/rng.h

// Copyright 2026  MTLM toolkit authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef MTLM_RNG_H_
#define MTLM_RNG_H_

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace mtlm {

// Seeded random stream.  All stochastic operations in the toolkit take one
// of these explicitly; there is no global RNG state.  The draw algorithms
// are spelled out here (rather than using std:: distributions) so that a
// given seed produces the same stream on every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform integer in [0, n) by rejection; n must be > 0.
  std::uint64_t uniform_int(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  // Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[uniform_int(i)]);
    }
  }

  // Sample k distinct elements from pool, in pool order.
  template <typename T>
  std::vector<T> sample_without_replacement(std::vector<T> pool, std::size_t k) {
    for (std::size_t i = 0; i < k && i < pool.size(); ++i) {
      std::swap(pool[i], pool[i + uniform_int(pool.size() - i)]);
    }
    pool.resize(std::min(k, pool.size()));
    return pool;
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Fixed per-component offsets applied to the user-facing --seed so that
// independent subsystems never share a stream.  Documented in the CLI help.
namespace seed_offset {
constexpr std::uint64_t kModelInit = 0;
constexpr std::uint64_t kShuffle = 1;
constexpr std::uint64_t kMaskPlans = 2;
constexpr std::uint64_t kDropout = 3;
constexpr std::uint64_t kAcousticChannel = 4;
}  // namespace seed_offset

}  // namespace mtlm

#endif  // MTLM_RNG_H_
