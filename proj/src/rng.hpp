/*
 * Copyright 2026 the tagsem authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file
 * except in compliance with the License. You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software distributed under the
 * License is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND,
 * either express or implied. See the License for the specific language governing permissions
 * and limitations under the License.
 */

#ifndef TAGSEM_RNG_HPP
#define TAGSEM_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace tagsem {

/// Seeded random source. The engine is std::mt19937_64 (fully specified by
/// the standard); all distributions are hand-rolled on top of it because the
/// standard library distributions are implementation-defined and would break
/// reproducibility across toolchains.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n), unbiased via rejection. n must be > 0.
  uint64_t uniform_int(uint64_t n) {
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

  /// Standard normal via Box-Muller (caches the spare draw).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  /// Gamma(shape, 1) via Marsaglia-Tsang; boosts shape < 1.
  double gamma(double shape) {
    if (shape < 1.0) {
      const double u = uniform01();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      const double u = uniform01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  /// Symmetric Dirichlet(concentration) sample of the given dimension.
  std::vector<double> dirichlet(double concentration, int dim) {
    std::vector<double> out(static_cast<size_t>(dim));
    double total = 0.0;
    for (auto& v : out) {
      v = gamma(concentration);
      total += v;
    }
    if (total <= 0.0) {
      // All-zero draw is possible only through underflow; fall back to uniform.
      for (auto& v : out) v = 1.0 / dim;
      return out;
    }
    for (auto& v : out) v /= total;
    return out;
  }

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (size_t i = values.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(uniform_int(i));
      std::swap(values[i - 1], values[j]);
    }
  }

  /// k distinct values from [0, n), in draw order (partial Fisher-Yates).
  std::vector<int> sample_without_replacement(int n, int k) {
    std::vector<int> pool(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) pool[static_cast<size_t>(i)] = i;
    std::vector<int> out;
    out.reserve(static_cast<size_t>(k));
    for (int i = 0; i < k && i < n; ++i) {
      const size_t j = static_cast<size_t>(i) +
                       static_cast<size_t>(uniform_int(static_cast<uint64_t>(n - i)));
      std::swap(pool[static_cast<size_t>(i)], pool[j]);
      out.push_back(pool[static_cast<size_t>(i)]);
    }
    return out;
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Stable seed derivation: mixes a base seed with a textual label (FNV-1a
/// over the bytes, then splitmix64 finalization). Used to give independent,
/// reproducible streams to sub-tasks keyed by name.
inline uint64_t derive_seed(uint64_t base, std::string_view label) {
  uint64_t h = 1469598103934665603ull;
  for (const char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  uint64_t z = base ^ h;
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace tagsem

#endif  // TAGSEM_RNG_HPP
