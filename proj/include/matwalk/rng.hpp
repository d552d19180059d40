// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace matwalk {

// 64-bit finalizer of SplitMix64 (Steele-Lea-Flood; constants from Vigna).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based splittable stream. Output i of a stream with key k is
// mix64(k + (i+1)*gamma), i.e. SplitMix64 run from state k; child streams
// re-key through mix64. A stream is identified by (master seed, id path)
// alone, so replicas produce identical draws no matter how work is
// scheduled across threads.
class RngStream {
 public:
  RngStream() = default;
  explicit RngStream(std::uint64_t key) : key_(key) {}

  static RngStream from_seed(std::uint64_t master) {
    return RngStream(mix64(master ^ 0x5851f42d4c957f2dULL));
  }

  [[nodiscard]] RngStream child(std::uint64_t id) const {
    return RngStream(mix64(key_ ^ mix64(id + 0x9e3779b97f4a7c15ULL)));
  }
  [[nodiscard]] RngStream child(std::uint64_t a, std::uint64_t b) const {
    return child(a).child(b);
  }
  [[nodiscard]] RngStream child(std::uint64_t a, std::uint64_t b,
                                std::uint64_t c) const {
    return child(a).child(b).child(c);
  }

  std::uint64_t next_u64() {
    return mix64(key_ + (++ctr_) * 0x9e3779b97f4a7c15ULL);
  }

  // uniform in [0,1) with 53-bit resolution
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double next_uniform(double a, double b) { return a + (b - a) * next_double(); }

  bool next_bernoulli(double p) { return next_double() < p; }

  // index in [0, n), n >= 1; small n only, modulo bias is < n/2^64
  std::size_t next_index(std::size_t n) {
    return static_cast<std::size_t>(next_u64() % n);
  }

  // standard normal via Box-Muller; the spare is cached so each pair of
  // normals consumes exactly two uniforms
  double next_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - next_double();  // (0, 1], keeps log finite
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  [[nodiscard]] std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t ctr_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace matwalk
