#pragma once

#include <cmath>
#include <cstdint>

namespace rle {

/// Counter-based RNG (Philox4x32-10). Every (seed, stream) pair yields an
/// independent, reproducible sequence; streams never overlap because the
/// stream id occupies the high counter words. Normal variates use Box-Muller
/// so the sequence is identical across platforms up to libm rounding.
///
/// Stream-splitting convention used throughout the toolkit:
///   bits [0,3)  purpose (0 = matrix entries, 1 = signal sections, 2 = noise,
///               3 = misc/shift)
///   bits [3,64) trial / worker index
/// See make_stream().
class Philox {
 public:
  Philox(std::uint64_t seed, std::uint64_t stream) {
    key_[0] = static_cast<std::uint32_t>(seed);
    key_[1] = static_cast<std::uint32_t>(seed >> 32);
    ctr_[0] = 0;
    ctr_[1] = 0;
    ctr_[2] = static_cast<std::uint32_t>(stream);
    ctr_[3] = static_cast<std::uint32_t>(stream >> 32);
  }

  std::uint32_t next_u32() {
    if (idx_ == 4) {
      block();
      idx_ = 0;
    }
    return out_[idx_++];
  }

  std::uint64_t next_u64() {
    const std::uint64_t lo = next_u32();
    const std::uint64_t hi = next_u32();
    return lo | (hi << 32);
  }

  /// Uniform on (0,1]: never returns 0, safe inside log().
  double next_unit() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1p-53;
  }

  /// Standard normal via Box-Muller; generates in pairs.
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = next_unit();
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

 private:
  static void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
  }

  void block() {
    std::uint32_t c0 = ctr_[0], c1 = ctr_[1], c2 = ctr_[2], c3 = ctr_[3];
    std::uint32_t k0 = key_[0], k1 = key_[1];
    for (int round = 0; round < 10; ++round) {
      std::uint32_t hi0, lo0, hi1, lo1;
      mulhilo(0xD2511F53u, c0, hi0, lo0);
      mulhilo(0xCD9E8D57u, c2, hi1, lo1);
      const std::uint32_t n0 = hi1 ^ c1 ^ k0;
      const std::uint32_t n1 = lo1;
      const std::uint32_t n2 = hi0 ^ c3 ^ k1;
      const std::uint32_t n3 = lo0;
      c0 = n0; c1 = n1; c2 = n2; c3 = n3;
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    out_[0] = c0; out_[1] = c1; out_[2] = c2; out_[3] = c3;
    // bump the 64-bit block counter
    if (++ctr_[0] == 0) ++ctr_[1];
  }

  std::uint32_t key_[2];
  std::uint32_t ctr_[4];
  std::uint32_t out_[4] = {0, 0, 0, 0};
  int idx_ = 4;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

enum class StreamPurpose : std::uint64_t {
  kMatrix = 0,
  kSignal = 1,
  kNoise = 2,
  kMisc = 3,
};

inline std::uint64_t make_stream(StreamPurpose purpose, std::uint64_t index = 0) {
  return static_cast<std::uint64_t>(purpose) | (index << 3);
}

/// Stateless 64-bit mix, used to derive decorrelated sub-seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace rle
