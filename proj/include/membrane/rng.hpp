#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace membrane {

/// Identifies a reproducible random stream: same (seed, stream) gives the
/// same sample sequence, on any thread, in any run.
struct RngState {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

/// Counter-based generator (Philox4x32-10). The 128-bit counter holds a
/// 64-bit block index in its low words and the stream id in its high words;
/// the 64-bit key is the seed. Streams never overlap, so batch work can
/// assign one stream per sample/path and stay bit-reproducible regardless
/// of scheduling.
class Rng {
 public:
  Rng() : Rng(RngState{}) {}
  explicit Rng(RngState s) : Rng(s.seed, s.stream) {}
  Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  static std::array<std::uint32_t, 4> philox4x32_10(
      std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
      }
      const std::uint64_t p0 = 0xD2511F53ull * ctr[0];
      const std::uint64_t p1 = 0xCD9E8D57ull * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
             static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
             static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

  std::uint32_t next_u32() {
    if (buf_pos_ == 4) {
      buf_ = philox4x32_10({static_cast<std::uint32_t>(block_),
                            static_cast<std::uint32_t>(block_ >> 32),
                            static_cast<std::uint32_t>(stream_),
                            static_cast<std::uint32_t>(stream_ >> 32)},
                           key_);
      ++block_;
      buf_pos_ = 0;
    }
    return buf_[buf_pos_++];
  }

  std::uint64_t next_u64() {
    const std::uint64_t lo = next_u32();
    const std::uint64_t hi = next_u32();
    return lo | (hi << 32);
  }

  /// Uniform on the open interval (0,1); never returns 0 or 1, so logs are safe.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via the Marsaglia polar method (second deviate cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  RngState state_id() const {
    return {static_cast<std::uint64_t>(key_[0]) |
                (static_cast<std::uint64_t>(key_[1]) << 32),
            stream_};
  }

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_ = 0;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int buf_pos_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace membrane
