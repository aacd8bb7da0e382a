#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace glauber {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). A stream is
// identified by a 64-bit key and a 64-bit stream id; the remaining 64 bits of
// the counter index blocks inside the stream, so draws never depend on the
// order in which streams are consumed.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kW0;
        key[1] += kW1;
      }
      const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kM0 = 0xD2511F53u;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u;
  static constexpr std::uint32_t kW1 = 0xBB67AE85u;
};

/// Deterministic random stream keyed by (seed, stream id).
///
/// Two streams with the same key and id produce identical sequences.
/// `substream(tag)` derives an independent child stream through the Philox
/// bijection itself, so nested keys like (seed, realization, trajectory) need
/// no bookkeeping beyond the tags.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t stream_id) : key_{lo(seed), hi(seed)}, id_(stream_id) {}

  std::uint64_t seed() const { return combine(key_[0], key_[1]); }
  std::uint64_t id() const { return id_; }

  Stream substream(std::uint64_t tag) const {
    const auto out = Philox4x32::block({lo(tag), hi(tag), lo(id_), hi(id_)}, key_);
    return Stream(combine(out[0], out[1]), combine(out[2], out[3]));
  }

  std::uint32_t next_u32() {
    if (pos_ == 4) refill();
    return buffer_[pos_++];
  }

  std::uint64_t next_u64() {
    const std::uint64_t a = next_u32();
    const std::uint64_t b = next_u32();
    return (a << 32) | b;
  }

  // Uniform on the open interval (0,1): never returns 0 or 1.
  double uniform_open() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  // Uniform on [0,1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Unit-rate exponential variate.
  double exponential() { return -std::log(uniform_open()); }

  bool coin(double p_true) { return uniform() < p_true; }

 private:
  static std::uint32_t lo(std::uint64_t v) { return static_cast<std::uint32_t>(v); }
  static std::uint32_t hi(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }
  static std::uint64_t combine(std::uint32_t l, std::uint32_t h) {
    return (std::uint64_t{h} << 32) | std::uint64_t{l};
  }

  void refill() {
    buffer_ = Philox4x32::block({lo(block_), hi(block_), lo(id_), hi(id_)}, key_);
    ++block_;
    pos_ = 0;
  }

  Philox4x32::Key key_;
  std::uint64_t id_;
  std::uint64_t block_ = 0;
  Philox4x32::Counter buffer_{};
  int pos_ = 4;
};

}  // namespace glauber
