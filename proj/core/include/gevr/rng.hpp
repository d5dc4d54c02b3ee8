#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace gevr {

// Counter-based random stream built on Philox4x32-10.
//
// A stream is fully determined by (seed, stream id); its output is the
// Philox bijection applied to an incrementing counter. Substreams are
// derived by mixing a key into the stream id, so replicate k of a
// bootstrap always sees the same numbers no matter which thread runs it.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream_id) {}

  /// Independent child stream keyed by `key`; the parent is not advanced.
  [[nodiscard]] RngStream substream(std::uint64_t key) const noexcept;
  [[nodiscard]] RngStream substream(std::initializer_list<std::uint64_t> keys) const noexcept;

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;
  /// Standard normal via Box-Muller (deterministic across platforms).
  double normal() noexcept;

  [[nodiscard]] std::uint64_t seed() const noexcept {
    return (static_cast<std::uint64_t>(key_[1]) << 32) | key_[0];
  }
  [[nodiscard]] std::uint64_t stream_id() const noexcept { return stream_; }

 private:
  void refill() noexcept;

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int pos_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Raw Philox4x32 with 10 rounds; exposed for the known-answer test.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key) noexcept;

}  // namespace gevr
