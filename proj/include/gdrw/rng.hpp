#pragma once

#include <array>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace gdrw {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers: as
/// easy as 1, 2, 3"). Maps a 128-bit counter and a 64-bit key to 128 bits.
inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                  std::array<std::uint32_t, 2> key) noexcept {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

/// Counter-based uniform stream. The value at position `counter` is a pure
/// function of (master_seed, stream_id, counter); the object only caches the
/// most recent Philox block.
class RngStream {
 public:
  RngStream() = default;
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id, std::uint64_t counter = 0) noexcept
      : master_seed_(master_seed), stream_id_(stream_id), counter_(counter) {}

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  std::uint64_t counter() const noexcept { return counter_; }

  /// Value at an arbitrary position without touching the stream state.
  static std::uint32_t at(std::uint64_t master_seed, std::uint64_t stream_id,
                          std::uint64_t counter) noexcept {
    return block(master_seed, stream_id, counter >> 2)[counter & 3];
  }

  std::uint32_t next_u32() noexcept {
    const std::uint64_t blk = counter_ >> 2;
    if (!cached_ || blk != cached_block_) {
      cache_ = block(master_seed_, stream_id_, blk);
      cached_block_ = blk;
      cached_ = true;
    }
    return cache_[counter_++ & 3];
  }

  std::uint64_t next_u64() noexcept {
    const std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound) by 64x64->128 multiply-shift.
  std::uint64_t next_below(std::uint64_t bound) noexcept {
    using u128 = unsigned __int128;
    return static_cast<std::uint64_t>((static_cast<u128>(next_u64()) * bound) >> 64);
  }

 private:
  static std::array<std::uint32_t, 4> block(std::uint64_t seed, std::uint64_t stream,
                                            std::uint64_t blk) noexcept {
    return philox4x32_10({static_cast<std::uint32_t>(blk), static_cast<std::uint32_t>(blk >> 32),
                          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)},
                         {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
  }

  std::uint64_t master_seed_ = 0;
  std::uint64_t stream_id_ = 0;
  std::uint64_t counter_ = 0;
  std::uint64_t cached_block_ = 0;
  bool cached_ = false;
  std::array<std::uint32_t, 4> cache_{};
};

/// Anything the samplers can draw 32-bit uniforms from. Tests substitute
/// deliberately broken sources here.
template <typename G>
concept UniformSource = requires(G g) {
  { g.next_u32() } -> std::convertible_to<std::uint32_t>;
};

/// k independent streams with ids base_id*k .. base_id*k + k - 1.
inline std::vector<RngStream> fork_streams(std::uint64_t master_seed, std::uint64_t base_id,
                                           std::size_t k) {
  std::vector<RngStream> out;
  out.reserve(k);
  for (std::size_t j = 0; j < k; ++j) {
    out.emplace_back(master_seed, base_id * k + j);
  }
  return out;
}

}  // namespace gdrw
