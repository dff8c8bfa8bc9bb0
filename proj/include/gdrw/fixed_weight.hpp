#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace gdrw {

/// Unsigned fixed-point edge weight with 16 fractional bits.
///
/// A real weight x is stored as round_half_up(x * 2^16). The sampler works on
/// the raw integer directly, so every weight in a neighbor list must satisfy
/// sum(raw) <= 2^48 for the 128-bit selector arithmetic to stay exact.
struct FixedWeight {
  static constexpr int kFracBits = 16;
  static constexpr std::uint64_t kOne = std::uint64_t{1} << kFracBits;

  std::uint64_t raw = 0;

  static constexpr FixedWeight from_raw(std::uint64_t r) noexcept { return FixedWeight{r}; }

  static FixedWeight from_double(double x) {
    if (!std::isfinite(x) || x < 0.0) {
      throw std::invalid_argument("weight must be finite and nonnegative: " + std::to_string(x));
    }
    const long double scaled = static_cast<long double>(x) * static_cast<long double>(kOne) + 0.5L;
    if (scaled >= 18446744073709551616.0L) {
      throw std::out_of_range("weight too large for fixed-point encoding: " + std::to_string(x));
    }
    return FixedWeight{static_cast<std::uint64_t>(std::floor(scaled))};
  }

  constexpr double to_double() const noexcept {
    return static_cast<double>(raw) / static_cast<double>(kOne);
  }

  friend constexpr auto operator<=>(FixedWeight, FixedWeight) = default;
};

/// A positive scaling parameter (Node2Vec's p or q) held in the same
/// fixed-point format so that w / p can be evaluated in integers.
class FixedDivisor {
 public:
  FixedDivisor() = default;

  explicit FixedDivisor(double value) {
    if (!std::isfinite(value) || value <= 0.0) {
      throw std::invalid_argument("divisor must be positive and finite");
    }
    raw_ = FixedWeight::from_double(value).raw;
    if (raw_ == 0) {
      throw std::invalid_argument("divisor underflows the fixed-point scale");
    }
  }

  std::uint64_t raw() const noexcept { return raw_; }

  /// w / divisor, rounded half up.
  std::uint64_t divide(std::uint64_t w) const {
    using u128 = unsigned __int128;
    const u128 num = (static_cast<u128>(w) << FixedWeight::kFracBits) + (raw_ >> 1);
    const u128 q = num / raw_;
    if (q > std::numeric_limits<std::uint64_t>::max()) {
      throw std::overflow_error("scaled weight overflows 64 bits");
    }
    return static_cast<std::uint64_t>(q);
  }

 private:
  std::uint64_t raw_ = FixedWeight::kOne;
};

}  // namespace gdrw
