#pragma once

// Counter-based random numbers. Every draw is a pure function of
// (seed, replicate, step, draw index), so replicates can be generated in any
// order and on any number of threads with identical results.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace mclt {

/// Philox4x32-10 block cipher (Salmon et al., SC'11).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter encrypt(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
             static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
             static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// SplitMix64 finalizer; used only to derive independent seeds from a parent.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return mix64(seed ^ mix64(tag));
}

/// [0, 1) with 53 random bits.
inline double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// (0, 1] with 53 random bits; safe for log().
inline double to_unit_open(std::uint64_t bits) {
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

/// Sequential draws inside one (replicate, step) cell. Satisfies
/// UniformRandomBitGenerator so it can feed std distributions.
class StepStream {
 public:
  using result_type = std::uint64_t;

  StepStream(Philox4x32::Key key, std::uint64_t replicate, std::uint32_t step)
      : key_(key), replicate_(replicate), step_(step) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    if (cursor_ == 2) refill();
    return buffer_[cursor_++];
  }

  double uniform() { return to_unit((*this)()); }
  double uniform_open() { return to_unit_open((*this)()); }

  /// Box-Muller; consumes two words.
  double normal() {
    const double u1 = uniform_open();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  int sign() { return ((*this)() >> 63) ? 1 : -1; }

 private:
  void refill() {
    const auto out = Philox4x32::encrypt(
        {draw_++, step_, static_cast<std::uint32_t>(replicate_),
         static_cast<std::uint32_t>(replicate_ >> 32)},
        key_);
    buffer_[0] = (std::uint64_t{out[0]} << 32) | out[1];
    buffer_[1] = (std::uint64_t{out[2]} << 32) | out[3];
    cursor_ = 0;
  }

  Philox4x32::Key key_;
  std::uint64_t replicate_;
  std::uint32_t step_;
  std::uint32_t draw_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int cursor_ = 2;
};

/// Keyed generator: hands out independent streams per (replicate, step).
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed)
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)} {}

  StepStream stream(std::uint64_t replicate, std::uint32_t step) const {
    return StepStream(key_, replicate, step);
  }

  /// First word of the (replicate, step) cell.
  std::uint64_t word(std::uint64_t replicate, std::uint32_t step) const {
    return stream(replicate, step)();
  }

 private:
  Philox4x32::Key key_;
};

}  // namespace mclt
