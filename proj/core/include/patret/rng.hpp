#pragma once

#include <cstdint>
#include <initializer_list>

namespace patret {

// Counter-based deterministic generator built on the SplitMix64 finalizer
// (https://prng.di.unimi.it/splitmix64.c). A stream is identified by a key
// derived from (seed, stream ids...); the n-th draw of a stream is
// finalize(key + n * gamma). Because draws are a pure function of
// (key, counter), streams keyed per cell or per task produce identical output
// regardless of iteration order or thread schedule.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  // SplitMix64 finalizer; a bijection on 64-bit integers.
  static std::uint64_t mix(std::uint64_t x);

  // Chains the finalizer over (seed, ids...) to name a sub-stream.
  static std::uint64_t derive_key(std::uint64_t seed,
                                  std::initializer_list<std::uint64_t> ids);

  std::uint64_t next_u64();

  // Uniform on [0, 1), 53-bit resolution.
  double next_unit();

  // Uniform on (0, 1); safe as input to inverse-CDF transforms.
  double next_open_unit();

  // Uniform integer in [0, n) via the multiply-shift reduction
  // (https://lemire.me/blog/2016/06/30/fast-random-shuffling/).
  // Bias is O(n / 2^64) and irrelevant at the scales used here.
  std::uint64_t next_below(std::uint64_t n);

  // Standard normal draw via the AS241 inverse normal CDF applied to
  // next_open_unit(). One uniform consumed per draw.
  double next_gaussian();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace patret
