#include "patret/rng.hpp"

#include "patret/special_functions.hpp"

namespace patret {

namespace {
constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;
}

std::uint64_t CounterRng::mix(std::uint64_t x) {
  x += kGamma;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t CounterRng::derive_key(std::uint64_t seed,
                                     std::initializer_list<std::uint64_t> ids) {
  std::uint64_t key = mix(seed);
  for (std::uint64_t id : ids) {
    key = mix(key ^ (mix(id) + kGamma + (key << 6) + (key >> 2)));
  }
  return key;
}

std::uint64_t CounterRng::next_u64() {
  ++counter_;
  return mix(key_ + counter_ * kGamma);
}

double CounterRng::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::next_open_unit() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t CounterRng::next_below(std::uint64_t n) {
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
}

double CounterRng::next_gaussian() {
  return inverse_normal_cdf(next_open_unit());
}

}  // namespace patret
