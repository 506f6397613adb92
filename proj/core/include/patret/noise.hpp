#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "patret/dataset.hpp"
#include "patret/rng.hpp"

namespace patret {

enum class NoiseKind { kUniform, kGaussian };

std::string_view noise_kind_name(NoiseKind kind);  // "un" / "gn"
NoiseKind parse_noise_kind(std::string_view name);

struct NoiseSpec {
  NoiseKind kind = NoiseKind::kUniform;
  double p = 0.0;  // per-cell change probability, [0,1]
  std::uint64_t seed = 0;
};

struct PerturbResult {
  Dataset data;
  std::uint64_t cells_total = 0;
  // Count of "change" decisions. A changed cell can still end up with its
  // original value (replacement drawn from the original column).
  std::uint64_t cells_changed = 0;
};

// Every non-class cell is independently replaced with probability p; the
// class column is copied verbatim. Replacements use column statistics of the
// input, never of partially perturbed data. Each cell gets its own RNG
// stream keyed by (seed, row, column), so the output is identical for any
// worker count.
PerturbResult perturb(const Dataset& dataset, const NoiseSpec& spec, int workers = 1);

// One replacement draw. Uniform noise: numeric → uniform on [min, max],
// categorical → uniform over the distinct values. Gaussian noise: numeric →
// value + Normal(0, population variance), unclipped (zero variance returns
// the value unchanged); categorical → draw from the column's empirical
// distribution.
Cell perturb_value(const Cell& value, const AttributeStats& stats, NoiseKind kind,
                   CounterRng& rng);

}  // namespace patret
