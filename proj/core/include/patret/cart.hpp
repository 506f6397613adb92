#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "patret/dataset.hpp"
#include "patret/pattern.hpp"

namespace patret {

struct MinerParams {
  double min_leaf_fraction = 0.02;  // in (0, 0.5]
  int max_depth = 12;               // root depth 0
};

struct SplitCandidate {
  std::string attribute;
  Cell split_value;  // numeric threshold (left: <=) or category (left: ==)
  double impurity_decrease = 0.0;
};

// 1 - sum((count/total)^2). Total must be positive.
double gini(std::span<const std::int64_t> label_counts);

std::int64_t min_leaf_size(const MinerParams& params, std::size_t records);

// Best candidate by weighted Gini decrease over numeric midpoints and
// categorical one-vs-rest splits, both children at least min leaf size.
// Ties go to the lower schema attribute index, then the lower threshold or
// lexicographically smaller category. None when nothing strictly improves.
std::optional<SplitCandidate> best_split(std::span<const std::size_t> rows,
                                         const Dataset& dataset,
                                         const MinerParams& params);

// Deterministic CART; leaves become patterns in left-first depth-first
// order, so repeated runs serialize byte-identically. The result is a
// partition pattern set with the mining set's majority label as default.
PatternSet mine_patterns(const Dataset& dataset, const MinerParams& params);

}  // namespace patret
