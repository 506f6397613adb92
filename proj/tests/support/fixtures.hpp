#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "patret/dataset.hpp"

namespace patret::testing {

// Schema with one numeric attribute "x" and class "y".
std::shared_ptr<const Schema> single_numeric_schema();

// Dataset over single_numeric_schema() from (x, label) pairs.
Dataset numeric_dataset(const std::vector<std::pair<double, std::string>>& rows);

// 6-record dataset whose mined tree has leaf supports {3, 1, 1, 1}:
// x = 1..6, labels y0 y0 y0 y1 y0 y1.
Dataset toy_six();

// Same records with x replaced by {6, 2, 3, 5, 4, 6}; labels untouched.
Dataset toy_six_modified();

// Held-out triple {(2, y0), (5, y1), (6, y1)}.
Dataset toy_three_test();

// Synthetic classification data with planted axis-aligned structure:
// numeric x1, x2 in [0, 100), numeric x3 in [0, 10) (irrelevant),
// categorical c in {a, b, c, d}, labels y0/y1 decided by x1/x2 rectangles
// with 5% label flips. Deterministic in (n, seed).
Dataset planted_dataset(std::size_t n, std::uint64_t seed);

// Spearman rank correlation with mean ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace patret::testing
