#include "support/fixtures.hpp"

#include <algorithm>
#include <numeric>
#include <span>

#include "patret/errors.hpp"
#include "patret/experiment.hpp"
#include "patret/rng.hpp"

namespace patret::testing {
namespace {

constexpr std::uint64_t kPlantedStream = 0x706c616e74;  // "plant"

std::vector<double> mean_ranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double shared = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = shared;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

std::shared_ptr<const Schema> single_numeric_schema() {
  return std::make_shared<Schema>(
      std::vector<Attribute>{{"x", AttrKind::kNumeric}, {"y", AttrKind::kCategorical}},
      "y");
}

Dataset numeric_dataset(const std::vector<std::pair<double, std::string>>& rows) {
  std::vector<Record> records;
  records.reserve(rows.size());
  for (const auto& [x, label] : rows) records.push_back(Record{{Cell{x}, Cell{label}}});
  return Dataset(single_numeric_schema(), std::move(records));
}

Dataset toy_six() {
  return numeric_dataset(
      {{1, "y0"}, {2, "y0"}, {3, "y0"}, {4, "y1"}, {5, "y0"}, {6, "y1"}});
}

Dataset toy_six_modified() {
  return numeric_dataset(
      {{6, "y0"}, {2, "y0"}, {3, "y0"}, {5, "y1"}, {4, "y0"}, {6, "y1"}});
}

Dataset toy_three_test() {
  return numeric_dataset({{2, "y0"}, {5, "y1"}, {6, "y1"}});
}

Dataset planted_dataset(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw DataError("planted dataset needs at least one record");
  auto schema = std::make_shared<Schema>(
      std::vector<Attribute>{{"x1", AttrKind::kNumeric},
                             {"x2", AttrKind::kNumeric},
                             {"x3", AttrKind::kNumeric},
                             {"c", AttrKind::kCategorical},
                             {"y", AttrKind::kCategorical}},
      "y");
  const char* pool[] = {"a", "b", "c", "d"};
  std::vector<Record> records;
  records.reserve(n);
  for (std::size_t row = 0; row < n; ++row) {
    CounterRng rng(CounterRng::derive_key(seed, {kPlantedStream, row}));
    const double x1 = rng.next_unit() * 100.0;
    const double x2 = rng.next_unit() * 100.0;
    const double x3 = rng.next_unit() * 10.0;
    bool positive = (x1 > 50.0) ? (x2 > 30.0) : (x2 > 70.0);
    if (rng.next_unit() < 0.05) positive = !positive;
    // class-conditional category frequencies, reversed between labels
    const double u = rng.next_unit();
    std::size_t which = u < 0.4 ? 0 : u < 0.7 ? 1 : u < 0.9 ? 2 : 3;
    if (!positive) which = 3 - which;
    records.push_back(Record{{Cell{x1}, Cell{x2}, Cell{x3},
                              Cell{std::string(pool[which])},
                              Cell{std::string(positive ? "y1" : "y0")}}});
  }
  return Dataset(std::move(schema), std::move(records));
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DataError("spearman needs series of equal length");
  const std::vector<double> rx = mean_ranks(x);
  const std::vector<double> ry = mean_ranks(y);
  return pearson(std::span<const double>(rx), std::span<const double>(ry)).r;
}

}  // namespace patret::testing
