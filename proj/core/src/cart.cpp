#include "patret/cart.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include "patret/errors.hpp"

namespace patret {
namespace {

// Floor separating real impurity gains from rounding residue of
// mathematically zero ones.
constexpr double kMinDecrease = 1e-12;

struct EncodedColumn {
  bool numeric = false;
  std::vector<double> values;        // per row, numeric attributes
  std::vector<std::int32_t> codes;   // per row, categorical attributes
  std::vector<std::string> uniques;  // sorted category list
};

struct Encoded {
  std::vector<EncodedColumn> columns;  // class column left empty
  std::vector<std::int32_t> labels;    // class code per row
  std::vector<std::string> label_names;
  std::size_t class_index = 0;
};

Encoded encode(const Dataset& d) {
  const Schema& schema = d.schema();
  Encoded e;
  e.class_index = schema.class_index();
  e.columns.resize(schema.size());
  for (std::size_t col = 0; col < schema.size(); ++col) {
    if (col == e.class_index) continue;
    EncodedColumn& out = e.columns[col];
    if (schema.attribute(col).kind == AttrKind::kNumeric) {
      out.numeric = true;
      out.values.reserve(d.size());
      for (std::size_t row = 0; row < d.size(); ++row) {
        out.values.push_back(d.numeric(row, col));
      }
    } else {
      std::map<std::string, std::int32_t> index;
      for (std::size_t row = 0; row < d.size(); ++row) {
        index.emplace(d.categorical(row, col), 0);
      }
      std::int32_t next = 0;
      for (auto& [value, code] : index) {
        code = next++;
        out.uniques.push_back(value);
      }
      out.codes.reserve(d.size());
      for (std::size_t row = 0; row < d.size(); ++row) {
        out.codes.push_back(index.at(d.categorical(row, col)));
      }
    }
  }
  std::map<std::string, std::int32_t> label_index;
  for (std::size_t row = 0; row < d.size(); ++row) label_index.emplace(d.label(row), 0);
  std::int32_t next = 0;
  for (auto& [value, code] : label_index) {
    code = next++;
    e.label_names.push_back(value);
  }
  e.labels.reserve(d.size());
  for (std::size_t row = 0; row < d.size(); ++row) {
    e.labels.push_back(label_index.at(d.label(row)));
  }
  return e;
}

double gini_of(const std::vector<std::int64_t>& counts, std::int64_t total) {
  double sum_sq = 0.0;
  for (std::int64_t c : counts) {
    const double f = static_cast<double>(c) / static_cast<double>(total);
    sum_sq += f * f;
  }
  return 1.0 - sum_sq;
}

struct InternalSplit {
  std::size_t attribute = 0;
  bool numeric = false;
  double threshold = 0.0;
  std::int32_t category = 0;
  double decrease = 0.0;
};

std::optional<InternalSplit> find_best(const Encoded& e,
                                       std::span<const std::size_t> rows,
                                       std::int64_t min_leaf) {
  const std::int64_t n = static_cast<std::int64_t>(rows.size());
  if (n < 2 * min_leaf) return std::nullopt;
  const std::size_t label_count = e.label_names.size();
  std::vector<std::int64_t> node_counts(label_count, 0);
  for (std::size_t row : rows) ++node_counts[static_cast<std::size_t>(e.labels[row])];
  const double parent = gini_of(node_counts, n);

  std::optional<InternalSplit> best;
  // Candidates are scanned in ascending (attribute index, threshold/category)
  // order; strict improvement keeps the earliest on ties.
  auto consider = [&](const InternalSplit& candidate) {
    if (candidate.decrease < kMinDecrease) return;
    if (!best || candidate.decrease > best->decrease) best = candidate;
  };
  auto weighted_decrease = [&](const std::vector<std::int64_t>& left, std::int64_t n_left,
                               const std::vector<std::int64_t>& right,
                               std::int64_t n_right) {
    const double fl = static_cast<double>(n_left) / static_cast<double>(n);
    const double fr = static_cast<double>(n_right) / static_cast<double>(n);
    return parent - fl * gini_of(left, n_left) - fr * gini_of(right, n_right);
  };

  for (std::size_t attr = 0; attr < e.columns.size(); ++attr) {
    if (attr == e.class_index) continue;
    const EncodedColumn& col = e.columns[attr];
    if (col.numeric) {
      std::vector<std::pair<double, std::int32_t>> items;
      items.reserve(rows.size());
      for (std::size_t row : rows) items.emplace_back(col.values[row], e.labels[row]);
      std::sort(items.begin(), items.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      std::vector<std::int64_t> left(label_count, 0);
      std::vector<std::int64_t> right = node_counts;
      std::size_t i = 0;
      while (i < items.size()) {
        const double value = items[i].first;
        std::size_t j = i;
        while (j < items.size() && items[j].first == value) {
          const auto lbl = static_cast<std::size_t>(items[j].second);
          ++left[lbl];
          --right[lbl];
          ++j;
        }
        if (j == items.size()) break;
        const auto n_left = static_cast<std::int64_t>(j);
        const std::int64_t n_right = n - n_left;
        if (n_left >= min_leaf && n_right >= min_leaf) {
          const double hi = items[j].first;
          const double mid = value + (hi - value) / 2.0;
          // midpoint of adjacent representable doubles can collapse onto a bound
          if (mid >= value && mid < hi) {
            consider({attr, true, mid, 0, weighted_decrease(left, n_left, right, n_right)});
          }
        }
        i = j;
      }
    } else {
      std::vector<std::vector<std::int64_t>> per_value(
          col.uniques.size(), std::vector<std::int64_t>(label_count, 0));
      std::vector<std::int64_t> value_totals(col.uniques.size(), 0);
      for (std::size_t row : rows) {
        const auto code = static_cast<std::size_t>(col.codes[row]);
        ++per_value[code][static_cast<std::size_t>(e.labels[row])];
        ++value_totals[code];
      }
      std::vector<std::int64_t> right(label_count, 0);
      for (std::size_t code = 0; code < col.uniques.size(); ++code) {
        const std::int64_t n_left = value_totals[code];
        const std::int64_t n_right = n - n_left;
        if (n_left < min_leaf || n_right < min_leaf) continue;
        for (std::size_t lbl = 0; lbl < label_count; ++lbl) {
          right[lbl] = node_counts[lbl] - per_value[code][lbl];
        }
        consider({attr, false, 0.0, static_cast<std::int32_t>(code),
                  weighted_decrease(per_value[code], n_left, right, n_right)});
      }
    }
  }
  return best;
}

void validate_params(const MinerParams& params) {
  if (!(params.min_leaf_fraction > 0.0) || params.min_leaf_fraction > 0.5) {
    throw DataError("min leaf fraction must be in (0, 0.5]");
  }
  if (params.max_depth < 1) throw DataError("max depth must be at least 1");
}

struct TreeGrower {
  const Dataset& dataset;
  const Encoded& encoded;
  std::int64_t min_leaf;
  int max_depth;
  std::vector<Pattern> patterns;
  std::vector<Condition> path;

  void grow(std::vector<std::size_t>& rows, int depth) {
    const std::size_t label_count = encoded.label_names.size();
    std::vector<std::int64_t> counts(label_count, 0);
    for (std::size_t row : rows) ++counts[static_cast<std::size_t>(encoded.labels[row])];
    int distinct = 0;
    for (std::int64_t c : counts) distinct += (c > 0);

    if (distinct > 1 && depth < max_depth) {
      if (auto split = find_best(encoded, rows, min_leaf)) {
        const EncodedColumn& col = encoded.columns[split->attribute];
        const std::string& name = dataset.schema().attribute(split->attribute).name;
        std::vector<std::size_t> left;
        std::vector<std::size_t> right;
        for (std::size_t row : rows) {
          const bool goes_left = split->numeric
                                     ? col.values[row] <= split->threshold
                                     : col.codes[row] == split->category;
          (goes_left ? left : right).push_back(row);
        }
        rows.clear();
        rows.shrink_to_fit();
        if (split->numeric) {
          path.push_back(Condition::le(name, split->threshold));
        } else {
          path.push_back(Condition::eq(name, col.uniques[static_cast<std::size_t>(
                                                 split->category)]));
        }
        grow(left, depth + 1);
        path.pop_back();
        if (split->numeric) {
          path.push_back(Condition::gt(name, split->threshold));
        } else {
          path.push_back(Condition::neq(name, col.uniques[static_cast<std::size_t>(
                                                  split->category)]));
        }
        grow(right, depth + 1);
        path.pop_back();
        return;
      }
    }

    std::map<std::string, std::int64_t> label_counts;
    for (std::size_t lbl = 0; lbl < label_count; ++lbl) {
      if (counts[lbl] > 0) label_counts[encoded.label_names[lbl]] = counts[lbl];
    }
    patterns.emplace_back(static_cast<std::int64_t>(patterns.size()), path,
                          std::move(label_counts));
  }
};

}  // namespace

double gini(std::span<const std::int64_t> label_counts) {
  if (label_counts.empty()) throw DataError("gini of empty counts");
  std::int64_t total = 0;
  for (std::int64_t c : label_counts) {
    if (c < 0) throw DataError("gini of negative counts");
    total += c;
  }
  if (total == 0) throw DataError("gini of all-zero counts");
  double sum_sq = 0.0;
  for (std::int64_t c : label_counts) {
    const double f = static_cast<double>(c) / static_cast<double>(total);
    sum_sq += f * f;
  }
  return 1.0 - sum_sq;
}

std::int64_t min_leaf_size(const MinerParams& params, std::size_t records) {
  validate_params(params);
  return static_cast<std::int64_t>(
      std::ceil(params.min_leaf_fraction * static_cast<double>(records)));
}

std::optional<SplitCandidate> best_split(std::span<const std::size_t> rows,
                                         const Dataset& dataset,
                                         const MinerParams& params) {
  validate_params(params);
  for (std::size_t row : rows) {
    if (row >= dataset.size()) throw DataError("split row index out of range");
  }
  const Encoded encoded = encode(dataset);
  auto split = find_best(encoded, rows, min_leaf_size(params, dataset.size()));
  if (!split) return std::nullopt;
  SplitCandidate out;
  out.attribute = dataset.schema().attribute(split->attribute).name;
  if (split->numeric) {
    out.split_value = split->threshold;
  } else {
    out.split_value =
        encoded.columns[split->attribute].uniques[static_cast<std::size_t>(split->category)];
  }
  out.impurity_decrease = split->decrease;
  return out;
}

PatternSet mine_patterns(const Dataset& dataset, const MinerParams& params) {
  validate_params(params);
  const Encoded encoded = encode(dataset);
  TreeGrower grower{dataset, encoded, min_leaf_size(params, dataset.size()),
                    params.max_depth, {}, {}};
  std::vector<std::size_t> rows(dataset.size());
  for (std::size_t row = 0; row < rows.size(); ++row) rows[row] = row;
  grower.grow(rows, 0);
  return PatternSet(std::move(grower.patterns), dataset.schema().fingerprint(),
                    dataset.majority_label(), true);
}

}  // namespace patret
