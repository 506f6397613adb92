#include "support/generators.hpp"

#include <stdexcept>
#include <utility>

#include "patret/errors.hpp"
#include "patret/rng.hpp"
#include "support/oracle.hpp"

namespace patret::testing {
namespace {

constexpr std::uint64_t kMicroStream = 0x6d6963726f;  // "micro"
constexpr std::uint64_t kProbeStream = 0x70726f6265;  // "probe"

const char* kCategoryPool[] = {"u", "v", "w"};
const char* kLabelPool[] = {"y0", "y1", "y2"};

std::shared_ptr<const Schema> random_schema(CounterRng& rng) {
  const std::size_t attrs = 1 + rng.next_below(3);
  std::vector<Attribute> list;
  for (std::size_t i = 0; i < attrs; ++i) {
    const AttrKind kind =
        rng.next_below(2) == 0 ? AttrKind::kNumeric : AttrKind::kCategorical;
    list.push_back({"a" + std::to_string(i), kind});
  }
  list.push_back({"y", AttrKind::kCategorical});
  return std::make_shared<Schema>(std::move(list), "y");
}

Cell random_cell(CounterRng& rng, AttrKind kind) {
  if (kind == AttrKind::kNumeric) {
    return Cell{0.5 * static_cast<double>(rng.next_below(11))};
  }
  return Cell{std::string(kCategoryPool[rng.next_below(3)])};
}

Dataset random_data(CounterRng& rng, const std::shared_ptr<const Schema>& schema,
                    std::size_t records, std::size_t label_count) {
  std::vector<Record> rows;
  for (std::size_t r = 0; r < records; ++r) {
    Record rec;
    for (const Attribute& attr : schema->attributes()) {
      if (attr.name == "y") {
        rec.values.push_back(Cell{std::string(kLabelPool[rng.next_below(label_count)])});
      } else {
        rec.values.push_back(random_cell(rng, attr.kind));
      }
    }
    rows.push_back(std::move(rec));
  }
  return Dataset(schema, std::move(rows));
}

Condition random_condition(CounterRng& rng, const Schema& schema) {
  const std::size_t attr = rng.next_below(schema.size() - 1);  // never the class
  const Attribute& a = schema.attribute(attr);
  if (a.kind == AttrKind::kNumeric) {
    const double threshold = 0.5 * static_cast<double>(rng.next_below(12)) +
                             (rng.next_below(2) == 0 ? 0.0 : 0.25);
    return rng.next_below(2) == 0 ? Condition::le(a.name, threshold)
                                  : Condition::gt(a.name, threshold);
  }
  const std::string category = kCategoryPool[rng.next_below(3)];
  return rng.next_below(2) == 0 ? Condition::eq(a.name, category)
                                : Condition::neq(a.name, category);
}

Pattern random_pattern(CounterRng& rng, std::int64_t id, const Dataset& d,
                       std::size_t label_count) {
  const std::size_t conds = rng.next_below(8) == 0 ? 0 : 1 + rng.next_below(2);
  std::vector<Condition> conditions;
  for (std::size_t i = 0; i < conds; ++i) {
    conditions.push_back(random_condition(rng, d.schema()));
  }
  std::map<std::string, std::int64_t> counts;
  if (rng.next_below(4) != 0) {
    // counts as a miner would record them: the label histogram in d
    const Pattern probe(id, conditions, {});
    for (const std::size_t row : oracle::select(probe, d)) ++counts[d.label(row)];
  } else {
    // arbitrary counts, including the all-zero support-0 case
    for (std::size_t i = 0; i < label_count; ++i) {
      const std::int64_t c = static_cast<std::int64_t>(rng.next_below(4));
      if (c > 0) counts[kLabelPool[i]] = c;
    }
  }
  return Pattern(id, std::move(conditions), std::move(counts));
}

}  // namespace

MicroInstance random_micro(std::uint64_t seed) {
  for (std::uint64_t attempt = 0; attempt < 1000; ++attempt) {
    CounterRng rng(CounterRng::derive_key(seed, {kMicroStream, attempt}));
    try {
      auto schema = random_schema(rng);
      const std::size_t label_count = rng.next_below(5) < 3 ? 2 : 3;
      const std::size_t records = 1 + rng.next_below(8);
      Dataset d = random_data(rng, schema, records, label_count);
      Dataset m = random_data(rng, schema, records, label_count);
      std::vector<Pattern> patterns;
      const std::size_t pattern_count = 1 + rng.next_below(4);
      for (std::size_t i = 0; i < pattern_count; ++i) {
        patterns.push_back(
            random_pattern(rng, static_cast<std::int64_t>(i), d, label_count));
      }
      PatternSet zs(std::move(patterns), schema->fingerprint(),
                    kLabelPool[rng.next_below(label_count)], false);
      return MicroInstance{std::move(d), std::move(m), std::move(zs)};
    } catch (const DataError&) {
      // contradictory random antecedent; try the next sub-stream
    }
  }
  throw std::logic_error("random_micro: no valid instance in 1000 attempts");
}

Dataset random_probe(const Dataset& base, std::size_t n, std::uint64_t seed) {
  const Schema& schema = base.schema();
  std::vector<std::vector<std::string>> pools(schema.size());
  for (std::size_t col = 0; col < schema.size(); ++col) {
    if (schema.attribute(col).kind != AttrKind::kCategorical) continue;
    if (col == schema.class_index()) {
      pools[col] = base.class_labels();
      continue;
    }
    const auto stats = attribute_stats(base, schema.attribute(col).name);
    pools[col] = std::get<CategoricalStats>(stats).unique;
    pools[col].push_back("zz");  // unseen value
  }
  std::vector<Record> rows;
  for (std::size_t r = 0; r < n; ++r) {
    CounterRng rng(CounterRng::derive_key(seed, {kProbeStream, r}));
    Record rec;
    for (std::size_t col = 0; col < schema.size(); ++col) {
      if (schema.attribute(col).kind == AttrKind::kNumeric) {
        rec.values.push_back(Cell{rng.next_unit() * 120.0 - 10.0});
      } else {
        const auto& pool = pools[col];
        rec.values.push_back(Cell{pool[rng.next_below(pool.size())]});
      }
    }
    rows.push_back(std::move(rec));
  }
  return Dataset(base.schema_ptr(), std::move(rows));
}

}  // namespace patret::testing
