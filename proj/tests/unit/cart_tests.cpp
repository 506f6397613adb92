#include "patret/cart.hpp"

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "doctest.h"
#include "patret/errors.hpp"
#include "support/fixtures.hpp"
#include "support/generators.hpp"
#include "support/oracle.hpp"

using namespace patret;
using patret::testing::numeric_dataset;
using patret::testing::planted_dataset;
using patret::testing::random_probe;

namespace {

std::vector<std::size_t> all_rows(const Dataset& d) {
  std::vector<std::size_t> rows(d.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return rows;
}

std::int64_t matches_exactly_one(const PatternSet& zs, const Dataset& d) {
  std::int64_t bad = 0;
  for (std::size_t row = 0; row < d.size(); ++row) {
    int hits = 0;
    for (const Pattern& p : zs.patterns()) {
      hits += matches(p, d.schema(), d.record(row));
    }
    bad += (hits != 1);
  }
  return bad;
}

}  // namespace

TEST_CASE("gini evaluates the impurity formula") {
  const std::int64_t pure[] = {5, 0};
  const std::int64_t even[] = {1, 1};
  const std::int64_t skewed[] = {2, 1};
  CHECK(gini(pure) == 0.0);
  CHECK(gini(even) == 0.5);
  CHECK(gini(skewed) == doctest::Approx(4.0 / 9.0).epsilon(1e-14));
  CHECK_THROWS_AS(gini(std::span<const std::int64_t>{}), DataError);
  const std::int64_t zero[] = {0, 0};
  CHECK_THROWS_AS(gini(zero), DataError);
}

TEST_CASE("min leaf size is the ceiling of the fraction") {
  CHECK(min_leaf_size({0.02, 12}, 5000) == 100);
  CHECK(min_leaf_size({0.02, 12}, 6) == 1);
  CHECK(min_leaf_size({0.02, 12}, 149) == 3);
  CHECK(min_leaf_size({0.5, 12}, 7) == 4);
}

TEST_CASE("best_split finds the separating midpoint") {
  const Dataset d = numeric_dataset({{0, "0"}, {0, "0"}, {1, "1"}, {1, "1"}});
  const MinerParams params{0.02, 12};
  const auto split = best_split(all_rows(d), d, params);
  REQUIRE(split.has_value());
  CHECK(split->attribute == "x");
  CHECK(std::get<double>(split->split_value) == 0.5);
  CHECK(split->impurity_decrease == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("best_split returns none when nothing improves") {
  const Dataset pure = numeric_dataset({{0, "a"}, {1, "a"}, {2, "a"}, {3, "a"}});
  CHECK_FALSE(best_split(all_rows(pure), pure, {0.02, 12}).has_value());

  // one distinct value per attribute: no candidate exists
  const Dataset constant = numeric_dataset({{7, "a"}, {7, "b"}, {7, "a"}, {7, "b"}});
  CHECK_FALSE(best_split(all_rows(constant), constant, {0.02, 12}).has_value());

  // the leaf floor (ceil(0.5 * 3) = 2) forbids every candidate
  const Dataset tight = numeric_dataset({{0, "a"}, {1, "b"}, {2, "b"}});
  CHECK_FALSE(best_split(all_rows(tight), tight, {0.5, 12}).has_value());
}

TEST_CASE("best_split tie goes to the lower attribute index") {
  auto schema = std::make_shared<Schema>(
      std::vector<Attribute>{{"a1", AttrKind::kNumeric},
                             {"a2", AttrKind::kNumeric},
                             {"y", AttrKind::kCategorical}},
      "y");
  // identical columns, so both attributes offer the same decrease
  const Dataset d(schema, {Record{{Cell{0.0}, Cell{0.0}, Cell{std::string("0")}}},
                           Record{{Cell{0.0}, Cell{0.0}, Cell{std::string("0")}}},
                           Record{{Cell{1.0}, Cell{1.0}, Cell{std::string("1")}}},
                           Record{{Cell{1.0}, Cell{1.0}, Cell{std::string("1")}}}});
  const auto split = best_split(all_rows(d), d, {0.02, 12});
  REQUIRE(split.has_value());
  CHECK(split->attribute == "a1");
}

TEST_CASE("best_split handles categorical one-vs-rest") {
  auto schema = std::make_shared<Schema>(
      std::vector<Attribute>{{"c", AttrKind::kCategorical},
                             {"y", AttrKind::kCategorical}},
      "y");
  const auto rec = [](const char* c, const char* y) {
    return Record{{Cell{std::string(c)}, Cell{std::string(y)}}};
  };
  const Dataset d(schema, {rec("u", "0"), rec("u", "0"), rec("v", "1"), rec("w", "1")});
  const auto split = best_split(all_rows(d), d, {0.02, 12});
  REQUIRE(split.has_value());
  CHECK(split->attribute == "c");
  CHECK(std::get<std::string>(split->split_value) == "u");
  CHECK(split->impurity_decrease == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("mine_patterns on uniform labels yields one empty pattern") {
  const Dataset d = numeric_dataset({{1, "a"}, {2, "a"}, {3, "a"}});
  const PatternSet zs = mine_patterns(d, {0.02, 12});
  REQUIRE(zs.size() == 1);
  CHECK(zs.pattern(0).conditions().empty());
  CHECK(zs.pattern(0).support_d() == 3);
  CHECK(zs.partition());
  CHECK(zs.default_label() == "a");
  CHECK(zs.schema_fingerprint() == d.schema().fingerprint());
}

TEST_CASE("mine_patterns splits a separable pair") {
  const Dataset d = numeric_dataset({{0, "0"}, {1, "1"}, {0, "0"}, {1, "1"}});
  const PatternSet zs = mine_patterns(d, {0.02, 12});
  REQUIRE(zs.size() == 2);
  CHECK(zs.pattern(0).conditions()[0] == Condition::le("x", 0.5));
  CHECK(zs.pattern(0).majority_label() == "0");
  CHECK(zs.pattern(0).confidence() == 1.0);
  CHECK(zs.pattern(1).conditions()[0] == Condition::gt("x", 0.5));
  CHECK(zs.pattern(1).majority_label() == "1");
  CHECK(zs.pattern(1).confidence() == 1.0);
}

TEST_CASE("single-record dataset mines to one leaf") {
  const Dataset d = numeric_dataset({{5, "a"}});
  const PatternSet zs = mine_patterns(d, {0.02, 12});
  REQUIRE(zs.size() == 1);
  CHECK(zs.pattern(0).support_d() == 1);
}

TEST_CASE("mining is deterministic byte for byte") {
  const Dataset d = planted_dataset(400, 21);
  const MinerParams params{0.02, 12};
  CHECK(serialize_patterns(mine_patterns(d, params)) ==
        serialize_patterns(mine_patterns(d, params)));
}

TEST_CASE("mined patterns respect the support floor and depth bound") {
  const Dataset d = planted_dataset(500, 4);
  for (const MinerParams params : {MinerParams{0.02, 12}, MinerParams{0.1, 3}}) {
    const PatternSet zs = mine_patterns(d, params);
    const std::int64_t floor = min_leaf_size(params, d.size());
    std::int64_t total = 0;
    for (const Pattern& p : zs.patterns()) {
      CHECK(p.support_d() >= floor);
      CHECK(support(p, d) == p.support_d());
      // normalization can only shrink the root-to-leaf condition list
      CHECK(p.conditions().size() <= static_cast<std::size_t>(params.max_depth));
      total += p.support_d();
    }
    CHECK(total == static_cast<std::int64_t>(d.size()));
  }
}

TEST_CASE("stored label counts equal recomputed distributions") {
  const Dataset d = planted_dataset(300, 9);
  const PatternSet zs = mine_patterns(d, {0.05, 6});
  for (const Pattern& p : zs.patterns()) {
    const LabelDistribution dist = label_distribution(p, d);
    CHECK(dist.counts == p.label_counts());
    CHECK(dist.total == p.support_d());
  }
}

TEST_CASE("mined sets partition the mining data and random probes") {
  const Dataset d = planted_dataset(300, 14);
  const PatternSet zs = mine_patterns(d, {0.02, 12});
  CHECK(matches_exactly_one(zs, d) == 0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Dataset probe = random_probe(d, 40, seed);
    CHECK(matches_exactly_one(zs, probe) == 0);
  }
}

TEST_CASE("max_depth 1 yields at most two leaves") {
  const Dataset d = planted_dataset(200, 2);
  const PatternSet zs = mine_patterns(d, {0.02, 1});
  CHECK(zs.size() <= 2);
  for (const Pattern& p : zs.patterns()) CHECK(p.conditions().size() <= 1);
}

TEST_CASE("miner parameters are validated") {
  const Dataset d = numeric_dataset({{1, "a"}, {2, "b"}});
  CHECK_THROWS_AS(mine_patterns(d, {0.0, 12}), DataError);
  CHECK_THROWS_AS(mine_patterns(d, {0.6, 12}), DataError);
  CHECK_THROWS_AS(mine_patterns(d, {-0.1, 12}), DataError);
  CHECK_THROWS_AS(mine_patterns(d, {0.02, 0}), DataError);
}

TEST_CASE("toy six-record dataset mines to the known tree") {
  const PatternSet zs = mine_patterns(patret::testing::toy_six(), {0.02, 12});
  REQUIRE(zs.size() == 4);
  CHECK(zs.pattern(0).conditions()[0] == Condition::le("x", 3.5));
  CHECK(zs.pattern(0).support_d() == 3);
  CHECK(zs.pattern(0).majority_label() == "y0");
  CHECK(zs.pattern(1).support_d() == 1);
  CHECK(zs.pattern(1).majority_label() == "y1");
  CHECK(zs.pattern(2).support_d() == 1);
  CHECK(zs.pattern(2).majority_label() == "y0");
  CHECK(zs.pattern(3).support_d() == 1);
  CHECK(zs.pattern(3).majority_label() == "y1");
}
