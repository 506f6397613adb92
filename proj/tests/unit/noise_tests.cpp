#include "patret/noise.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "patret/errors.hpp"
#include "patret/rng.hpp"
#include "support/fixtures.hpp"

using namespace patret;
using patret::testing::numeric_dataset;
using patret::testing::planted_dataset;

TEST_CASE("noise kind names round trip") {
  CHECK(noise_kind_name(NoiseKind::kUniform) == "un");
  CHECK(noise_kind_name(NoiseKind::kGaussian) == "gn");
  CHECK(parse_noise_kind("un") == NoiseKind::kUniform);
  CHECK(parse_noise_kind("gn") == NoiseKind::kGaussian);
  CHECK_THROWS_AS(parse_noise_kind("salt"), DataError);
}

TEST_CASE("p = 0 is the identity for both kinds") {
  const Dataset d = planted_dataset(80, 31);
  for (const NoiseKind kind : {NoiseKind::kUniform, NoiseKind::kGaussian}) {
    const PerturbResult out = perturb(d, {kind, 0.0, 77});
    CHECK(out.data == d);
    CHECK(out.cells_changed == 0);
    CHECK(out.cells_total == d.size() * 4);
  }
}

TEST_CASE("the class column is never perturbed") {
  const Dataset d = planted_dataset(120, 5);
  for (const NoiseKind kind : {NoiseKind::kUniform, NoiseKind::kGaussian}) {
    const PerturbResult out = perturb(d, {kind, 1.0, 3});
    REQUIRE(out.data.size() == d.size());
    for (std::size_t row = 0; row < d.size(); ++row) {
      CHECK(out.data.label(row) == d.label(row));
    }
    CHECK(out.cells_changed == out.cells_total);
  }
}

TEST_CASE("uniform numeric replacements stay inside the observed range") {
  const Dataset d = planted_dataset(500, 8);
  const auto stats = std::get<NumericStats>(attribute_stats(d, "x1"));
  const PerturbResult out = perturb(d, {NoiseKind::kUniform, 1.0, 19});
  for (std::size_t row = 0; row < d.size(); ++row) {
    const double v = out.data.numeric(row, 0);
    CHECK(v >= stats.min);
    CHECK(v <= stats.max);
  }
}

TEST_CASE("uniform categorical replacements come from the unique values") {
  const Dataset d = planted_dataset(300, 12);
  const auto stats = std::get<CategoricalStats>(attribute_stats(d, "c"));
  const PerturbResult out = perturb(d, {NoiseKind::kUniform, 1.0, 23});
  for (std::size_t row = 0; row < d.size(); ++row) {
    const std::string& v = out.data.categorical(row, 3);
    CHECK(std::find(stats.unique.begin(), stats.unique.end(), v) != stats.unique.end());
  }
}

TEST_CASE("gaussian numeric noise is centered and unclipped") {
  // variance 0 column: unchanged at any p
  const Dataset flat = numeric_dataset({{5, "a"}, {5, "b"}, {5, "a"}, {5, "b"}});
  const PerturbResult same = perturb(flat, {NoiseKind::kGaussian, 1.0, 7});
  for (std::size_t row = 0; row < flat.size(); ++row) {
    CHECK(same.data.numeric(row, 0) == 5.0);
  }
  // audit still counts the change decisions even when values survive
  CHECK(same.cells_changed == flat.size());

  const Dataset d = planted_dataset(2000, 3);
  const PerturbResult out = perturb(d, {NoiseKind::kGaussian, 1.0, 7});
  const auto stats = std::get<NumericStats>(attribute_stats(d, "x1"));
  double shift = 0.0;
  std::size_t outside = 0;
  for (std::size_t row = 0; row < d.size(); ++row) {
    const double delta = out.data.numeric(row, 0) - d.numeric(row, 0);
    shift += delta;
    outside += (out.data.numeric(row, 0) < stats.min || out.data.numeric(row, 0) > stats.max);
  }
  const double sigma = std::sqrt(stats.variance);
  CHECK(std::fabs(shift / static_cast<double>(d.size())) < 4.0 * sigma / std::sqrt(2000.0));
  // an unclipped mechanism must sometimes leave the observed range
  CHECK(outside > 0);
}

TEST_CASE("gaussian categorical draws follow the empirical distribution") {
  auto schema = std::make_shared<Schema>(
      std::vector<Attribute>{{"c", AttrKind::kCategorical},
                             {"y", AttrKind::kCategorical}},
      "y");
  std::vector<Record> rows;
  for (int i = 0; i < 3; ++i)
    rows.push_back(Record{{Cell{std::string("a")}, Cell{std::string("0")}}});
  rows.push_back(Record{{Cell{std::string("b")}, Cell{std::string("0")}}});
  const Dataset d(schema, std::move(rows));
  const auto stats = attribute_stats(d, "c");

  std::map<std::string, int> hits;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    CounterRng rng(CounterRng::derive_key(99, {static_cast<std::uint64_t>(i)}));
    const Cell out = perturb_value(Cell{std::string("b")}, stats, NoiseKind::kGaussian, rng);
    ++hits[std::get<std::string>(out)];
  }
  CHECK(static_cast<double>(hits["a"]) / n == doctest::Approx(0.75).epsilon(0.03));
  CHECK(static_cast<double>(hits["b"]) / n == doctest::Approx(0.25).epsilon(0.03));
}

TEST_CASE("gaussian categorical column with one unique value never changes") {
  auto schema = std::make_shared<Schema>(
      std::vector<Attribute>{{"c", AttrKind::kCategorical},
                             {"y", AttrKind::kCategorical}},
      "y");
  std::vector<Record> rows;
  for (int i = 0; i < 6; ++i)
    rows.push_back(Record{{Cell{std::string("only")}, Cell{std::string(i % 2 ? "0" : "1")}}});
  const Dataset d(schema, std::move(rows));
  const PerturbResult out = perturb(d, {NoiseKind::kGaussian, 1.0, 1});
  CHECK(out.data == d);
}

TEST_CASE("uniform categorical draws are uniform over the unique values") {
  const Dataset d = planted_dataset(200, 44);
  const auto stats = attribute_stats(d, "c");
  std::map<std::string, int> hits;
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    CounterRng rng(CounterRng::derive_key(5, {static_cast<std::uint64_t>(i)}));
    ++hits[std::get<std::string>(
        perturb_value(Cell{std::string("a")}, stats, NoiseKind::kUniform, rng))];
  }
  REQUIRE(hits.size() == 4);
  for (const auto& [value, count] : hits) {
    CHECK(static_cast<double>(count) / n == doctest::Approx(0.25).epsilon(0.05));
  }
}

TEST_CASE("perturb is deterministic and schedule independent") {
  const Dataset d = planted_dataset(250, 77);
  const NoiseSpec spec{NoiseKind::kUniform, 0.3, 123};
  const PerturbResult a = perturb(d, spec, 1);
  const PerturbResult b = perturb(d, spec, 1);
  const PerturbResult c = perturb(d, spec, 8);
  CHECK(a.data == b.data);
  CHECK(a.data == c.data);
  CHECK(a.cells_changed == b.cells_changed);
  CHECK(a.cells_changed == c.cells_changed);

  const PerturbResult other = perturb(d, {NoiseKind::kUniform, 0.3, 124});
  CHECK_FALSE(a.data == other.data);
}

TEST_CASE("audit counts concentrate around p") {
  const Dataset d = planted_dataset(4000, 15);
  const double p = 0.1;
  const PerturbResult out = perturb(d, {NoiseKind::kUniform, p, 9});
  CHECK(out.cells_total == d.size() * 4);
  const double n = static_cast<double>(out.cells_total);
  const double observed = static_cast<double>(out.cells_changed) / n;
  CHECK(std::fabs(observed - p) <= 3.0 * std::sqrt(p * (1.0 - p) / n));
}

TEST_CASE("perturb validates its inputs") {
  const Dataset d = planted_dataset(10, 1);
  CHECK_THROWS_AS(perturb(d, {NoiseKind::kUniform, -0.1, 0}), DataError);
  CHECK_THROWS_AS(perturb(d, {NoiseKind::kUniform, 1.1, 0}), DataError);
  CHECK_THROWS_AS(perturb(d, {NoiseKind::kUniform, 0.5, 0}, 0), DataError);
}

TEST_CASE("p = 1 changes every eligible numeric cell under uniform noise") {
  // distinct values and a wide range make a collision astronomically unlikely
  const Dataset d = planted_dataset(100, 6);
  const PerturbResult out = perturb(d, {NoiseKind::kUniform, 1.0, 2});
  std::size_t unchanged = 0;
  for (std::size_t row = 0; row < d.size(); ++row) {
    unchanged += (out.data.numeric(row, 0) == d.numeric(row, 0));
  }
  CHECK(unchanged == 0);
}
