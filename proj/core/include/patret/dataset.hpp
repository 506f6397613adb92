#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace patret {

enum class AttrKind { kNumeric, kCategorical };

struct Attribute {
  std::string name;
  AttrKind kind = AttrKind::kNumeric;

  bool operator==(const Attribute&) const = default;
};

// Column layout plus the designated class attribute. Immutable; the class
// attribute must be categorical and at least one other attribute must exist.
class Schema {
 public:
  Schema(std::vector<Attribute> attributes, const std::string& class_attribute);

  std::span<const Attribute> attributes() const { return attributes_; }
  std::size_t size() const { return attributes_.size(); }
  const Attribute& attribute(std::size_t index) const;
  std::size_t class_index() const { return class_index_; }
  const std::string& class_name() const { return attributes_[class_index_].name; }
  std::optional<std::size_t> index_of(std::string_view name) const;

  // 16-hex-digit FNV-1a hash of the canonical schema description; pattern
  // sets carry it so they cannot be applied to the wrong schema.
  const std::string& fingerprint() const { return fingerprint_; }

  bool operator==(const Schema& other) const;

 private:
  std::vector<Attribute> attributes_;
  std::size_t class_index_ = 0;
  std::string fingerprint_;
};

using Cell = std::variant<double, std::string>;

struct Record {
  std::vector<Cell> values;

  bool operator==(const Record&) const = default;
};

// An ordered table of records conforming to a shared schema. Record order is
// stable: index i in an original dataset corresponds to index i in any
// modified dataset derived from it.
class Dataset {
 public:
  Dataset(std::shared_ptr<const Schema> schema, std::vector<Record> records);

  const Schema& schema() const { return *schema_; }
  const std::shared_ptr<const Schema>& schema_ptr() const { return schema_; }
  std::size_t size() const { return records_.size(); }
  std::span<const Record> records() const { return records_; }
  const Record& record(std::size_t row) const { return records_[row]; }

  double numeric(std::size_t row, std::size_t col) const;
  const std::string& categorical(std::size_t row, std::size_t col) const;
  // The class value of a record.
  const std::string& label(std::size_t row) const;

  // Observed class labels, sorted; and their counts.
  std::vector<std::string> class_labels() const;
  std::map<std::string, std::int64_t> label_counts() const;
  // Most frequent class label; ties go to the lexicographically smaller one.
  std::string majority_label() const;

  bool operator==(const Dataset& other) const;

 private:
  std::shared_ptr<const Schema> schema_;
  std::vector<Record> records_;
};

struct NumericStats {
  double min = 0.0;
  double max = 0.0;
  double variance = 0.0;  // population variance
};

struct CategoricalStats {
  std::vector<std::string> values;  // column multiset, record order
  std::vector<std::string> unique;  // distinct values, sorted
};

using AttributeStats = std::variant<NumericStats, CategoricalStats>;

// Deterministic stratified fold assignment; a pure function of
// (dataset content, k, seed).
struct FoldPlan {
  int k = 0;
  std::vector<int> assignment;  // fold index per record index
  std::uint64_t seed = 0;

  bool operator==(const FoldPlan&) const = default;
};

// Schema sidecar:
//   {"class": "...", "attributes": [{"name": "...", "kind": "numeric"}, ...]}
Schema parse_schema_json(const std::string& text);
std::string schema_to_json(const Schema& schema);

// CSV with a header row, comma delimiter, double-quote quoting, UTF-8.
// Header names must match the schema (any column order); missing values and
// unparseable or non-finite numeric cells are rejected.
Dataset load_dataset(std::istream& in, std::shared_ptr<const Schema> schema);

// Schema inference: a column is numeric iff every value parses as a finite
// real; the class attribute is named explicitly and is always categorical.
Dataset load_dataset_infer(std::istream& in, const std::string& class_attribute);

void save_dataset(const Dataset& dataset, std::ostream& out);

AttributeStats attribute_stats(const Dataset& dataset, const std::string& attribute);

FoldPlan stratified_folds(const Dataset& dataset, int k, std::uint64_t seed);

// (train, test): test holds the records assigned to `held_out`, train the rest.
std::pair<Dataset, Dataset> split(const Dataset& dataset, const FoldPlan& plan,
                                  int held_out);

// Shortest decimal form that round-trips to the same double.
std::string format_double(double value);
// Strict parse of a finite real; throws DataError otherwise.
double parse_double(std::string_view text);

}  // namespace patret
