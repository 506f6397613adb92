#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "patret/dataset.hpp"

namespace patret {

// LE/GT compare numeric attributes against a threshold; EQ/NEQ compare
// categorical attributes against a category. NEQ exists so one-vs-rest
// categorical tree splits can express the right branch; it round-trips
// through serialization like the public operators.
enum class ConditionOp { kLe, kGt, kEq, kNeq };

struct Condition {
  std::string attribute;
  ConditionOp op = ConditionOp::kLe;
  Cell value;

  static Condition le(std::string attribute, double threshold);
  static Condition gt(std::string attribute, double threshold);
  static Condition eq(std::string attribute, std::string category);
  static Condition neq(std::string attribute, std::string category);

  double threshold() const;
  const std::string& category() const;

  bool operator==(const Condition&) const = default;
};

// Label histogram over a record selection. total == 0 is a valid degenerate
// state (empty selection); all frequencies are 0 there.
struct LabelDistribution {
  std::map<std::string, std::int64_t> counts;
  std::int64_t total = 0;

  double frequency(const std::string& label) const;

  bool operator==(const LabelDistribution&) const = default;
};

// A conjunctive rule: antecedent conditions plus the label counts observed in
// the selection at mining time. Conditions are normalized on construction:
// per attribute at most one LE (min threshold) and one GT (max threshold)
// with a non-empty interval, at most one EQ, NEQs deduplicated and dropped
// when an EQ makes them redundant. Contradictory antecedents are rejected.
class Pattern {
 public:
  Pattern(std::int64_t id, std::vector<Condition> conditions,
          std::map<std::string, std::int64_t> label_counts);

  std::int64_t id() const { return id_; }
  std::span<const Condition> conditions() const { return conditions_; }
  const std::map<std::string, std::int64_t>& label_counts() const { return label_counts_; }
  std::int64_t support_d() const { return support_d_; }

  // Most frequent mining-time label; ties go to the lexicographically
  // smaller label. Requires support_d > 0.
  const std::string& majority_label() const;
  // Relative frequency of the majority label; requires support_d > 0.
  double confidence() const;
  // Relative frequency of one label; 0 when support_d == 0.
  double frequency_of(const std::string& label) const;

  bool operator==(const Pattern&) const = default;

 private:
  std::int64_t id_ = 0;
  std::vector<Condition> conditions_;
  std::map<std::string, std::int64_t> label_counts_;
  std::int64_t support_d_ = 0;
};

// An ordered rule list tied to the schema it was mined against. partition
// means the patterns are mutually exclusive and exhaustive (tree leaves).
class PatternSet {
 public:
  PatternSet(std::vector<Pattern> patterns, std::string schema_fingerprint,
             std::string default_label, bool partition);

  std::span<const Pattern> patterns() const { return patterns_; }
  std::size_t size() const { return patterns_.size(); }
  const Pattern& pattern(std::size_t index) const { return patterns_[index]; }
  const std::string& schema_fingerprint() const { return schema_fingerprint_; }
  const std::string& default_label() const { return default_label_; }
  bool partition() const { return partition_; }

  bool operator==(const PatternSet&) const = default;

 private:
  std::vector<Pattern> patterns_;
  std::string schema_fingerprint_;
  std::string default_label_;
  bool partition_ = false;
};

struct Prediction {
  std::string label;
  // Relative frequency of the designated positive label in the deciding
  // pattern; absent when no pattern matched or no positive label was given.
  std::optional<double> positive_score;
};

bool matches(const Condition& condition, const Schema& schema, const Record& record);
bool matches(const Pattern& pattern, const Schema& schema, const Record& record);

// Indices of the records the pattern selects, ascending.
std::vector<std::size_t> select(const Pattern& pattern, const Dataset& dataset);
std::int64_t support(const Pattern& pattern, const Dataset& dataset);
LabelDistribution label_distribution(const Pattern& pattern, const Dataset& dataset);

// Partition sets: the unique matching pattern's majority label. Otherwise:
// the matching pattern with the highest confidence, ties to higher support,
// then lower id; patterns with support_d == 0 carry no label evidence and
// are skipped. No matching pattern yields the set's default label.
Prediction predict(const PatternSet& zs, const Schema& schema, const Record& record,
                   const std::string* positive_label = nullptr);

std::string serialize_patterns(const PatternSet& zs);
PatternSet parse_patterns(const std::string& text);

// Fingerprint check before applying a pattern set to a dataset.
void require_schema_match(const PatternSet& zs, const Schema& schema);

}  // namespace patret
