#include "patret/pattern.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "json.hpp"
#include "patret/errors.hpp"

namespace patret {
namespace {

const char* op_name(ConditionOp op) {
  switch (op) {
    case ConditionOp::kLe: return "le";
    case ConditionOp::kGt: return "gt";
    case ConditionOp::kEq: return "eq";
    case ConditionOp::kNeq: return "neq";
  }
  throw InternalError("unknown condition operator");
}

ConditionOp parse_op(const std::string& name) {
  if (name == "le") return ConditionOp::kLe;
  if (name == "gt") return ConditionOp::kGt;
  if (name == "eq") return ConditionOp::kEq;
  if (name == "neq") return ConditionOp::kNeq;
  throw DataError("unknown condition operator: " + name);
}

bool is_numeric_op(ConditionOp op) {
  return op == ConditionOp::kLe || op == ConditionOp::kGt;
}

// Per-attribute view used while normalizing an antecedent.
struct AttributeConditions {
  std::optional<double> le;
  std::optional<double> gt;
  std::optional<std::string> eq;
  std::set<std::string> neq;
  bool numeric = false;
  bool categorical = false;
};

}  // namespace

Condition Condition::le(std::string attribute, double threshold) {
  return {std::move(attribute), ConditionOp::kLe, threshold};
}

Condition Condition::gt(std::string attribute, double threshold) {
  return {std::move(attribute), ConditionOp::kGt, threshold};
}

Condition Condition::eq(std::string attribute, std::string category) {
  return {std::move(attribute), ConditionOp::kEq, std::move(category)};
}

Condition Condition::neq(std::string attribute, std::string category) {
  return {std::move(attribute), ConditionOp::kNeq, std::move(category)};
}

double Condition::threshold() const {
  const double* v = std::get_if<double>(&value);
  if (v == nullptr) throw InternalError("threshold access on a categorical condition");
  return *v;
}

const std::string& Condition::category() const {
  const std::string* v = std::get_if<std::string>(&value);
  if (v == nullptr) throw InternalError("category access on a numeric condition");
  return *v;
}

double LabelDistribution::frequency(const std::string& label) const {
  if (total == 0) return 0.0;
  auto it = counts.find(label);
  if (it == counts.end()) return 0.0;
  return static_cast<double>(it->second) / static_cast<double>(total);
}

Pattern::Pattern(std::int64_t id, std::vector<Condition> conditions,
                 std::map<std::string, std::int64_t> label_counts)
    : id_(id), label_counts_(std::move(label_counts)) {
  if (id_ < 0) throw DataError("pattern id must be non-negative");
  for (const auto& [label, count] : label_counts_) {
    if (label.empty()) throw DataError("pattern has an empty class label");
    if (count < 0) throw DataError("pattern has a negative label count");
    support_d_ += count;
  }

  std::map<std::string, AttributeConditions> grouped;
  for (const Condition& c : conditions) {
    if (c.attribute.empty()) throw DataError("condition has an empty attribute name");
    AttributeConditions& g = grouped[c.attribute];
    if (is_numeric_op(c.op)) {
      const double* t = std::get_if<double>(&c.value);
      if (t == nullptr || !std::isfinite(*t)) {
        throw DataError("numeric condition on " + c.attribute + " needs a finite threshold");
      }
      g.numeric = true;
      if (c.op == ConditionOp::kLe) {
        g.le = g.le ? std::min(*g.le, *t) : *t;
      } else {
        g.gt = g.gt ? std::max(*g.gt, *t) : *t;
      }
    } else {
      const std::string* v = std::get_if<std::string>(&c.value);
      if (v == nullptr || v->empty()) {
        throw DataError("categorical condition on " + c.attribute + " needs a category");
      }
      g.categorical = true;
      if (c.op == ConditionOp::kEq) {
        if (g.eq && *g.eq != *v) {
          throw DataError("contradictory equality conditions on " + c.attribute);
        }
        g.eq = *v;
      } else {
        g.neq.insert(*v);
      }
    }
  }

  for (auto& [attribute, g] : grouped) {
    if (g.numeric && g.categorical) {
      throw DataError("mixed numeric and categorical conditions on " + attribute);
    }
    if (g.le && g.gt && !(*g.gt < *g.le)) {
      throw DataError("empty interval for " + attribute);
    }
    if (g.eq) {
      if (g.neq.count(*g.eq) != 0) {
        throw DataError("contradictory conditions on " + attribute);
      }
      g.neq.clear();  // implied by the equality
    }
    if (g.le) conditions_.push_back(Condition::le(attribute, *g.le));
    if (g.gt) conditions_.push_back(Condition::gt(attribute, *g.gt));
    if (g.eq) conditions_.push_back(Condition::eq(attribute, *g.eq));
    for (const std::string& v : g.neq) conditions_.push_back(Condition::neq(attribute, v));
  }
}

const std::string& Pattern::majority_label() const {
  if (support_d_ == 0) throw InternalError("majority label of a pattern with no support");
  const std::string* best = nullptr;
  std::int64_t best_count = -1;
  for (const auto& [label, count] : label_counts_) {
    if (count > best_count) {
      best = &label;
      best_count = count;
    }
  }
  return *best;
}

double Pattern::confidence() const {
  return frequency_of(majority_label());
}

double Pattern::frequency_of(const std::string& label) const {
  if (support_d_ == 0) return 0.0;
  auto it = label_counts_.find(label);
  if (it == label_counts_.end()) return 0.0;
  return static_cast<double>(it->second) / static_cast<double>(support_d_);
}

PatternSet::PatternSet(std::vector<Pattern> patterns, std::string schema_fingerprint,
                       std::string default_label, bool partition)
    : patterns_(std::move(patterns)),
      schema_fingerprint_(std::move(schema_fingerprint)),
      default_label_(std::move(default_label)),
      partition_(partition) {
  if (schema_fingerprint_.empty()) throw DataError("pattern set has no schema fingerprint");
  if (default_label_.empty()) throw DataError("pattern set has no default label");
  std::vector<bool> seen(patterns_.size(), false);
  for (const Pattern& p : patterns_) {
    const std::int64_t id = p.id();
    if (id < 0 || static_cast<std::size_t>(id) >= patterns_.size() ||
        seen[static_cast<std::size_t>(id)]) {
      throw DataError("pattern ids must be unique and dense 0..n-1");
    }
    seen[static_cast<std::size_t>(id)] = true;
  }
}

bool matches(const Condition& condition, const Schema& schema, const Record& record) {
  auto idx = schema.index_of(condition.attribute);
  if (!idx) throw DataError("pattern references unknown attribute: " + condition.attribute);
  const Attribute& attr = schema.attribute(*idx);
  const Cell& cell = record.values[*idx];
  if (is_numeric_op(condition.op)) {
    if (attr.kind != AttrKind::kNumeric) {
      throw DataError("numeric condition on categorical attribute " + condition.attribute);
    }
    const double value = std::get<double>(cell);
    return condition.op == ConditionOp::kLe ? value <= condition.threshold()
                                            : value > condition.threshold();
  }
  if (attr.kind != AttrKind::kCategorical) {
    throw DataError("categorical condition on numeric attribute " + condition.attribute);
  }
  const std::string& value = std::get<std::string>(cell);
  return condition.op == ConditionOp::kEq ? value == condition.category()
                                          : value != condition.category();
}

bool matches(const Pattern& pattern, const Schema& schema, const Record& record) {
  for (const Condition& c : pattern.conditions()) {
    if (!matches(c, schema, record)) return false;
  }
  return true;
}

std::vector<std::size_t> select(const Pattern& pattern, const Dataset& dataset) {
  std::vector<std::size_t> out;
  for (std::size_t row = 0; row < dataset.size(); ++row) {
    if (matches(pattern, dataset.schema(), dataset.record(row))) out.push_back(row);
  }
  return out;
}

std::int64_t support(const Pattern& pattern, const Dataset& dataset) {
  std::int64_t n = 0;
  for (std::size_t row = 0; row < dataset.size(); ++row) {
    if (matches(pattern, dataset.schema(), dataset.record(row))) ++n;
  }
  return n;
}

LabelDistribution label_distribution(const Pattern& pattern, const Dataset& dataset) {
  LabelDistribution dist;
  for (std::size_t row : select(pattern, dataset)) {
    ++dist.counts[dataset.label(row)];
    ++dist.total;
  }
  return dist;
}

Prediction predict(const PatternSet& zs, const Schema& schema, const Record& record,
                   const std::string* positive_label) {
  const Pattern* chosen = nullptr;
  for (const Pattern& p : zs.patterns()) {
    if (p.support_d() == 0) continue;  // no label evidence
    if (!matches(p, schema, record)) continue;
    if (zs.partition()) {
      chosen = &p;
      break;
    }
    if (chosen == nullptr) {
      chosen = &p;
      continue;
    }
    const double pc = p.confidence();
    const double cc = chosen->confidence();
    if (pc > cc ||
        (pc == cc && (p.support_d() > chosen->support_d() ||
                      (p.support_d() == chosen->support_d() && p.id() < chosen->id())))) {
      chosen = &p;
    }
  }
  if (chosen == nullptr) return {zs.default_label(), std::nullopt};
  Prediction out{chosen->majority_label(), std::nullopt};
  if (positive_label != nullptr) out.positive_score = chosen->frequency_of(*positive_label);
  return out;
}

std::string serialize_patterns(const PatternSet& zs) {
  nlohmann::json doc;
  doc["schema_fingerprint"] = zs.schema_fingerprint();
  doc["default_label"] = zs.default_label();
  doc["partition"] = zs.partition();
  doc["patterns"] = nlohmann::json::array();
  for (const Pattern& p : zs.patterns()) {
    nlohmann::json conditions = nlohmann::json::array();
    for (const Condition& c : p.conditions()) {
      nlohmann::json entry;
      entry["attr"] = c.attribute;
      entry["op"] = op_name(c.op);
      if (is_numeric_op(c.op)) {
        entry["value"] = c.threshold();
      } else {
        entry["value"] = c.category();
      }
      conditions.push_back(std::move(entry));
    }
    doc["patterns"].push_back({{"id", p.id()},
                               {"conditions", std::move(conditions)},
                               {"label_counts", p.label_counts()}});
  }
  return doc.dump(2) + "\n";
}

PatternSet parse_patterns(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("pattern set is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw DataError("pattern set must be a JSON object");
  for (const char* field : {"schema_fingerprint", "default_label", "partition", "patterns"}) {
    if (!doc.contains(field)) {
      throw DataError(std::string("pattern set missing \"") + field + "\"");
    }
  }
  if (!doc["schema_fingerprint"].is_string() || !doc["default_label"].is_string() ||
      !doc["partition"].is_boolean() || !doc["patterns"].is_array()) {
    throw DataError("pattern set has wrongly typed top-level fields");
  }

  std::vector<Pattern> patterns;
  for (const auto& entry : doc["patterns"]) {
    if (!entry.is_object()) throw DataError("pattern entries must be objects");
    for (const char* field : {"id", "conditions", "label_counts"}) {
      if (!entry.contains(field)) {
        throw DataError(std::string("pattern missing \"") + field + "\"");
      }
    }
    if (!entry["id"].is_number_integer() || !entry["conditions"].is_array() ||
        !entry["label_counts"].is_object()) {
      throw DataError("pattern has wrongly typed fields");
    }
    std::vector<Condition> conditions;
    for (const auto& c : entry["conditions"]) {
      if (!c.is_object() || !c.contains("attr") || !c.contains("op") ||
          !c.contains("value") || !c["attr"].is_string() || !c["op"].is_string()) {
        throw DataError("condition needs \"attr\", \"op\", and \"value\"");
      }
      const ConditionOp op = parse_op(c["op"].get<std::string>());
      const std::string attr = c["attr"].get<std::string>();
      if (is_numeric_op(op)) {
        if (!c["value"].is_number()) {
          throw DataError("condition value for " + attr + " must be a number");
        }
        conditions.push_back({attr, op, c["value"].get<double>()});
      } else {
        if (!c["value"].is_string()) {
          throw DataError("condition value for " + attr + " must be a string");
        }
        conditions.push_back({attr, op, c["value"].get<std::string>()});
      }
    }
    std::map<std::string, std::int64_t> counts;
    for (const auto& [label, count] : entry["label_counts"].items()) {
      if (!count.is_number_integer()) {
        throw DataError("label counts must be integers");
      }
      counts[label] = count.get<std::int64_t>();
    }
    patterns.emplace_back(entry["id"].get<std::int64_t>(), std::move(conditions),
                          std::move(counts));
  }
  return PatternSet(std::move(patterns), doc["schema_fingerprint"].get<std::string>(),
                    doc["default_label"].get<std::string>(), doc["partition"].get<bool>());
}

void require_schema_match(const PatternSet& zs, const Schema& schema) {
  if (zs.schema_fingerprint() != schema.fingerprint()) {
    throw DataError("pattern set was built against a different schema");
  }
}

}  // namespace patret
