#include "patret/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "patret/errors.hpp"
#include "patret/rng.hpp"

namespace patret {
namespace {

constexpr std::uint64_t kFoldGroupStream = 0x666f6c6421ull;

const char* kind_name(AttrKind kind) {
  return kind == AttrKind::kNumeric ? "numeric" : "categorical";
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

}  // namespace

Schema::Schema(std::vector<Attribute> attributes, const std::string& class_attribute)
    : attributes_(std::move(attributes)) {
  if (attributes_.size() < 2) {
    throw DataError("schema needs the class attribute and at least one other attribute");
  }
  std::set<std::string> seen;
  for (const Attribute& attr : attributes_) {
    if (attr.name.empty()) throw DataError("schema has an attribute with an empty name");
    if (!seen.insert(attr.name).second) {
      throw DataError("duplicate attribute name: " + attr.name);
    }
  }
  auto idx = index_of(class_attribute);
  if (!idx) throw DataError("class attribute not in schema: " + class_attribute);
  class_index_ = *idx;
  if (attributes_[class_index_].kind != AttrKind::kCategorical) {
    throw DataError("class attribute must be categorical: " + class_attribute);
  }
  std::string canon;
  for (const Attribute& attr : attributes_) {
    canon += attr.name;
    canon += '\x1f';
    canon += kind_name(attr.kind);
    canon += '\x1e';
  }
  canon += class_attribute;
  fingerprint_ = fnv1a_hex(canon);
}

const Attribute& Schema::attribute(std::size_t index) const {
  if (index >= attributes_.size()) throw InternalError("attribute index out of range");
  return attributes_[index];
}

std::optional<std::size_t> Schema::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < attributes_.size(); ++i) {
    if (attributes_[i].name == name) return i;
  }
  return std::nullopt;
}

bool Schema::operator==(const Schema& other) const {
  return attributes_ == other.attributes_ && class_index_ == other.class_index_;
}

Dataset::Dataset(std::shared_ptr<const Schema> schema, std::vector<Record> records)
    : schema_(std::move(schema)), records_(std::move(records)) {
  if (!schema_) throw InternalError("dataset constructed without a schema");
  if (records_.empty()) throw DataError("dataset has no records");
  const std::size_t width = schema_->size();
  for (std::size_t row = 0; row < records_.size(); ++row) {
    const Record& rec = records_[row];
    if (rec.values.size() != width) {
      throw DataError("record " + std::to_string(row + 1) + " has " +
                      std::to_string(rec.values.size()) + " values, schema has " +
                      std::to_string(width));
    }
    for (std::size_t col = 0; col < width; ++col) {
      const Attribute& attr = schema_->attribute(col);
      const Cell& cell = rec.values[col];
      if (attr.kind == AttrKind::kNumeric) {
        const double* v = std::get_if<double>(&cell);
        if (v == nullptr) {
          throw DataError("record " + std::to_string(row + 1) +
                          " holds a categorical value in numeric attribute " + attr.name);
        }
        if (!std::isfinite(*v)) {
          throw DataError("record " + std::to_string(row + 1) +
                          " has a non-finite value in attribute " + attr.name);
        }
      } else {
        const std::string* v = std::get_if<std::string>(&cell);
        if (v == nullptr) {
          throw DataError("record " + std::to_string(row + 1) +
                          " holds a numeric value in categorical attribute " + attr.name);
        }
        if (v->empty()) {
          throw DataError("record " + std::to_string(row + 1) +
                          " has a missing value in attribute " + attr.name);
        }
      }
    }
  }
}

double Dataset::numeric(std::size_t row, std::size_t col) const {
  const double* v = std::get_if<double>(&records_[row].values[col]);
  if (v == nullptr) {
    throw InternalError("numeric access to categorical attribute " +
                        schema_->attribute(col).name);
  }
  return *v;
}

const std::string& Dataset::categorical(std::size_t row, std::size_t col) const {
  const std::string* v = std::get_if<std::string>(&records_[row].values[col]);
  if (v == nullptr) {
    throw InternalError("categorical access to numeric attribute " +
                        schema_->attribute(col).name);
  }
  return *v;
}

const std::string& Dataset::label(std::size_t row) const {
  return categorical(row, schema_->class_index());
}

std::vector<std::string> Dataset::class_labels() const {
  std::set<std::string> labels;
  for (std::size_t i = 0; i < records_.size(); ++i) labels.insert(label(i));
  return {labels.begin(), labels.end()};
}

std::map<std::string, std::int64_t> Dataset::label_counts() const {
  std::map<std::string, std::int64_t> counts;
  for (std::size_t i = 0; i < records_.size(); ++i) ++counts[label(i)];
  return counts;
}

std::string Dataset::majority_label() const {
  const auto counts = label_counts();
  std::string best;
  std::int64_t best_count = -1;
  for (const auto& [value, count] : counts) {
    if (count > best_count) {
      best = value;
      best_count = count;
    }
  }
  return best;
}

bool Dataset::operator==(const Dataset& other) const {
  return *schema_ == *other.schema_ && records_ == other.records_;
}

Schema parse_schema_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("schema is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("class") || !doc.contains("attributes")) {
    throw DataError("schema JSON must be an object with \"class\" and \"attributes\"");
  }
  if (!doc["class"].is_string() || !doc["attributes"].is_array()) {
    throw DataError("schema JSON: \"class\" must be a string, \"attributes\" an array");
  }
  std::vector<Attribute> attrs;
  for (const auto& entry : doc["attributes"]) {
    if (!entry.is_object() || !entry.contains("name") || !entry.contains("kind") ||
        !entry["name"].is_string() || !entry["kind"].is_string()) {
      throw DataError("schema JSON: each attribute needs string \"name\" and \"kind\"");
    }
    const std::string kind = entry["kind"].get<std::string>();
    if (kind != "numeric" && kind != "categorical") {
      throw DataError("schema JSON: unknown attribute kind: " + kind);
    }
    attrs.push_back({entry["name"].get<std::string>(),
                     kind == "numeric" ? AttrKind::kNumeric : AttrKind::kCategorical});
  }
  return Schema(std::move(attrs), doc["class"].get<std::string>());
}

std::string schema_to_json(const Schema& schema) {
  nlohmann::json doc;
  doc["class"] = schema.class_name();
  doc["attributes"] = nlohmann::json::array();
  for (const Attribute& attr : schema.attributes()) {
    doc["attributes"].push_back({{"name", attr.name}, {"kind", kind_name(attr.kind)}});
  }
  return doc.dump(2) + "\n";
}

namespace {

// One CSV record; handles quoted fields, embedded separators and newlines,
// and both LF and CRLF terminators. Returns false at end of input.
bool read_csv_row(std::istream& in, std::vector<std::string>& fields,
                  std::size_t row_for_errors) {
  fields.clear();
  int first = in.peek();
  if (first == std::char_traits<char>::eof()) return false;
  std::string field;
  bool in_quotes = false;
  bool was_quoted = false;
  char c;
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      if (!field.empty()) {
        throw DataError("malformed quoting in row " + std::to_string(row_for_errors));
      }
      in_quotes = true;
      was_quoted = true;
      continue;
    }
    if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      was_quoted = false;
      continue;
    }
    if (c == '\r') {
      if (in.peek() == '\n') in.get(c);
      fields.push_back(std::move(field));
      return true;
    }
    if (c == '\n') {
      fields.push_back(std::move(field));
      return true;
    }
    if (was_quoted) {
      throw DataError("malformed quoting in row " + std::to_string(row_for_errors));
    }
    field += c;
  }
  if (in_quotes) {
    throw DataError("unterminated quoted field in row " + std::to_string(row_for_errors));
  }
  fields.push_back(std::move(field));
  return true;
}

std::vector<std::string> read_header(std::istream& in) {
  std::vector<std::string> header;
  if (!read_csv_row(in, header, 1)) throw DataError("CSV input is empty");
  if (!header.empty() && header[0].rfind("\xef\xbb\xbf", 0) == 0) {
    header[0].erase(0, 3);
  }
  std::set<std::string> seen;
  for (const std::string& name : header) {
    if (name.empty()) throw DataError("CSV header has an empty column name");
    if (!seen.insert(name).second) throw DataError("CSV header repeats column: " + name);
  }
  return header;
}

std::optional<double> try_parse_double(std::string_view text) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) return std::nullopt;
  return value;
}

void quote_csv_field(const std::string& value, std::ostream& out) {
  if (value.find_first_of(",\"\r\n") == std::string::npos) {
    out << value;
    return;
  }
  out << '"';
  for (char c : value) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

}  // namespace

Dataset load_dataset(std::istream& in, std::shared_ptr<const Schema> schema) {
  if (!schema) throw InternalError("load_dataset called without a schema");
  const std::vector<std::string> header = read_header(in);
  if (header.size() != schema->size()) {
    throw DataError("CSV has " + std::to_string(header.size()) +
                    " columns, schema has " + std::to_string(schema->size()));
  }
  // schema column -> CSV column
  std::vector<std::size_t> source(schema->size());
  for (std::size_t csv_col = 0; csv_col < header.size(); ++csv_col) {
    auto idx = schema->index_of(header[csv_col]);
    if (!idx) throw DataError("CSV column not in schema: " + header[csv_col]);
    source[*idx] = csv_col;
  }

  std::vector<Record> records;
  std::vector<std::string> fields;
  std::size_t data_row = 0;
  while (read_csv_row(in, fields, data_row + 2)) {
    ++data_row;
    if (fields.size() != schema->size()) {
      throw DataError("data row " + std::to_string(data_row) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(schema->size()));
    }
    Record rec;
    rec.values.reserve(schema->size());
    for (std::size_t col = 0; col < schema->size(); ++col) {
      const std::string& raw = fields[source[col]];
      const Attribute& attr = schema->attribute(col);
      if (raw.empty()) {
        throw DataError("missing value at row " + std::to_string(data_row) +
                        " in attribute " + attr.name);
      }
      if (attr.kind == AttrKind::kNumeric) {
        auto value = try_parse_double(raw);
        if (!value) {
          throw DataError("unparseable numeric value \"" + raw + "\" at row " +
                          std::to_string(data_row) + " in attribute " + attr.name);
        }
        rec.values.emplace_back(*value);
      } else {
        rec.values.emplace_back(raw);
      }
    }
    records.push_back(std::move(rec));
  }
  return Dataset(std::move(schema), std::move(records));
}

Dataset load_dataset_infer(std::istream& in, const std::string& class_attribute) {
  const std::vector<std::string> header = read_header(in);
  bool has_class = false;
  for (const std::string& name : header) has_class |= (name == class_attribute);
  if (!has_class) throw DataError("class attribute not in CSV header: " + class_attribute);

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> fields;
  std::size_t data_row = 0;
  while (read_csv_row(in, fields, data_row + 2)) {
    ++data_row;
    if (fields.size() != header.size()) {
      throw DataError("data row " + std::to_string(data_row) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(header.size()));
    }
    for (std::size_t col = 0; col < fields.size(); ++col) {
      if (fields[col].empty()) {
        throw DataError("missing value at row " + std::to_string(data_row) +
                        " in attribute " + header[col]);
      }
    }
    rows.push_back(fields);
  }
  if (rows.empty()) throw DataError("dataset has no records");

  std::vector<Attribute> attrs;
  for (std::size_t col = 0; col < header.size(); ++col) {
    bool numeric = header[col] != class_attribute;
    for (const auto& row : rows) {
      if (!numeric) break;
      numeric = try_parse_double(row[col]).has_value();
    }
    attrs.push_back({header[col], numeric ? AttrKind::kNumeric : AttrKind::kCategorical});
  }
  auto schema = std::make_shared<Schema>(std::move(attrs), class_attribute);

  std::vector<Record> records;
  records.reserve(rows.size());
  for (const auto& row : rows) {
    Record rec;
    rec.values.reserve(row.size());
    for (std::size_t col = 0; col < row.size(); ++col) {
      if (schema->attribute(col).kind == AttrKind::kNumeric) {
        rec.values.emplace_back(*try_parse_double(row[col]));
      } else {
        rec.values.emplace_back(row[col]);
      }
    }
    records.push_back(std::move(rec));
  }
  return Dataset(std::move(schema), std::move(records));
}

void save_dataset(const Dataset& dataset, std::ostream& out) {
  const Schema& schema = dataset.schema();
  for (std::size_t col = 0; col < schema.size(); ++col) {
    if (col != 0) out << ',';
    quote_csv_field(schema.attribute(col).name, out);
  }
  out << '\n';
  for (std::size_t row = 0; row < dataset.size(); ++row) {
    for (std::size_t col = 0; col < schema.size(); ++col) {
      if (col != 0) out << ',';
      if (schema.attribute(col).kind == AttrKind::kNumeric) {
        out << format_double(dataset.numeric(row, col));
      } else {
        quote_csv_field(dataset.categorical(row, col), out);
      }
    }
    out << '\n';
  }
}

AttributeStats attribute_stats(const Dataset& dataset, const std::string& attribute) {
  const Schema& schema = dataset.schema();
  auto idx = schema.index_of(attribute);
  if (!idx) throw DataError("unknown attribute: " + attribute);
  if (*idx == schema.class_index()) {
    throw DataError("stats are not defined for the class attribute");
  }
  const std::size_t col = *idx;
  const std::size_t n = dataset.size();
  if (schema.attribute(col).kind == AttrKind::kNumeric) {
    NumericStats stats;
    stats.min = dataset.numeric(0, col);
    stats.max = stats.min;
    double mean = 0.0;
    for (std::size_t row = 0; row < n; ++row) {
      const double v = dataset.numeric(row, col);
      stats.min = std::min(stats.min, v);
      stats.max = std::max(stats.max, v);
      mean += v;
    }
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t row = 0; row < n; ++row) {
      const double d = dataset.numeric(row, col) - mean;
      ss += d * d;
    }
    stats.variance = ss / static_cast<double>(n);
    return stats;
  }
  CategoricalStats stats;
  stats.values.reserve(n);
  std::set<std::string> unique;
  for (std::size_t row = 0; row < n; ++row) {
    const std::string& v = dataset.categorical(row, col);
    stats.values.push_back(v);
    unique.insert(v);
  }
  stats.unique.assign(unique.begin(), unique.end());
  return stats;
}

FoldPlan stratified_folds(const Dataset& dataset, int k, std::uint64_t seed) {
  if (k < 2) throw DataError("fold count must be at least 2");
  if (static_cast<std::size_t>(k) > dataset.size()) {
    throw DataError("fold count exceeds record count");
  }
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t row = 0; row < dataset.size(); ++row) {
    groups[dataset.label(row)].push_back(row);
  }
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.assignment.assign(dataset.size(), 0);
  std::size_t offset = 0;
  std::uint64_t group_index = 0;
  for (auto& [label, rows] : groups) {
    CounterRng rng(CounterRng::derive_key(seed, {kFoldGroupStream, group_index}));
    for (std::size_t i = rows.size(); i > 1; --i) {
      const std::uint64_t j = rng.next_below(i);
      std::swap(rows[i - 1], rows[j]);
    }
    for (std::size_t t = 0; t < rows.size(); ++t) {
      plan.assignment[rows[t]] = static_cast<int>((offset + t) % static_cast<std::size_t>(k));
    }
    offset += rows.size();
    ++group_index;
  }
  return plan;
}

std::pair<Dataset, Dataset> split(const Dataset& dataset, const FoldPlan& plan,
                                  int held_out) {
  if (plan.assignment.size() != dataset.size()) {
    throw DataError("fold plan does not cover the dataset");
  }
  if (held_out < 0 || held_out >= plan.k) throw DataError("held-out fold out of range");
  std::vector<Record> train;
  std::vector<Record> test;
  for (std::size_t row = 0; row < dataset.size(); ++row) {
    if (plan.assignment[row] == held_out) {
      test.push_back(dataset.record(row));
    } else {
      train.push_back(dataset.record(row));
    }
  }
  return {Dataset(dataset.schema_ptr(), std::move(train)),
          Dataset(dataset.schema_ptr(), std::move(test))};
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw InternalError("double formatting failed");
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  auto value = try_parse_double(text);
  if (!value) throw DataError("not a finite number: \"" + std::string(text) + "\"");
  return *value;
}

}  // namespace patret
