#include "patret/measures.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <set>

#include "json.hpp"
#include "patret/errors.hpp"
#include "patret/version.hpp"

namespace patret {
namespace {

void require_comparable(const Dataset& d, const Dataset& m) {
  if (!(d.schema() == m.schema())) {
    throw DataError("original and modified datasets have different schemas");
  }
  if (d.size() != m.size()) {
    throw DataError("original and modified datasets have different record counts");
  }
}

std::int64_t effective_floor(std::int64_t min_support) {
  return std::max<std::int64_t>(1, min_support);
}

double psd_from_rows(std::span<const PerPatternRow> rows, std::size_t dataset_size) {
  if (rows.empty()) throw DataError("empty pattern set");
  std::int64_t sum = 0;
  for (const PerPatternRow& row : rows) {
    sum += std::abs(row.support_d - row.support_m);
  }
  return static_cast<double>(sum) /
         (static_cast<double>(rows.size()) * static_cast<double>(dataset_size));
}

PldResult pld_from_rows(std::span<const PerPatternRow> rows) {
  if (rows.empty()) throw DataError("empty pattern set");
  PldResult out;
  double included_sum = 0.0;
  double raw_sum = 0.0;
  for (const PerPatternRow& row : rows) {
    if (row.chi2) raw_sum += *row.chi2;
    if (row.included_in_pld) {
      included_sum += *row.chi2;
      ++out.included_count;
    }
  }
  if (out.included_count == 0) {
    throw DataError("every pattern is below the support floor");
  }
  out.pld = included_sum / static_cast<double>(out.included_count);
  out.pld_raw = raw_sum / static_cast<double>(rows.size());
  return out;
}

// Aggregate mining-time prior of the default label, the score for records no
// pattern matches.
double default_label_prior(const PatternSet& zs) {
  std::int64_t hits = 0;
  std::int64_t total = 0;
  for (const Pattern& p : zs.patterns()) {
    auto it = p.label_counts().find(zs.default_label());
    if (it != p.label_counts().end()) hits += it->second;
    total += p.support_d();
  }
  if (total == 0) return 0.5;
  return static_cast<double>(hits) / static_cast<double>(total);
}

nlohmann::json optional_number(const std::optional<double>& value) {
  if (value) return *value;
  return nullptr;
}

}  // namespace

double prediction_accuracy(const PatternSet& zs, const Dataset& eval_data) {
  require_schema_match(zs, eval_data.schema());
  std::int64_t correct = 0;
  for (std::size_t row = 0; row < eval_data.size(); ++row) {
    const Prediction pred = predict(zs, eval_data.schema(), eval_data.record(row));
    correct += (pred.label == eval_data.label(row));
  }
  return static_cast<double>(correct) / static_cast<double>(eval_data.size());
}

PatternAccuracy pattern_accuracy(const PatternSet& zs, const Dataset& d,
                                 const Dataset& m) {
  require_comparable(d, m);
  PatternAccuracy out;
  out.alpha_dd = prediction_accuracy(zs, d);
  out.alpha_dm = prediction_accuracy(zs, m);
  out.eq1 = std::abs(out.alpha_dd - out.alpha_dm);
  return out;
}

double psd(const PatternSet& zs, const Dataset& d, const Dataset& m) {
  return psd_from_rows(per_pattern_report(zs, d, m), d.size());
}

double chi2_histogram_distance(const LabelDistribution& dist_d,
                               const LabelDistribution& dist_m) {
  std::set<std::string> labels;
  for (const auto& [label, count] : dist_d.counts) labels.insert(label);
  for (const auto& [label, count] : dist_m.counts) labels.insert(label);
  double sum = 0.0;
  for (const std::string& label : labels) {
    const double fd = dist_d.frequency(label);
    const double fm = dist_m.frequency(label);
    const double denom = fd + fm;
    if (denom > 0.0) sum += (fd - fm) * (fd - fm) / denom;
  }
  return 0.5 * sum;
}

double chi2_label_distance(const Pattern& pattern, const Dataset& d, const Dataset& m) {
  require_comparable(d, m);
  const LabelDistribution dist_d = label_distribution(pattern, d);
  if (dist_d.total == 0) {
    throw DataError("pattern selects nothing in the original dataset");
  }
  return chi2_histogram_distance(dist_d, label_distribution(pattern, m));
}

PldResult pld(const PatternSet& zs, const Dataset& d, const Dataset& m,
              std::int64_t min_support) {
  return pld_from_rows(per_pattern_report(zs, d, m, min_support));
}

ConfusionCounts confusion(const PatternSet& zs, const Dataset& eval_data,
                          const std::string& positive_label) {
  require_schema_match(zs, eval_data.schema());
  const std::vector<std::string> labels = eval_data.class_labels();
  if (labels.size() > 2) throw DataError("class attribute is not binary");
  if (std::find(labels.begin(), labels.end(), positive_label) == labels.end()) {
    throw DataError("unknown positive label: " + positive_label);
  }
  ConfusionCounts out;
  out.positive_label = positive_label;
  for (std::size_t row = 0; row < eval_data.size(); ++row) {
    const bool actual = eval_data.label(row) == positive_label;
    const Prediction pred = predict(zs, eval_data.schema(), eval_data.record(row));
    const bool predicted = pred.label == positive_label;
    if (actual && predicted) ++out.tp;
    if (!actual && predicted) ++out.fp;
    if (!actual && !predicted) ++out.tn;
    if (actual && !predicted) ++out.fn;
  }
  return out;
}

double f_measure(const ConfusionCounts& counts, double beta) {
  if (!(beta > 0.0)) throw DataError("beta must be positive");
  if (counts.tp == 0) return 0.0;
  // (1+b^2)PR / (b^2 P + R) rearranged over the raw counts; exact for
  // integer-friendly cases
  const double b2 = beta * beta;
  const double tp = static_cast<double>(counts.tp);
  const double scaled_tp = (1.0 + b2) * tp;
  return scaled_tp /
         (scaled_tp + static_cast<double>(counts.fp) + b2 * static_cast<double>(counts.fn));
}

double rank_auc(std::span<const double> scores, std::span<const bool> is_positive) {
  if (scores.size() != is_positive.size()) {
    throw DataError("scores and labels differ in length");
  }
  const std::size_t n = scores.size();
  std::int64_t n_pos = 0;
  for (bool b : is_positive) n_pos += b;
  const std::int64_t n_neg = static_cast<std::int64_t>(n) - n_pos;
  if (n_pos == 0 || n_neg == 0) throw DataError("one class absent");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // mean ranks over tied scores, 1-based
  double positive_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double mean_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (is_positive[order[k]]) positive_rank_sum += mean_rank;
    }
    i = j;
  }
  const double n_pos_d = static_cast<double>(n_pos);
  return (positive_rank_sum - n_pos_d * (n_pos_d + 1.0) / 2.0) /
         (n_pos_d * static_cast<double>(n_neg));
}

double auc(const PatternSet& zs, const Dataset& eval_data,
           const std::string& positive_label) {
  require_schema_match(zs, eval_data.schema());
  const std::vector<std::string> labels = eval_data.class_labels();
  if (labels.size() > 2) throw DataError("class attribute is not binary");
  if (labels.size() < 2 ||
      std::find(labels.begin(), labels.end(), positive_label) == labels.end()) {
    throw DataError("one class absent");
  }
  const double fallback = default_label_prior(zs);
  const std::size_t n = eval_data.size();
  std::vector<double> scores;
  scores.reserve(n);
  // plain bool buffer: vector<bool> is not contiguous
  std::unique_ptr<bool[]> is_positive(new bool[n]);
  for (std::size_t row = 0; row < n; ++row) {
    const Prediction pred =
        predict(zs, eval_data.schema(), eval_data.record(row), &positive_label);
    scores.push_back(pred.positive_score.value_or(fallback));
    is_positive[row] = eval_data.label(row) == positive_label;
  }
  return rank_auc(scores, std::span<const bool>(is_positive.get(), n));
}

std::vector<PerPatternRow> per_pattern_report(const PatternSet& zs, const Dataset& d,
                                              const Dataset& m,
                                              std::int64_t min_support) {
  require_comparable(d, m);
  require_schema_match(zs, d.schema());
  const std::int64_t floor = effective_floor(min_support);
  std::vector<PerPatternRow> rows(zs.size());
  for (const Pattern& p : zs.patterns()) {
    PerPatternRow row;
    row.pattern_id = p.id();
    const LabelDistribution dist_d = label_distribution(p, d);
    const LabelDistribution dist_m = label_distribution(p, m);
    row.support_d = dist_d.total;
    row.support_m = dist_m.total;
    if (row.support_d > 0) {
      row.chi2 = chi2_histogram_distance(dist_d, dist_m);
      row.vanished = row.support_m == 0;
    }
    row.included_in_pld = row.support_d >= floor;
    rows[static_cast<std::size_t>(p.id())] = std::move(row);
  }
  return rows;
}

MeasureReport evaluate_measures(const PatternSet& zs, const Dataset& d, const Dataset& m,
                                const Dataset* test, const std::string* positive_label,
                                std::int64_t pld_min_support) {
  MeasureReport report;
  report.pattern_accuracy = pattern_accuracy(zs, d, m);
  report.per_pattern = per_pattern_report(zs, d, m, pld_min_support);
  report.psd = psd_from_rows(report.per_pattern, d.size());
  report.pld = pld_from_rows(report.per_pattern);
  report.pld_min_support = pld_min_support;
  if (test != nullptr) {
    report.prediction_accuracy = prediction_accuracy(zs, *test);
    if (positive_label != nullptr) {
      report.positive_label = *positive_label;
      report.f_measure = f_measure(confusion(zs, *test, *positive_label));
      report.auc = auc(zs, *test, *positive_label);
    }
  }
  return report;
}

std::string report_to_json(const MeasureReport& report) {
  nlohmann::json doc;
  doc["pattern_accuracy_eq1"] = report.pattern_accuracy.eq1;
  doc["alpha_dd"] = report.pattern_accuracy.alpha_dd;
  doc["alpha_dm"] = report.pattern_accuracy.alpha_dm;
  doc["psd"] = report.psd;
  doc["pld"] = report.pld.pld;
  doc["pld_raw"] = report.pld.pld_raw;
  doc["pld_pattern_count"] = report.pld.included_count;
  doc["prediction_accuracy"] = optional_number(report.prediction_accuracy);
  doc["f_measure"] = optional_number(report.f_measure);
  doc["auc"] = optional_number(report.auc);
  doc["per_pattern"] = nlohmann::json::array();
  for (const PerPatternRow& row : report.per_pattern) {
    nlohmann::json entry;
    entry["id"] = row.pattern_id;
    entry["support_d"] = row.support_d;
    entry["support_m"] = row.support_m;
    entry["chi2"] = row.chi2 ? nlohmann::json(*row.chi2) : nlohmann::json(nullptr);
    entry["vanished"] = row.vanished;
    entry["included_in_pld"] = row.included_in_pld;
    doc["per_pattern"].push_back(std::move(entry));
  }
  nlohmann::json meta;
  meta["version"] = std::string(kVersion);
  meta["variance"] = "population";
  meta["rng"] = "counter-based splitmix64";
  meta["gaussian_method"] = "inverse normal cdf";
  meta["label_tie_break"] = "lexicographic";
  meta["unmatched_score"] = "default label prior";
  meta["pld_min_support"] = report.pld_min_support;
  meta["positive_label"] =
      report.positive_label ? nlohmann::json(*report.positive_label) : nlohmann::json(nullptr);
  doc["metadata"] = std::move(meta);
  return doc.dump(2) + "\n";
}

}  // namespace patret
