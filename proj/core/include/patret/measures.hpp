#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "patret/dataset.hpp"
#include "patret/pattern.hpp"

namespace patret {

struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;
  std::string positive_label;
};

struct PatternAccuracy {
  double eq1 = 0.0;  // |alpha_dd - alpha_dm|
  double alpha_dd = 0.0;
  double alpha_dm = 0.0;
};

struct PerPatternRow {
  std::int64_t pattern_id = 0;
  std::int64_t support_d = 0;  // recomputed, not the stored mining-time value
  std::int64_t support_m = 0;
  std::optional<double> chi2;  // absent only when support_d == 0
  bool vanished = false;       // support_d > 0 and support_m == 0
  bool included_in_pld = false;
};

struct PldResult {
  double pld = 0.0;  // mean chi2 over patterns passing the support floor
  std::int64_t included_count = 0;
  // Strict mean over all patterns (divisor |Z_D|); patterns without a
  // defined chi2 contribute 0.
  double pld_raw = 0.0;
};

struct MeasureReport {
  PatternAccuracy pattern_accuracy;
  double psd = 0.0;
  PldResult pld;
  std::optional<double> prediction_accuracy;
  std::optional<double> f_measure;
  std::optional<double> auc;
  std::vector<PerPatternRow> per_pattern;  // ordered by pattern id
  std::int64_t pld_min_support = 5;
  std::optional<std::string> positive_label;
};

// Fraction of records whose class label predict() gets right.
double prediction_accuracy(const PatternSet& zs, const Dataset& eval_data);

// eq1 = |alpha(zs|d) - alpha(zs|m)|; the raw accuracies come along because
// downstream correlation wants alpha(zs|m) itself.
PatternAccuracy pattern_accuracy(const PatternSet& zs, const Dataset& d, const Dataset& m);

// Mean absolute support change, normalized by |d|.
double psd(const PatternSet& zs, const Dataset& d, const Dataset& m);

// 0.5 * sum over labels of (f_d - f_m)^2 / (f_d + f_m); zero-denominator
// terms contribute 0. In [0, 1]; reaches 0.5 when one side is empty.
double chi2_histogram_distance(const LabelDistribution& dist_d,
                               const LabelDistribution& dist_m);
// Same, from a pattern's selections in d and m. The selection in d must be
// non-empty.
double chi2_label_distance(const Pattern& pattern, const Dataset& d, const Dataset& m);

// Mean chi2 over patterns with support_d >= min_support (and >= 1, where
// chi2 is defined). At least one pattern must survive the filter.
PldResult pld(const PatternSet& zs, const Dataset& d, const Dataset& m,
              std::int64_t min_support = 5);

// Needs a binary class; positive_label must occur in eval_data.
ConfusionCounts confusion(const PatternSet& zs, const Dataset& eval_data,
                          const std::string& positive_label);

// 0 when tp == 0 (degenerate precision/recall).
double f_measure(const ConfusionCounts& counts, double beta = 1.0);

// Mann-Whitney rank form with mean ranks on ties; needs both classes.
double rank_auc(std::span<const double> scores, std::span<const bool> is_positive);

// Scores come from predict(); records with no matching pattern score the
// default label's mining-time prior.
double auc(const PatternSet& zs, const Dataset& eval_data,
           const std::string& positive_label);

std::vector<PerPatternRow> per_pattern_report(const PatternSet& zs, const Dataset& d,
                                              const Dataset& m,
                                              std::int64_t min_support = 5);

// Full report for one (zs, d, m[, test]) evaluation. f_measure and auc are
// produced only when both test and positive_label are given.
MeasureReport evaluate_measures(const PatternSet& zs, const Dataset& d, const Dataset& m,
                                const Dataset* test = nullptr,
                                const std::string* positive_label = nullptr,
                                std::int64_t pld_min_support = 5);

std::string report_to_json(const MeasureReport& report);

}  // namespace patret
