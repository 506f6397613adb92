#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "patret/cart.hpp"
#include "patret/dataset.hpp"
#include "patret/noise.hpp"

namespace patret {

struct ExperimentConfig {
  std::vector<NoiseKind> noise_kinds;
  std::vector<double> p_grid;  // strictly increasing, must contain 0.0
  int folds = 10;
  int repeats = 10;
  std::uint64_t master_seed = 0;
  MinerParams miner;
  std::optional<std::string> positive_label;
  std::int64_t pld_min_support = 5;
  int workers = 1;
};

std::vector<double> default_p_grid();  // 0.00 .. 0.30 in steps of 0.02

// Canonical measure column order. auc and f_measure appear only when a
// positive label is configured.
std::span<const std::string_view> measure_names();

struct ResultRow {
  NoiseKind kind = NoiseKind::kUniform;
  double p = 0.0;
  int repeat = 0;
  int fold = 0;
  std::string measure;
  double value = 0.0;

  bool operator==(const ResultRow&) const = default;
};

struct ResultTable {
  std::vector<ResultRow> rows;
  bool delta_normalized = false;

  bool operator==(const ResultTable&) const = default;
};

// One row per (noise kind, p, repeat, fold, measure), sorted canonically.
// Per-cell work is independent and scheduled across config.workers threads;
// seeds are derived per cell, so any schedule gives identical rows.
ResultTable run_experiment(const Dataset& dataset, const ExperimentConfig& config);

// Subtract each group's p = 0 value; groups are (kind, repeat, fold, measure).
ResultTable delta_normalize(const ResultTable& table);

struct PearsonResult {
  double r = 0.0;
  double p_value = 1.0;
};

// Product-moment r with a two-sided p-value from the exact t distribution.
// Needs n >= 3 and two non-constant series.
PearsonResult pearson(std::span<const double> x, std::span<const double> y);

struct CorrelationCell {
  std::string measure_a;
  std::string measure_b;
  double r = 0.0;
  double p_value = 0.0;
  std::int64_t n = 0;
};

struct CorrelationMatrix {
  NoiseKind kind = NoiseKind::kUniform;
  std::vector<std::string> measures;         // correlated, canonical order
  std::vector<CorrelationCell> cells;        // unordered pairs incl. diagonal
  std::vector<std::string> skipped_constant;  // constant after normalization
};

// Correlates measure pairs for one noise kind over a delta-normalized table.
// aggregate=true first takes the mean over (repeat, fold) per p; otherwise
// every cell is a sample point.
CorrelationMatrix correlation_matrix(const ResultTable& table, NoiseKind kind,
                                     bool aggregate = true);

// columns: noise_kind,p,repeat,fold,measure,value
void write_result_csv(const ResultTable& table, std::ostream& out);
ResultTable read_result_csv(std::istream& in);

// columns: noise_kind,measure_a,measure_b,r,p_value,n
void write_correlation_csv(std::span<const CorrelationMatrix> matrices,
                           std::ostream& out);

std::string experiment_metadata_json(const ExperimentConfig& config,
                                     const Dataset& dataset);

}  // namespace patret
