#include "patret/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <thread>
#include <tuple>
#include <utility>

#include "json.hpp"
#include "patret/errors.hpp"
#include "patret/measures.hpp"
#include "patret/rng.hpp"
#include "patret/special_functions.hpp"
#include "patret/version.hpp"

namespace patret {
namespace {

constexpr std::uint64_t kFoldSeedStream = 0x464f4c44ull;
constexpr std::uint64_t kNoiseSeedStream = 0x4e4f4953ull;

constexpr std::string_view kMeasureNames[] = {
    "pattern_accuracy",     "pattern_accuracy_raw",   "psd",
    "pld",                  "prediction_accuracy",    "prediction_accuracy_zd",
    "auc",                  "f_measure",
};

std::size_t measure_rank(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kMeasureNames); ++i) {
    if (kMeasureNames[i] == name) return i;
  }
  return std::size(kMeasureNames);
}

bool row_before(const ResultRow& a, const ResultRow& b) {
  const auto key = [](const ResultRow& r) {
    return std::tuple(static_cast<int>(r.kind), r.p, r.repeat, r.fold,
                      measure_rank(r.measure), std::string_view(r.measure));
  };
  return key(a) < key(b);
}

void validate_config(const ExperimentConfig& config) {
  if (config.noise_kinds.empty()) throw DataError("no noise kinds configured");
  std::set<NoiseKind> kinds(config.noise_kinds.begin(), config.noise_kinds.end());
  if (kinds.size() != config.noise_kinds.size()) {
    throw DataError("duplicate noise kinds configured");
  }
  if (config.p_grid.empty()) throw DataError("empty noise grid");
  for (std::size_t i = 0; i < config.p_grid.size(); ++i) {
    const double p = config.p_grid[i];
    if (!(p >= 0.0 && p <= 1.0)) throw DataError("grid probabilities must be in [0, 1]");
    if (i > 0 && !(p > config.p_grid[i - 1])) {
      throw DataError("noise grid must be strictly increasing");
    }
  }
  if (config.p_grid.front() != 0.0) {
    throw DataError("noise grid must contain 0.0 for delta normalization");
  }
  if (config.folds < 2) throw DataError("fold count must be at least 2");
  if (config.repeats < 1) throw DataError("repeat count must be at least 1");
  if (config.workers < 1) throw DataError("worker count must be at least 1");
  if (config.pld_min_support < 0) throw DataError("support floor must be non-negative");
}

std::string cell_context(NoiseKind kind, double p, int repeat, int fold) {
  return "noise=" + std::string(noise_kind_name(kind)) + " p=" + format_double(p) +
         " repeat=" + std::to_string(repeat) + " fold=" + std::to_string(fold);
}

template <typename Fn>
void with_context(const std::string& context, Fn&& fn) {
  try {
    fn();
  } catch (const InternalError& e) {
    throw InternalError(context + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(context + ": " + e.what());
  }
}

}  // namespace

std::vector<double> default_p_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 15; ++i) grid.push_back(static_cast<double>(2 * i) / 100.0);
  return grid;
}

std::span<const std::string_view> measure_names() {
  return {kMeasureNames, std::size(kMeasureNames)};
}

ResultTable run_experiment(const Dataset& dataset, const ExperimentConfig& config) {
  validate_config(config);

  std::vector<FoldPlan> plans;
  plans.reserve(static_cast<std::size_t>(config.repeats));
  for (int repeat = 0; repeat < config.repeats; ++repeat) {
    plans.push_back(stratified_folds(
        dataset, config.folds,
        CounterRng::derive_key(config.master_seed,
                               {kFoldSeedStream, static_cast<std::uint64_t>(repeat)})));
  }

  struct Task {
    int repeat;
    int fold;
  };
  std::vector<Task> tasks;
  for (int repeat = 0; repeat < config.repeats; ++repeat) {
    for (int fold = 0; fold < config.folds; ++fold) tasks.push_back({repeat, fold});
  }

  std::vector<std::vector<ResultRow>> task_rows(tasks.size());
  std::vector<std::exception_ptr> task_errors(tasks.size());

  auto run_task = [&](std::size_t ti) {
    const auto [repeat, fold] = tasks[ti];
    std::vector<ResultRow>& rows = task_rows[ti];
    const std::string fold_context =
        "repeat=" + std::to_string(repeat) + " fold=" + std::to_string(fold);

    std::optional<std::pair<Dataset, Dataset>> parts;
    std::optional<PatternSet> zd;
    double alpha_zd_t = 0.0;
    with_context(fold_context, [&] {
      parts = split(dataset, plans[static_cast<std::size_t>(repeat)], fold);
      zd = mine_patterns(parts->first, config.miner);
      alpha_zd_t = prediction_accuracy(*zd, parts->second);
    });
    const Dataset& train = parts->first;
    const Dataset& test = parts->second;

    for (NoiseKind kind : config.noise_kinds) {
      for (std::size_t p_index = 0; p_index < config.p_grid.size(); ++p_index) {
        const double p = config.p_grid[p_index];
        with_context(cell_context(kind, p, repeat, fold), [&] {
          const std::uint64_t cell_seed = CounterRng::derive_key(
              config.master_seed,
              {kNoiseSeedStream, static_cast<std::uint64_t>(kind), p_index,
               static_cast<std::uint64_t>(repeat), static_cast<std::uint64_t>(fold)});
          const PerturbResult perturbed = perturb(train, {kind, p, cell_seed});
          const Dataset& m = perturbed.data;

          const PatternAccuracy pa = pattern_accuracy(*zd, train, m);
          const double psd_value = psd(*zd, train, m);
          const PldResult pld_value = pld(*zd, train, m, config.pld_min_support);
          const PatternSet zm = mine_patterns(m, config.miner);
          const double pred = prediction_accuracy(zm, test);

          auto emit = [&](std::string_view measure, double value) {
            rows.push_back({kind, p, repeat, fold, std::string(measure), value});
          };
          emit("pattern_accuracy", pa.eq1);
          emit("pattern_accuracy_raw", pa.alpha_dm);
          emit("psd", psd_value);
          emit("pld", pld_value.pld);
          emit("prediction_accuracy", pred);
          emit("prediction_accuracy_zd", alpha_zd_t);
          if (config.positive_label) {
            emit("auc", auc(zm, test, *config.positive_label));
            emit("f_measure", f_measure(confusion(zm, test, *config.positive_label)));
          }
        });
      }
    }
  };

  const std::size_t n_workers =
      std::min<std::size_t>(static_cast<std::size_t>(config.workers), tasks.size());
  if (n_workers <= 1) {
    for (std::size_t ti = 0; ti < tasks.size(); ++ti) {
      try {
        run_task(ti);
      } catch (...) {
        task_errors[ti] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < n_workers; ++w) {
      threads.emplace_back([&] {
        while (true) {
          const std::size_t ti = next.fetch_add(1);
          if (ti >= tasks.size()) return;
          try {
            run_task(ti);
          } catch (...) {
            task_errors[ti] = std::current_exception();
          }
        }
      });
    }
    for (std::thread& t : threads) t.join();
  }
  for (const std::exception_ptr& error : task_errors) {
    if (error) std::rethrow_exception(error);
  }

  ResultTable table;
  for (std::vector<ResultRow>& rows : task_rows) {
    table.rows.insert(table.rows.end(), std::make_move_iterator(rows.begin()),
                      std::make_move_iterator(rows.end()));
  }
  std::sort(table.rows.begin(), table.rows.end(), row_before);
  return table;
}

ResultTable delta_normalize(const ResultTable& table) {
  using GroupKey = std::tuple<int, int, int, std::string>;
  std::map<GroupKey, double> baselines;
  for (const ResultRow& row : table.rows) {
    if (row.p == 0.0) {
      baselines[{static_cast<int>(row.kind), row.repeat, row.fold, row.measure}] =
          row.value;
    }
  }
  ResultTable out;
  out.delta_normalized = true;
  out.rows.reserve(table.rows.size());
  for (const ResultRow& row : table.rows) {
    auto it = baselines.find(
        {static_cast<int>(row.kind), row.repeat, row.fold, row.measure});
    if (it == baselines.end()) {
      throw DataError("missing p = 0 baseline for measure " + row.measure);
    }
    ResultRow normalized = row;
    normalized.value = row.value - it->second;
    out.rows.push_back(std::move(normalized));
  }
  return out;
}

PearsonResult pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DataError("series differ in length");
  const std::size_t n = x.size();
  if (n < 3) throw DataError("correlation needs at least 3 points");
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_x += x[i];
    mean_y += y[i];
  }
  mean_x /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mean_x;
    const double dy = y[i] - mean_y;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DataError("constant series has no correlation");
  PearsonResult out;
  out.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  if (std::abs(out.r) == 1.0) {
    out.p_value = 0.0;
    return out;
  }
  const double dof = static_cast<double>(n) - 2.0;
  const double t = out.r * std::sqrt(dof / (1.0 - out.r * out.r));
  out.p_value = student_t_two_sided_p(t, dof);
  return out;
}

CorrelationMatrix correlation_matrix(const ResultTable& table, NoiseKind kind,
                                     bool aggregate) {
  if (!table.delta_normalized) {
    throw DataError("correlation requires a delta-normalized table");
  }
  using SampleKey = std::tuple<double, int, int>;  // (p, repeat, fold)
  std::map<std::string, std::map<SampleKey, double>> samples;
  for (const ResultRow& row : table.rows) {
    if (row.kind != kind) continue;
    auto [it, inserted] =
        samples[row.measure].emplace(SampleKey{row.p, row.repeat, row.fold}, row.value);
    if (!inserted) {
      throw DataError("duplicate result row for measure " + row.measure);
    }
  }
  if (samples.empty()) {
    throw DataError("no rows for noise kind " + std::string(noise_kind_name(kind)));
  }

  // measure -> ordered sample series; all series must align on the same keys
  std::vector<std::string> names;
  for (std::string_view canonical : kMeasureNames) {
    if (samples.count(std::string(canonical)) != 0) names.emplace_back(canonical);
  }
  for (const auto& entry : samples) {
    if (measure_rank(entry.first) == std::size(kMeasureNames)) {
      names.push_back(entry.first);
    }
  }

  std::vector<std::vector<double>> series(names.size());
  const auto& reference = samples.at(names.front());
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto& cells = samples.at(names[i]);
    if (cells.size() != reference.size()) throw DataError("incomplete result table");
    auto expected = reference.begin();
    for (const auto& [key, value] : cells) {
      if (key != expected->first) throw DataError("incomplete result table");
      ++expected;
      series[i].push_back(value);
    }
  }
  if (aggregate) {
    // mean over (repeat, fold) per p
    for (std::vector<double>& s : series) {
      std::map<double, std::pair<double, std::int64_t>> by_p;
      auto it = samples.at(names.front()).begin();
      for (double value : s) {
        auto& [sum, count] = by_p[std::get<0>(it->first)];
        sum += value;
        ++count;
        ++it;
      }
      std::vector<double> means;
      means.reserve(by_p.size());
      for (const auto& [p, acc] : by_p) {
        means.push_back(acc.first / static_cast<double>(acc.second));
      }
      s = std::move(means);
    }
  }
  const std::size_t n = series.front().size();
  if (n < 3) throw DataError("correlation needs at least 3 points");

  CorrelationMatrix out;
  out.kind = kind;
  std::vector<std::vector<double>> kept;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const double first = series[i].front();
    const bool constant = std::all_of(series[i].begin(), series[i].end(),
                                      [&](double v) { return v == first; });
    if (constant) {
      out.skipped_constant.push_back(names[i]);
    } else {
      out.measures.push_back(names[i]);
      kept.push_back(std::move(series[i]));
    }
  }
  for (std::size_t i = 0; i < kept.size(); ++i) {
    for (std::size_t j = i; j < kept.size(); ++j) {
      CorrelationCell cell;
      cell.measure_a = out.measures[i];
      cell.measure_b = out.measures[j];
      cell.n = static_cast<std::int64_t>(n);
      if (i == j) {
        cell.r = 1.0;
        cell.p_value = 0.0;
      } else {
        const PearsonResult pr = pearson(kept[i], kept[j]);
        cell.r = pr.r;
        cell.p_value = pr.p_value;
      }
      out.cells.push_back(std::move(cell));
    }
  }
  return out;
}

void write_result_csv(const ResultTable& table, std::ostream& out) {
  out << "noise_kind,p,repeat,fold,measure,value\n";
  for (const ResultRow& row : table.rows) {
    out << noise_kind_name(row.kind) << ',' << format_double(row.p) << ',' << row.repeat
        << ',' << row.fold << ',' << row.measure << ',' << format_double(row.value)
        << '\n';
  }
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

int parse_index(const std::string& text, const char* what) {
  int value = 0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || value < 0) {
    throw DataError(std::string("bad ") + what + ": \"" + text + "\"");
  }
  return value;
}

}  // namespace

ResultTable read_result_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("result CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "noise_kind,p,repeat,fold,measure,value") {
    throw DataError("unexpected result CSV header: " + line);
  }
  ResultTable table;
  std::size_t row_number = 1;
  while (std::getline(in, line)) {
    ++row_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() != 6) {
      throw DataError("result CSV row " + std::to_string(row_number) +
                      " has " + std::to_string(fields.size()) + " fields, expected 6");
    }
    ResultRow row;
    row.kind = parse_noise_kind(fields[0]);
    row.p = parse_double(fields[1]);
    row.repeat = parse_index(fields[2], "repeat index");
    row.fold = parse_index(fields[3], "fold index");
    if (fields[4].empty()) {
      throw DataError("result CSV row " + std::to_string(row_number) + " has no measure");
    }
    row.measure = fields[4];
    row.value = parse_double(fields[5]);
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_correlation_csv(std::span<const CorrelationMatrix> matrices,
                           std::ostream& out) {
  out << "noise_kind,measure_a,measure_b,r,p_value,n\n";
  for (const CorrelationMatrix& matrix : matrices) {
    for (const CorrelationCell& cell : matrix.cells) {
      out << noise_kind_name(matrix.kind) << ',' << cell.measure_a << ','
          << cell.measure_b << ',' << format_double(cell.r) << ','
          << format_double(cell.p_value) << ',' << cell.n << '\n';
    }
  }
}

std::string experiment_metadata_json(const ExperimentConfig& config,
                                     const Dataset& dataset) {
  nlohmann::json doc;
  doc["version"] = std::string(kVersion);
  doc["noise_kinds"] = nlohmann::json::array();
  for (NoiseKind kind : config.noise_kinds) {
    doc["noise_kinds"].push_back(std::string(noise_kind_name(kind)));
  }
  doc["p_grid"] = config.p_grid;
  doc["folds"] = config.folds;
  doc["repeats"] = config.repeats;
  doc["master_seed"] = config.master_seed;
  doc["min_leaf_fraction"] = config.miner.min_leaf_fraction;
  doc["max_depth"] = config.miner.max_depth;
  doc["pld_min_support"] = config.pld_min_support;
  doc["positive_label"] = config.positive_label
                              ? nlohmann::json(*config.positive_label)
                              : nlohmann::json(nullptr);
  doc["workers"] = config.workers;
  doc["records"] = dataset.size();
  doc["schema_fingerprint"] = dataset.schema().fingerprint();
  nlohmann::json measures = nlohmann::json::array();
  for (std::string_view name : kMeasureNames) {
    if (!config.positive_label && (name == "auc" || name == "f_measure")) continue;
    measures.push_back(std::string(name));
  }
  doc["measures"] = std::move(measures);
  doc["stratified_folds"] = true;
  doc["variance"] = "population";
  doc["rng"] = "counter-based splitmix64";
  doc["gaussian_method"] = "inverse normal cdf";
  return doc.dump(2) + "\n";
}

}  // namespace patret
