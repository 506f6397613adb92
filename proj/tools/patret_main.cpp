#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "patret/cart.hpp"
#include "patret/dataset.hpp"
#include "patret/errors.hpp"
#include "patret/experiment.hpp"
#include "patret/measures.hpp"
#include "patret/noise.hpp"
#include "patret/pattern.hpp"
#include "patret/version.hpp"

namespace {

// Malformed command-line values; exits 1 like any other usage problem.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw patret::DataError("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw patret::DataError("cannot write " + path);
  out << content;
  if (!out) throw patret::DataError("write to " + path + " failed");
}

// Every data-reading subcommand takes --schema (sidecar) or --class
// (inference); exactly one of the two.
struct SchemaSource {
  std::string schema_path;
  std::string class_name;

  void add_options(CLI::App& cmd) {
    auto* schema = cmd.add_option("--schema", schema_path, "schema sidecar JSON");
    auto* cls =
        cmd.add_option("--class", class_name, "class attribute name (infer the rest)");
    schema->excludes(cls);
  }

  void check() const {
    if (schema_path.empty() == class_name.empty()) {
      throw UsageError("exactly one of --schema and --class is required");
    }
  }

  patret::Dataset load(const std::string& data_path) const {
    check();
    std::ifstream in(data_path, std::ios::binary);
    if (!in) throw patret::DataError("cannot open " + data_path);
    if (!schema_path.empty()) {
      auto schema =
          std::make_shared<patret::Schema>(patret::parse_schema_json(read_file(schema_path)));
      return patret::load_dataset(in, std::move(schema));
    }
    return patret::load_dataset_infer(in, class_name);
  }
};

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    if (pos == std::string::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<patret::NoiseKind> parse_noise_list(const std::string& text) {
  std::vector<patret::NoiseKind> kinds;
  for (const std::string& part : split_list(text, ',')) {
    try {
      kinds.push_back(patret::parse_noise_kind(part));
    } catch (const patret::DataError&) {
      throw UsageError("--noise takes a comma list of un,gn; got \"" + part + "\"");
    }
  }
  return kinds;
}

// Either "start:stop:step" or an explicit comma list. Range endpoints are
// resolved at 1/1000 resolution so grid values serialize cleanly.
std::vector<double> parse_p_grid(const std::string& text) {
  std::vector<double> grid;
  if (text.find(':') != std::string::npos) {
    const std::vector<std::string> parts = split_list(text, ':');
    if (parts.size() != 3) throw UsageError("--p-grid range must be start:stop:step");
    double start = 0.0;
    double stop = 0.0;
    double step = 0.0;
    try {
      start = patret::parse_double(parts[0]);
      stop = patret::parse_double(parts[1]);
      step = patret::parse_double(parts[2]);
    } catch (const patret::DataError&) {
      throw UsageError("--p-grid range must be numeric start:stop:step");
    }
    const long long lo = std::llround(start * 1000.0);
    const long long hi = std::llround(stop * 1000.0);
    const long long inc = std::llround(step * 1000.0);
    if (inc <= 0 || hi < lo) throw UsageError("--p-grid range is empty");
    for (long long v = lo; v <= hi; v += inc) {
      grid.push_back(static_cast<double>(v) / 1000.0);
    }
    return grid;
  }
  for (const std::string& part : split_list(text, ',')) {
    try {
      grid.push_back(patret::parse_double(part));
    } catch (const patret::DataError&) {
      throw UsageError("--p-grid list entry is not a number: \"" + part + "\"");
    }
  }
  return grid;
}

struct MineArgs {
  std::string data;
  SchemaSource schema;
  double min_leaf_frac = 0.02;
  int max_depth = 12;
  std::string out;
};

void run_mine(const MineArgs& args) {
  const patret::Dataset d = args.schema.load(args.data);
  const patret::MinerParams params{args.min_leaf_frac, args.max_depth};
  const patret::PatternSet zs = patret::mine_patterns(d, params);
  write_file(args.out, patret::serialize_patterns(zs));
}

struct PerturbArgs {
  std::string data;
  SchemaSource schema;
  std::string noise;
  double p = 0.0;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string out;
};

void run_perturb(const PerturbArgs& args) {
  const patret::Dataset d = args.schema.load(args.data);
  patret::NoiseSpec spec;
  try {
    spec.kind = patret::parse_noise_kind(args.noise);
  } catch (const patret::DataError&) {
    throw UsageError("--noise must be un or gn");
  }
  spec.p = args.p;
  spec.seed = args.seed;
  const patret::PerturbResult result = patret::perturb(d, spec, args.workers);
  std::ostringstream csv;
  patret::save_dataset(result.data, csv);
  write_file(args.out, csv.str());
  std::cerr << result.cells_changed << " / " << result.cells_total << "\n";
}

struct EvaluateArgs {
  std::string original;
  std::string modified;
  std::string patterns;
  std::string test;
  SchemaSource schema;
  std::string positive_label;
  std::int64_t pld_min_support = 5;
  std::string out;
};

void run_evaluate(const EvaluateArgs& args) {
  const patret::Dataset d = args.schema.load(args.original);
  const patret::Dataset m = args.schema.load(args.modified);
  const patret::PatternSet zs = patret::parse_patterns(read_file(args.patterns));
  std::optional<patret::Dataset> test;
  if (!args.test.empty()) test = args.schema.load(args.test);
  const std::string* positive =
      args.positive_label.empty() ? nullptr : &args.positive_label;
  const patret::MeasureReport report =
      patret::evaluate_measures(zs, d, m, test ? &*test : nullptr, positive,
                                args.pld_min_support);
  write_file(args.out, patret::report_to_json(report));
}

struct ExperimentArgs {
  std::string data;
  SchemaSource schema;
  std::string noise = "un,gn";
  std::string p_grid;
  int folds = 10;
  int repeats = 10;
  std::uint64_t seed = 0;
  int workers = 1;
  double min_leaf_frac = 0.02;
  int max_depth = 12;
  std::string positive_label;
  std::int64_t pld_min_support = 5;
  std::string out;
};

void run_experiment_cmd(const ExperimentArgs& args) {
  const patret::Dataset d = args.schema.load(args.data);
  patret::ExperimentConfig config;
  config.noise_kinds = parse_noise_list(args.noise);
  config.p_grid = args.p_grid.empty() ? patret::default_p_grid() : parse_p_grid(args.p_grid);
  config.folds = args.folds;
  config.repeats = args.repeats;
  config.master_seed = args.seed;
  config.workers = args.workers;
  config.miner = {args.min_leaf_frac, args.max_depth};
  if (!args.positive_label.empty()) config.positive_label = args.positive_label;
  config.pld_min_support = args.pld_min_support;

  const patret::ResultTable table = patret::run_experiment(d, config);
  std::ostringstream csv;
  patret::write_result_csv(table, csv);
  write_file(args.out, csv.str());
  write_file(args.out + ".meta.json", patret::experiment_metadata_json(config, d));
}

struct CorrelateArgs {
  std::string results;
  bool per_cell = false;
  std::string out;
};

void run_correlate(const CorrelateArgs& args) {
  std::ifstream in(args.results, std::ios::binary);
  if (!in) throw patret::DataError("cannot open " + args.results);
  const patret::ResultTable raw = patret::read_result_csv(in);
  const patret::ResultTable normalized = patret::delta_normalize(raw);

  std::vector<patret::CorrelationMatrix> matrices;
  for (patret::NoiseKind kind :
       {patret::NoiseKind::kUniform, patret::NoiseKind::kGaussian}) {
    const bool present =
        std::any_of(normalized.rows.begin(), normalized.rows.end(),
                    [&](const patret::ResultRow& row) { return row.kind == kind; });
    if (!present) continue;
    matrices.push_back(patret::correlation_matrix(normalized, kind, !args.per_cell));
    const patret::CorrelationMatrix& matrix = matrices.back();
    for (const std::string& name : matrix.skipped_constant) {
      std::cerr << "skipped constant measure for " << patret::noise_kind_name(kind)
                << ": " << name << "\n";
    }
  }
  if (matrices.empty()) throw patret::DataError("result table has no rows");
  std::ostringstream csv;
  patret::write_correlation_csv(matrices, csv);
  write_file(args.out, csv.str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pattern retention measures for anonymized tabular data"};
  app.set_version_flag("--version", std::string(patret::kVersion));
  app.require_subcommand(1);

  MineArgs mine;
  CLI::App* mine_cmd = app.add_subcommand("mine", "mine a decision-tree pattern set");
  mine_cmd->add_option("--data", mine.data, "input CSV")->required();
  mine.schema.add_options(*mine_cmd);
  mine_cmd->add_option("--min-leaf-frac", mine.min_leaf_frac, "minimum leaf fraction")
      ->check(CLI::Range(1e-9, 0.5))
      ->capture_default_str();
  mine_cmd->add_option("--max-depth", mine.max_depth, "maximum tree depth")
      ->check(CLI::Range(1, 64))
      ->capture_default_str();
  mine_cmd->add_option("--out", mine.out, "output pattern JSON")->required();
  mine_cmd->callback([&] { run_mine(mine); });

  PerturbArgs perturb;
  CLI::App* perturb_cmd = app.add_subcommand("perturb", "apply noise to a dataset");
  perturb_cmd->add_option("--data", perturb.data, "input CSV")->required();
  perturb.schema.add_options(*perturb_cmd);
  perturb_cmd->add_option("--noise", perturb.noise, "noise kind: un or gn")->required();
  perturb_cmd->add_option("--p", perturb.p, "per-cell change probability")
      ->check(CLI::Range(0.0, 1.0))
      ->required();
  perturb_cmd->add_option("--seed", perturb.seed, "RNG seed")->capture_default_str();
  perturb_cmd->add_option("--workers", perturb.workers, "worker threads")
      ->check(CLI::Range(1, 256))
      ->capture_default_str();
  perturb_cmd->add_option("--out", perturb.out, "output CSV")->required();
  perturb_cmd->callback([&] { run_perturb(perturb); });

  EvaluateArgs evaluate;
  CLI::App* evaluate_cmd =
      app.add_subcommand("evaluate", "measure pattern retention of a modified dataset");
  evaluate_cmd->add_option("--original", evaluate.original, "original CSV")->required();
  evaluate_cmd->add_option("--modified", evaluate.modified, "modified CSV")->required();
  evaluate_cmd->add_option("--patterns", evaluate.patterns, "pattern JSON")->required();
  evaluate_cmd->add_option("--test", evaluate.test, "held-out test CSV");
  evaluate.schema.add_options(*evaluate_cmd);
  evaluate_cmd->add_option("--positive-label", evaluate.positive_label,
                           "positive class for F-measure and AUC");
  evaluate_cmd
      ->add_option("--pld-min-support", evaluate.pld_min_support,
                   "support floor for the label-distance mean")
      ->check(CLI::Range(std::int64_t{0}, std::int64_t{1} << 40))
      ->capture_default_str();
  evaluate_cmd->add_option("--out", evaluate.out, "output report JSON")->required();
  evaluate_cmd->callback([&] { run_evaluate(evaluate); });

  ExperimentArgs experiment;
  CLI::App* experiment_cmd =
      app.add_subcommand("experiment", "run the noise sweep cross-validation protocol");
  experiment_cmd->add_option("--data", experiment.data, "input CSV")->required();
  experiment.schema.add_options(*experiment_cmd);
  experiment_cmd->add_option("--noise", experiment.noise, "comma list of un,gn")
      ->capture_default_str();
  experiment_cmd->add_option("--p-grid", experiment.p_grid,
                             "start:stop:step or comma list (default 0:0.30:0.02)");
  experiment_cmd->add_option("--folds", experiment.folds, "cross-validation folds")
      ->check(CLI::Range(2, 1000))
      ->capture_default_str();
  experiment_cmd->add_option("--repeats", experiment.repeats, "cross-validation repeats")
      ->check(CLI::Range(1, 1000))
      ->capture_default_str();
  experiment_cmd->add_option("--seed", experiment.seed, "master seed")
      ->capture_default_str();
  experiment_cmd->add_option("--workers", experiment.workers, "worker threads")
      ->check(CLI::Range(1, 256))
      ->capture_default_str();
  experiment_cmd
      ->add_option("--min-leaf-frac", experiment.min_leaf_frac, "minimum leaf fraction")
      ->check(CLI::Range(1e-9, 0.5))
      ->capture_default_str();
  experiment_cmd->add_option("--max-depth", experiment.max_depth, "maximum tree depth")
      ->check(CLI::Range(1, 64))
      ->capture_default_str();
  experiment_cmd->add_option("--positive-label", experiment.positive_label,
                             "positive class for F-measure and AUC");
  experiment_cmd
      ->add_option("--pld-min-support", experiment.pld_min_support,
                   "support floor for the label-distance mean")
      ->check(CLI::Range(std::int64_t{0}, std::int64_t{1} << 40))
      ->capture_default_str();
  experiment_cmd->add_option("--out", experiment.out, "output results CSV")->required();
  experiment_cmd->callback([&] { run_experiment_cmd(experiment); });

  CorrelateArgs correlate;
  CLI::App* correlate_cmd =
      app.add_subcommand("correlate", "correlate measures from a results CSV");
  correlate_cmd->add_option("--results", correlate.results, "results CSV")->required();
  correlate_cmd->add_flag("--per-cell", correlate.per_cell,
                          "correlate per evaluation cell instead of per-p means");
  correlate_cmd->add_option("--out", correlate.out, "output correlation CSV")->required();
  correlate_cmd->callback([&] { run_correlate(correlate); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const patret::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const patret::InternalError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
