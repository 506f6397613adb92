#include "patret/noise.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <utility>
#include <vector>

#include "patret/errors.hpp"

namespace patret {
namespace {

constexpr std::uint64_t kCellStream = 0x63656c6cull;

}  // namespace

std::string_view noise_kind_name(NoiseKind kind) {
  return kind == NoiseKind::kUniform ? "un" : "gn";
}

NoiseKind parse_noise_kind(std::string_view name) {
  if (name == "un") return NoiseKind::kUniform;
  if (name == "gn") return NoiseKind::kGaussian;
  throw DataError("unknown noise kind: " + std::string(name));
}

Cell perturb_value(const Cell& value, const AttributeStats& stats, NoiseKind kind,
                   CounterRng& rng) {
  if (const double* v = std::get_if<double>(&value)) {
    const NumericStats* s = std::get_if<NumericStats>(&stats);
    if (s == nullptr) throw InternalError("numeric cell with categorical stats");
    if (kind == NoiseKind::kUniform) {
      const double draw = s->min + rng.next_unit() * (s->max - s->min);
      return std::clamp(draw, s->min, s->max);
    }
    if (s->variance == 0.0) return *v;  // degenerate Gaussian
    return *v + std::sqrt(s->variance) * rng.next_gaussian();
  }
  const CategoricalStats* s = std::get_if<CategoricalStats>(&stats);
  if (s == nullptr) throw InternalError("categorical cell with numeric stats");
  if (kind == NoiseKind::kUniform) {
    return s->unique[rng.next_below(s->unique.size())];
  }
  return s->values[rng.next_below(s->values.size())];
}

PerturbResult perturb(const Dataset& dataset, const NoiseSpec& spec, int workers) {
  if (!(spec.p >= 0.0 && spec.p <= 1.0)) {
    throw DataError("change probability must be in [0, 1]");
  }
  if (workers < 1) throw DataError("worker count must be at least 1");

  const Schema& schema = dataset.schema();
  std::vector<std::size_t> cols;
  std::vector<AttributeStats> stats;
  for (std::size_t col = 0; col < schema.size(); ++col) {
    if (col == schema.class_index()) continue;
    cols.push_back(col);
    stats.push_back(attribute_stats(dataset, schema.attribute(col).name));
  }

  std::vector<Record> records(dataset.records().begin(), dataset.records().end());
  const std::size_t rows = records.size();

  auto work = [&](std::size_t begin, std::size_t end, std::uint64_t& changed) {
    for (std::size_t row = begin; row < end; ++row) {
      for (std::size_t i = 0; i < cols.size(); ++i) {
        const std::size_t col = cols[i];
        CounterRng rng(CounterRng::derive_key(spec.seed, {kCellStream, row, col}));
        if (rng.next_unit() >= spec.p) continue;
        ++changed;
        records[row].values[col] =
            perturb_value(dataset.record(row).values[col], stats[i], spec.kind, rng);
      }
    }
  };

  std::uint64_t changed = 0;
  const auto n_workers = std::min<std::size_t>(static_cast<std::size_t>(workers), rows);
  if (n_workers <= 1) {
    work(0, rows, changed);
  } else {
    std::vector<std::uint64_t> counts(n_workers, 0);
    std::vector<std::thread> threads;
    const std::size_t chunk = (rows + n_workers - 1) / n_workers;
    for (std::size_t w = 0; w < n_workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(rows, begin + chunk);
      threads.emplace_back([&, begin, end, w] { work(begin, end, counts[w]); });
    }
    for (std::thread& t : threads) t.join();
    for (std::uint64_t c : counts) changed += c;
  }

  PerturbResult out{Dataset(dataset.schema_ptr(), std::move(records)),
                    static_cast<std::uint64_t>(rows) * cols.size(), changed};
  return out;
}

}  // namespace patret
