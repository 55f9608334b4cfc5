#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wsisearch/engine.hpp"
#include "wsisearch/metrics.hpp"
#include "wsisearch/synthetic.hpp"

namespace wsisearch {

enum class Task { site, subtype, patch };

std::string_view to_string(Task task);
Task parse_task(std::string_view text);

struct ExperimentConfig {
  EngineKind engine = EngineKind::yottixel;
  Task task = Task::site;
  std::size_t k_max = 10;
  EngineParams params;
  std::size_t threads = 1;
};

struct SummaryCell {
  LabelField field = LabelField::site;
  MetricKind metric = MetricKind::majority_vote;
  std::size_t k = 0;
  std::optional<double> value;  // nullopt renders as "-"

  std::string name() const;  // e.g. "mMV@10"
};

struct Summary {
  std::string engine;
  std::string task;
  std::size_t queries = 0;
  std::vector<SummaryCell> cells;
};

struct ExperimentOutput {
  std::vector<QueryRow> rows;
  Summary summary;
  bool unsupported = false;
  std::string unsupported_reason;
  std::vector<std::pair<std::string, std::string>> unprocessed_queries;
};

/// Metric cells for a task: mMV@{1,3,5,10} and mAP@{3,5} on site, or
/// mMV@{1,3,5} and mAP@{3,5} on subtype. Patch tasks report both fields.
Summary summarize(std::span<const QueryRow> rows, Task task, std::string engine);

/// Runs every query slide against the database. A database slide sharing
/// the query's patient_id is never a candidate. Subtype tasks search only
/// database slides from the query's site. Patch tasks issue one query per
/// mosaic member of each query slide.
ExperimentOutput run_experiment(const ExperimentConfig& config, const MosaicDatabase& db,
                                std::span<const SlideRecord> queries);

void write_rows_csv(std::ostream& out, std::span<const QueryRow> rows, std::size_t k_max);
std::vector<QueryRow> read_rows_csv(std::istream& in);

void write_summary_csv(std::ostream& out, const Summary& summary);
void write_summary_text(std::ostream& out, const Summary& summary);

/// Renders an aggregate as fixed 4-decimal text, "-" when undefined.
std::string format_cell(const std::optional<double>& value);

struct BenchPoint {
  std::size_t slides = 0;
  double median_query_seconds = 0.0;
  double median_probes = 0.0;  // SISH tree probes per query; 0 otherwise
};

struct BenchReport {
  EngineKind engine = EngineKind::yottixel;
  std::vector<BenchPoint> points;
  double slope = 0.0;                // least-squares log-log slope of time vs T
  double theoretical_exponent = 0.0;
  double per_probe_slope = 0.0;      // SISH only: slope of time/probe vs T
};

/// Theoretical exponent in the database size T of each engine's query cost.
double theoretical_exponent(EngineKind engine);

double loglog_slope(std::span<const double> x, std::span<const double> y);

/// Times query_slides on synthetic databases of each requested size. Index
/// construction is excluded from the timing; each size reports the median
/// over `repetitions` batches of `queries_per_batch` queries.
BenchReport bench_query(EngineKind engine, const EngineParams& params,
                        std::span<const std::size_t> sizes, std::size_t repetitions,
                        const SyntheticSpec& base, std::size_t queries_per_batch = 5);

void write_bench_text(std::ostream& out, const BenchReport& report);

}  // namespace wsisearch
