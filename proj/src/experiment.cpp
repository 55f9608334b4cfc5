#include "wsisearch/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <memory>
#include <ostream>

#include "wsisearch/io.hpp"
#include "wsisearch/parallel.hpp"

namespace wsisearch {
namespace {

std::string format_score(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

struct MetricSpec {
  MetricKind metric;
  std::size_t k;
};

std::vector<MetricSpec> metric_plan(LabelField field) {
  if (field == LabelField::site) {
    return {{MetricKind::majority_vote, 1}, {MetricKind::majority_vote, 3},
            {MetricKind::majority_vote, 5}, {MetricKind::majority_vote, 10},
            {MetricKind::average_precision, 3}, {MetricKind::average_precision, 5}};
  }
  return {{MetricKind::majority_vote, 1}, {MetricKind::majority_vote, 3},
          {MetricKind::majority_vote, 5}, {MetricKind::average_precision, 3},
          {MetricKind::average_precision, 5}};
}

}  // namespace

std::string_view to_string(Task task) {
  switch (task) {
    case Task::site: return "site";
    case Task::subtype: return "subtype";
    case Task::patch: return "patch";
  }
  return "unknown";
}

Task parse_task(std::string_view text) {
  if (text == "site") return Task::site;
  if (text == "subtype") return Task::subtype;
  if (text == "patch") return Task::patch;
  throw Error(ErrorKind::parse, "task must be site, subtype or patch");
}

std::string SummaryCell::name() const {
  return std::string(metric == MetricKind::majority_vote ? "mMV@" : "mAP@") + std::to_string(k);
}

std::string format_cell(const std::optional<double>& value) {
  if (!value) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *value);
  return buf;
}

Summary summarize(std::span<const QueryRow> rows, Task task, std::string engine) {
  Summary summary;
  summary.engine = std::move(engine);
  summary.task = std::string(to_string(task));
  summary.queries = rows.size();

  std::vector<LabelField> fields;
  if (task == Task::site) fields = {LabelField::site};
  if (task == Task::subtype) fields = {LabelField::subtype};
  if (task == Task::patch) fields = {LabelField::site, LabelField::subtype};

  for (LabelField field : fields) {
    for (const auto& spec : metric_plan(field)) {
      std::vector<MetricOutcome> outcomes;
      outcomes.reserve(rows.size());
      for (const auto& row : rows) {
        MetricOutcome o;
        o.metric = spec.metric;
        o.k = spec.k;
        if (spec.metric == MetricKind::majority_vote) {
          const auto mv = mv_at_k(row, spec.k, field);
          if (mv) o.value = *mv;
        } else {
          o.value = ap_at_k(row, spec.k, field);
        }
        outcomes.push_back(o);
      }
      SummaryCell cell{field, spec.metric, spec.k, std::nullopt};
      try {
        cell.value = aggregate_mean(outcomes);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::undefined_aggregate) throw;
      }
      summary.cells.push_back(cell);
    }
  }
  return summary;
}

ExperimentOutput run_experiment(const ExperimentConfig& config, const MosaicDatabase& db,
                                std::span<const SlideRecord> queries) {
  if (db.engine != config.engine) {
    throw Error(ErrorKind::validation, "database was built for engine '" +
                                           std::string(to_string(db.engine)) + "', not '" +
                                           std::string(to_string(config.engine)) + "'");
  }
  if (config.k_max == 0) throw Error(ErrorKind::validation, "k_max must be at least 1");

  ExperimentOutput out;
  const std::string engine_name(to_string(config.engine));
  if (config.task == Task::patch && config.engine == EngineKind::hshr) {
    out.unsupported = true;
    out.unsupported_reason = "hshr: patch retrieval is not supported by the HSHR engine";
    out.summary = summarize({}, config.task, engine_name);
    return out;
  }

  // One index over the whole database, or one per site for subtype search.
  std::map<std::string, std::unique_ptr<SearchIndex>> indices;
  if (config.task == Task::subtype) {
    std::map<std::string, std::vector<IndexedSlide>> by_site;
    for (const auto& s : db.slides) by_site[s.labels.site].push_back(s);
    for (const auto& [site, slides] : by_site) {
      indices[site] = build_index(config.engine, db.params, db.dim, slides);
    }
  } else {
    indices[""] = build_index(config.engine, db.params, db.dim, db.slides);
  }

  std::vector<std::vector<QueryRow>> per_query(queries.size());
  std::vector<std::string> failures(queries.size());
  parallel_for(queries.size(), config.threads, [&](std::size_t qi) {
    const SlideRecord& query = queries[qi];
    const auto it = indices.find(config.task == Task::subtype ? query.labels.site : "");

    SlideIdSet excluded;
    for (const auto& s : db.slides) {
      if (s.labels.patient_id == query.labels.patient_id) excluded.insert(s.labels.slide_id);
    }

    Mosaic mosaic;
    try {
      mosaic = make_mosaic(config.engine, db.params, query);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::unprocessed_slide && e.kind() != ErrorKind::empty_input) throw;
      failures[qi] = e.what();
      return;
    }

    if (config.task == Task::patch) {
      for (std::size_t p = 0; p < mosaic.members.size(); ++p) {
        RetrievalResult result;
        if (it != indices.end()) result = it->second->query_patch(mosaic.members[p], config.k_max, excluded);
        per_query[qi].push_back(make_query_row(query.slide_id() + "#" + std::to_string(p),
                                               query.labels, result, config.k_max));
      }
    } else {
      RetrievalResult result;
      if (it != indices.end()) result = it->second->query_slides(mosaic, config.k_max, excluded);
      per_query[qi].push_back(
          make_query_row(query.slide_id(), query.labels, result, config.k_max));
    }
  });

  for (std::size_t qi = 0; qi < queries.size(); ++qi) {
    if (!failures[qi].empty()) out.unprocessed_queries.emplace_back(queries[qi].slide_id(), failures[qi]);
    for (auto& row : per_query[qi]) out.rows.push_back(std::move(row));
  }
  out.summary = summarize(out.rows, config.task, engine_name);
  return out;
}

void write_rows_csv(std::ostream& out, std::span<const QueryRow> rows, std::size_t k_max) {
  out << "query_id,query_site,query_subtype";
  for (std::size_t i = 1; i <= k_max; ++i) {
    out << ",ret_" << i << "_id,ret_" << i << "_site,ret_" << i << "_subtype,ret_" << i
        << "_score";
  }
  out << '\n';
  for (const auto& row : rows) {
    out << row.query_id << ',' << row.query_site << ',' << row.query_subtype;
    for (std::size_t i = 0; i < k_max; ++i) {
      if (i < row.slots.size() && row.slots[i]) {
        const auto& s = *row.slots[i];
        out << ',' << s.id << ',' << s.site << ',' << s.subtype << ',' << format_score(s.score);
      } else {
        out << ",,,,";
      }
    }
    out << '\n';
  }
}

std::vector<QueryRow> read_rows_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::parse, "query rows: missing header");
  const auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "query_id" || (header.size() - 3) % 4 != 0) {
    throw Error(ErrorKind::parse, "query rows: unexpected header");
  }
  const std::size_t k_max = (header.size() - 3) / 4;

  std::vector<QueryRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size()) {
      throw Error(ErrorKind::parse, "query rows line " + std::to_string(line_no) +
                                        ": expected " + std::to_string(header.size()) +
                                        " fields");
    }
    QueryRow row{f[0], f[1], f[2], {}};
    row.slots.resize(k_max);
    for (std::size_t i = 0; i < k_max; ++i) {
      const std::size_t base = 3 + 4 * i;
      if (f[base].empty()) continue;
      RetrievedSlot slot{f[base], f[base + 1], f[base + 2], 0.0};
      try {
        slot.score = std::stod(f[base + 3]);
      } catch (const std::exception&) {
        throw Error(ErrorKind::parse,
                    "query rows line " + std::to_string(line_no) + ": bad score");
      }
      row.slots[i] = std::move(slot);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_summary_csv(std::ostream& out, const Summary& summary) {
  out << "engine,task,field,metric,value\n";
  for (const auto& c : summary.cells) {
    out << summary.engine << ',' << summary.task << ',' << to_string(c.field) << ',' << c.name()
        << ',' << format_cell(c.value) << '\n';
  }
}

void write_summary_text(std::ostream& out, const Summary& summary) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "engine %-9s task %-8s queries %zu\n", summary.engine.c_str(),
                summary.task.c_str(), summary.queries);
  out << buf;
  for (const auto& c : summary.cells) {
    std::snprintf(buf, sizeof buf, "  %-8s %-8s %8s\n", std::string(to_string(c.field)).c_str(),
                  c.name().c_str(), format_cell(c.value).c_str());
    out << buf;
  }
}

double theoretical_exponent(EngineKind engine) {
  switch (engine) {
    case EngineKind::yottixel: return 1.0;  // O(n T m^2)
    case EngineKind::sish: return 0.0;      // O(1) search
    case EngineKind::retccl: return 1.0;    // O(K B), B grows with T
    case EngineKind::hshr: return 3.0;      // O(T^3) similarity
  }
  return 0.0;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorKind::domain, "loglog_slope: need at least two paired points");
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      throw Error(ErrorKind::domain, "loglog_slope: values must be positive");
    }
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= double(x.size());
  my /= double(y.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

BenchReport bench_query(EngineKind engine, const EngineParams& params,
                        std::span<const std::size_t> sizes, std::size_t repetitions,
                        const SyntheticSpec& base, std::size_t queries_per_batch) {
  using Clock = std::chrono::steady_clock;
  if (repetitions == 0 || queries_per_batch == 0) {
    throw Error(ErrorKind::domain, "bench_query: repetitions and batch size must be positive");
  }
  BenchReport report;
  report.engine = engine;
  report.theoretical_exponent = theoretical_exponent(engine);

  std::vector<double> xs, ys, per_probe;
  for (std::size_t t : sizes) {
    SyntheticSpec spec = base;
    spec.slides_per_subtype = std::max<std::size_t>(1, (t + spec.n_subtypes - 1) / spec.n_subtypes);
    auto slides = synth_generate(spec);
    slides.resize(std::min(t, slides.size()));

    const MosaicDatabase db = build_database(engine, params, slides);
    const auto index = build_index(engine, params, db.dim, db.slides);

    std::vector<const Mosaic*> queries;
    for (std::size_t i = 0; i < std::min(queries_per_batch, db.slides.size()); ++i) {
      queries.push_back(&db.slides[i].mosaic);
    }

    double probes = 0.0;
    if (engine == EngineKind::sish) {
      const sish::Database sdb = sish::Database::build(
          db.dim, params.sish,
          [&] {
            std::vector<SlideLabels> l;
            for (const auto& s : db.slides) l.push_back(s.labels);
            return l;
          }(),
          [&] {
            std::vector<Mosaic> m;
            for (const auto& s : db.slides) m.push_back(s.mosaic);
            return m;
          }());
      std::vector<double> counts;
      for (const Mosaic* q : queries) {
        double total = 0.0;
        for (const auto& member : q->members) {
          total += double(sdb.guided_search(sdb.make_entry(member)).probes);
        }
        counts.push_back(total);
      }
      probes = median(counts);
    }

    std::vector<double> samples;
    for (std::size_t r = 0; r < repetitions; ++r) {
      std::size_t sink = 0;
      const auto start = Clock::now();
      for (const Mosaic* q : queries) sink += index->query_slides(*q, 10).entries.size();
      const std::chrono::duration<double> elapsed = Clock::now() - start;
      samples.push_back(elapsed.count() / double(queries.size()) + 0.0 * double(sink));
    }
    BenchPoint point{db.slides.size(), median(samples), probes};
    report.points.push_back(point);
    xs.push_back(double(point.slides));
    ys.push_back(point.median_query_seconds);
    if (probes > 0.0) per_probe.push_back(point.median_query_seconds / probes);
  }
  if (xs.size() >= 2) {
    report.slope = loglog_slope(xs, ys);
    if (per_probe.size() == xs.size()) report.per_probe_slope = loglog_slope(xs, per_probe);
  }
  return report;
}

void write_bench_text(std::ostream& out, const BenchReport& report) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "engine %s\n%8s %16s %12s\n",
                std::string(to_string(report.engine)).c_str(), "T", "query_seconds", "probes");
  out << buf;
  for (const auto& p : report.points) {
    std::snprintf(buf, sizeof buf, "%8zu %16.9f %12.1f\n", p.slides, p.median_query_seconds,
                  p.median_probes);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "log-log slope %.3f (theoretical exponent %.1f)\n", report.slope,
                report.theoretical_exponent);
  out << buf;
  if (report.engine == EngineKind::sish) {
    std::snprintf(buf, sizeof buf, "per-probe slope %.3f\n", report.per_probe_slope);
    out << buf;
  }
}

}  // namespace wsisearch
