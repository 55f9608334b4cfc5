// Command-line front end: synth, build-db, query, eval, bench, stats-mwu.
// Exit codes: 0 success, 2 validation or input error, 3 unsupported operation.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "wsisearch/engine.hpp"
#include "wsisearch/experiment.hpp"
#include "wsisearch/io.hpp"
#include "wsisearch/mann_whitney.hpp"
#include "wsisearch/synthetic.hpp"

using namespace wsisearch;

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitUnsupported = 3;

struct Overrides {
  std::optional<double> sim_threshold;
  std::optional<int> hamming_threshold;
  std::optional<std::size_t> knn_k;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<std::size_t> probe_budget;

  void add_to(CLI::App* app) {
    app->add_option("--sim-threshold", sim_threshold, "RetCCL cosine threshold");
    app->add_option("--hamming-threshold", hamming_threshold, "SISH Hamming threshold");
    app->add_option("--knn-k", knn_k, "HSHR hyperedge size K");
    app->add_option("--alpha", alpha, "HSHR vertex similarity weight");
    app->add_option("--beta", beta, "HSHR hyperedge similarity weight");
    app->add_option("--probe-budget", probe_budget, "SISH guided-search probe budget");
  }

  void apply(EngineParams& p) const {
    if (sim_threshold) p.retccl.sim_threshold = *sim_threshold;
    if (hamming_threshold) p.sish.hamming_threshold = *hamming_threshold;
    if (knn_k) p.hshr.knn_k = *knn_k;
    if (alpha) p.hshr.alpha = *alpha;
    if (beta) p.hshr.beta = *beta;
    if (probe_budget) p.sish.probe_budget = *probe_budget;
  }
};

std::vector<double> parse_numbers(const std::string& text) {
  std::vector<double> out;
  std::string field;
  std::istringstream in(text);
  while (std::getline(in, field, ',')) {
    if (field.empty()) continue;
    try {
      out.push_back(std::stod(field));
    } catch (const std::exception&) {
      throw Error(ErrorKind::parse, "not a number: '" + field + "'");
    }
  }
  return out;
}

// A sample is either a comma-separated list or "@file" with one value per line.
std::vector<double> read_sample(const std::string& spec) {
  if (spec.empty() || spec[0] != '@') return parse_numbers(spec);
  std::ifstream in(spec.substr(1));
  if (!in) throw Error(ErrorKind::parse, "cannot open sample file '" + spec.substr(1) + "'");
  std::string line, joined;
  while (std::getline(in, line)) joined += line + ",";
  return parse_numbers(joined);
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::format, "cannot write '" + path + "'");
  return out;
}

std::size_t default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string trim(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  return text.substr(first, text.find_last_not_of(" \t\r") - first + 1);
}

// Fills options of `sub` not given on the command line from a key=value file.
// Blank lines and lines starting with '#' are ignored.
void apply_config_file(CLI::App* sub, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::parse, "cannot open config file '" + path + "'");
  std::string line;
  for (int line_no = 1; std::getline(in, line); ++line_no) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    const std::string where = path + ":" + std::to_string(line_no) + ": ";
    if (eq == std::string::npos) throw Error(ErrorKind::parse, where + "expected key=value");
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.rfind("--", 0) == 0) key = key.substr(2);
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config") {
      throw Error(ErrorKind::validation,
                  where + "'" + key + "' is not an option of " + sub->get_name());
    }
    if (opt->count() > 0) continue;
    opt->add_result(value);
    try {
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw Error(ErrorKind::validation, where + e.what());
    }
  }
}

void require(CLI::App* sub, std::initializer_list<const char*> names) {
  for (const char* name : names) {
    if (sub->get_option(name)->count() == 0) {
      throw Error(ErrorKind::validation,
                  sub->get_name() + ": " + name + " is required (flag or config file)");
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Whole-slide image search engines: Yottixel, SISH, RetCCL, HSHR"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Write a synthetic labelled slide collection");
  SyntheticSpec spec;
  std::string synth_out;
  synth->add_option("--out", synth_out, "Output directory");
  synth->add_option("--sites", spec.n_sites, "Number of sites");
  synth->add_option("--subtypes", spec.n_subtypes, "Total number of subtypes");
  synth->add_option("--slides-per-subtype", spec.slides_per_subtype);
  synth->add_option("--patches", spec.patches_per_slide, "Patches per slide");
  synth->add_option("--dim", spec.dim, "Feature dimension");
  synth->add_option("--separation", spec.separation, "Scale of class mean vectors");
  synth->add_option("--sigma", spec.sigma, "Per-component patch noise");
  synth->add_option("--seed", spec.seed);

  // build-db
  auto* build = app.add_subcommand("build-db", "Build an engine database from a manifest");
  std::string engine_name = "yottixel", manifest_path, db_path;
  std::uint64_t seed = 0;
  std::size_t threads = default_threads();
  Overrides build_overrides;
  build->add_option("--engine", engine_name, "yottixel | sish | retccl | hshr");
  build->add_option("--manifest", manifest_path, "Slide manifest CSV");
  build->add_option("--db", db_path, "Output database file");
  build->add_option("--seed", seed, "Clustering seed");
  build->add_option("--threads", threads);
  build_overrides.add_to(build);

  // query
  auto* query = app.add_subcommand("query", "Run a retrieval experiment against a database");
  std::string task_name = "site", rows_out, summary_out;
  std::size_t k = 10;
  Overrides query_overrides;
  query->add_option("--db", db_path, "Database file");
  query->add_option("--manifest", manifest_path, "Query slide manifest");
  query->add_option("--task", task_name, "site | subtype | patch");
  query->add_option("--k", k, "Slots per query row");
  query->add_option("--engine", engine_name, "Must match the database engine");
  query->add_option("--out", rows_out, "Query rows CSV (default: stdout)");
  query->add_option("--summary", summary_out, "Summary CSV");
  query->add_option("--threads", threads);
  query_overrides.add_to(query);

  // eval
  auto* eval = app.add_subcommand("eval", "Summarize a query rows CSV");
  std::string rows_in;
  eval->add_option("--rows", rows_in, "Query rows CSV");
  eval->add_option("--task", task_name, "site | subtype | patch");
  eval->add_option("--engine", engine_name, "Engine name for the report");
  eval->add_option("--summary", summary_out, "Summary CSV");

  // bench
  auto* bench = app.add_subcommand("bench", "Time queries against synthetic databases");
  std::string sizes_text = "50,100,200,400";
  std::size_t repetitions = 5, batch = 5;
  SyntheticSpec bench_spec;
  bench_spec.n_subtypes = 10;
  bench_spec.dim = 128;
  Overrides bench_overrides;
  bench->add_option("--engine", engine_name);
  bench->add_option("--sizes", sizes_text, "Comma-separated database sizes");
  bench->add_option("--repetitions", repetitions);
  bench->add_option("--queries", batch, "Queries per timed batch");
  bench->add_option("--dim", bench_spec.dim);
  bench->add_option("--patches", bench_spec.patches_per_slide);
  bench->add_option("--seed", bench_spec.seed);
  bench_overrides.add_to(bench);

  // stats-mwu
  auto* mwu = app.add_subcommand("stats-mwu", "Two-sided Mann-Whitney U test");
  std::string sample_a, sample_b;
  mwu->add_option("--a", sample_a, "Sample a: 1,2,3 or @file");
  mwu->add_option("--b", sample_b, "Sample b: 1,2,3 or @file");

  std::string config_path;
  app.add_option("--config", config_path, "key=value file; command-line flags take precedence");
  for (auto* sub : {synth, build, query, eval, bench, mwu}) {
    sub->add_option("--config", config_path, "key=value file; command-line flags take precedence");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    CLI::App* chosen = app.get_subcommands().front();
    if (!config_path.empty()) apply_config_file(chosen, config_path);
    if (*synth) require(synth, {"--out"});
    if (*build) require(build, {"--manifest", "--db"});
    if (*query) require(query, {"--db", "--manifest"});
    if (*eval) require(eval, {"--rows"});
    if (*mwu) require(mwu, {"--a", "--b"});

    if (*synth) {
      const auto manifest = synth_write(spec, synth_out);
      std::cout << "wrote " << manifest.rows.size() << " slides to " << synth_out << "\n";
      return 0;
    }

    if (*build) {
      const EngineKind engine = parse_engine(engine_name);
      EngineParams params;
      params.seed = seed;
      build_overrides.apply(params);
      const auto manifest = parse_manifest(manifest_path);
      for (const auto& w : manifest.warnings) std::cerr << "warning: " << w << "\n";
      const auto slides = load_slides(manifest);
      const auto db = build_database(engine, params, slides, threads);
      for (const auto& [id, why] : db.unprocessed) {
        std::cerr << "unprocessed slide " << id << ": " << why << "\n";
      }
      save_database(db, db_path);
      std::cout << "indexed " << db.slides.size() << " slides (" << db.unprocessed.size()
                << " unprocessed) with " << to_string(engine) << "\n";
      return 0;
    }

    if (*query) {
      MosaicDatabase db = load_database(db_path);
      ExperimentConfig config;
      config.engine = query->count("--engine") ? parse_engine(engine_name) : db.engine;
      config.task = parse_task(task_name);
      config.k_max = k;
      config.threads = threads;
      query_overrides.apply(db.params);
      config.params = db.params;

      const auto manifest = parse_manifest(manifest_path);
      for (const auto& w : manifest.warnings) std::cerr << "warning: " << w << "\n";
      std::uint32_t dim = 0;
      const auto slides = load_slides(manifest, &dim);
      if (dim != db.dim) {
        throw Error(ErrorKind::dimension, "query features have dimension " + std::to_string(dim) +
                                              ", database has " + std::to_string(db.dim));
      }
      const auto out = run_experiment(config, db, slides);
      for (const auto& [id, why] : out.unprocessed_queries) {
        std::cerr << "unprocessed query " << id << ": " << why << "\n";
      }
      if (rows_out.empty()) {
        write_rows_csv(std::cout, out.rows, k);
      } else {
        auto f = open_output(rows_out);
        write_rows_csv(f, out.rows, k);
      }
      if (!summary_out.empty()) {
        auto f = open_output(summary_out);
        write_summary_csv(f, out.summary);
      }
      write_summary_text(rows_out.empty() ? std::cerr : std::cout, out.summary);
      if (out.unsupported) {
        std::cerr << "unsupported: " << out.unsupported_reason << "\n";
        return kExitUnsupported;
      }
      return 0;
    }

    if (*eval) {
      std::ifstream in(rows_in);
      if (!in) throw Error(ErrorKind::parse, "cannot open '" + rows_in + "'");
      const auto rows = read_rows_csv(in);
      const auto summary = summarize(rows, parse_task(task_name), engine_name);
      if (!summary_out.empty()) {
        auto f = open_output(summary_out);
        write_summary_csv(f, summary);
      }
      write_summary_text(std::cout, summary);
      return 0;
    }

    if (*bench) {
      const EngineKind engine = parse_engine(engine_name);
      EngineParams params;
      params.seed = bench_spec.seed;
      bench_overrides.apply(params);
      std::vector<std::size_t> sizes;
      for (double v : parse_numbers(sizes_text)) {
        if (!(v >= 1.0) || v != std::floor(v)) {
          throw Error(ErrorKind::validation, "sizes must be positive integers");
        }
        sizes.push_back(static_cast<std::size_t>(v));
      }
      const auto report = bench_query(engine, params, sizes, repetitions, bench_spec, batch);
      write_bench_text(std::cout, report);
      return 0;
    }

    if (*mwu) {
      const auto a = read_sample(sample_a);
      const auto b = read_sample(sample_b);
      const auto r = mann_whitney_u(a, b);
      std::printf("U %.6g\np %s\nmethod %s\n", r.u,
                  std::isnan(r.p_two_sided) ? "nan" : std::to_string(r.p_two_sided).c_str(),
                  r.exact ? "exact" : "normal");
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return e.kind() == ErrorKind::unsupported_operation ? kExitUnsupported : kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return 0;
}
