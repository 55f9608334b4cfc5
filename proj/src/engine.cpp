#include "wsisearch/engine.hpp"

#include <fstream>
#include <optional>

#include "json.hpp"

#include "wsisearch/parallel.hpp"

namespace wsisearch {
namespace {

using nlohmann::json;

constexpr int kDatabaseFormatVersion = 1;

class YottixelIndex final : public SearchIndex {
 public:
  YottixelIndex(std::size_t dim, std::span<const IndexedSlide> slides) : db_(dim) {
    for (const auto& s : slides) db_.add(s.labels, yottixel::index_mosaic(s.mosaic));
  }
  EngineKind kind() const override { return EngineKind::yottixel; }
  std::size_t slide_count() const override { return db_.size(); }
  RetrievalResult query_slides(const Mosaic& query, std::size_t k,
                               const SlideIdSet& excluded) const override {
    return db_.query_slides(yottixel::index_mosaic(query), k, excluded);
  }
  RetrievalResult query_patch(const PatchFeature& query, std::size_t k,
                              const SlideIdSet& excluded) const override {
    return db_.query_patches(binarize_barcode(query.feature), k, excluded);
  }

 private:
  yottixel::Database db_;
};

std::vector<SlideLabels> labels_of(std::span<const IndexedSlide> slides) {
  std::vector<SlideLabels> out;
  out.reserve(slides.size());
  for (const auto& s : slides) out.push_back(s.labels);
  return out;
}

std::vector<Mosaic> mosaics_of(std::span<const IndexedSlide> slides) {
  std::vector<Mosaic> out;
  out.reserve(slides.size());
  for (const auto& s : slides) out.push_back(s.mosaic);
  return out;
}

class SishIndex final : public SearchIndex {
 public:
  SishIndex(std::size_t dim, const sish::Config& config, std::span<const IndexedSlide> slides)
      : db_(sish::Database::build(dim, config, labels_of(slides), mosaics_of(slides))) {}
  EngineKind kind() const override { return EngineKind::sish; }
  std::size_t slide_count() const override { return db_.slide_count(); }
  RetrievalResult query_slides(const Mosaic& query, std::size_t k,
                               const SlideIdSet& excluded) const override {
    return db_.query_slides(query, k, excluded);
  }
  RetrievalResult query_patch(const PatchFeature& query, std::size_t k,
                              const SlideIdSet& excluded) const override {
    return db_.query_patches(query, k, excluded);
  }

 private:
  sish::Database db_;
};

class RetcclIndex final : public SearchIndex {
 public:
  RetcclIndex(std::size_t dim, const retccl::Config& config,
              std::span<const IndexedSlide> slides)
      : db_(dim, config) {
    for (const auto& s : slides) db_.add(s.labels, s.mosaic);
  }
  EngineKind kind() const override { return EngineKind::retccl; }
  std::size_t slide_count() const override { return db_.labels().size(); }
  RetrievalResult query_slides(const Mosaic& query, std::size_t k,
                               const SlideIdSet& excluded) const override {
    return db_.query_slides(query, k, excluded);
  }
  RetrievalResult query_patch(const PatchFeature& query, std::size_t k,
                              const SlideIdSet& excluded) const override {
    return db_.query_patches(query, k, excluded);
  }

 private:
  retccl::Database db_;
};

class HshrIndex final : public SearchIndex {
 public:
  HshrIndex(const hshr::Config& config, std::span<const IndexedSlide> slides) : config_(config) {
    std::vector<hshr::SlideSignature> signatures;
    for (const auto& s : slides) {
      auto sig = hshr::slide_signature(s.mosaic);
      sig.slide_id = s.labels.slide_id;
      signatures.push_back(std::move(sig));
    }
    graph_ = hshr::build_hypergraph(std::move(signatures), labels_of(slides), config.knn_k);
  }
  EngineKind kind() const override { return EngineKind::hshr; }
  std::size_t slide_count() const override { return graph_.size(); }
  RetrievalResult query_slides(const Mosaic& query, std::size_t k,
                               const SlideIdSet& excluded) const override {
    return graph_.query_similarity(hshr::slide_signature(query), k, config_.alpha, config_.beta,
                                   excluded);
  }
  RetrievalResult query_patch(const PatchFeature&, std::size_t, const SlideIdSet&) const override {
    hshr::query_patches();
  }

 private:
  hshr::Config config_;
  hshr::Hypergraph graph_;
};

json mosaic_to_json(const Mosaic& m) {
  json members = json::array();
  for (const auto& p : m.members) members.push_back({{"x", p.x}, {"y", p.y}, {"f", p.feature}});
  return {{"method", m.method == MosaicMethod::fixed_centroids ? "fixed_centroids"
                                                                : "percent_of_clusters"},
          {"k_primary", m.k_primary},
          {"selection_fraction", m.selection_fraction},
          {"k_fixed", m.k_fixed},
          {"populations", m.populations},
          {"members", std::move(members)}};
}

Mosaic mosaic_from_json(const json& j, const std::string& slide_id) {
  Mosaic m;
  m.slide_id = slide_id;
  m.method = j.at("method").get<std::string>() == "fixed_centroids"
                 ? MosaicMethod::fixed_centroids
                 : MosaicMethod::percent_of_clusters;
  m.k_primary = j.at("k_primary").get<std::size_t>();
  m.selection_fraction = j.at("selection_fraction").get<double>();
  m.k_fixed = j.at("k_fixed").get<std::size_t>();
  m.populations = j.at("populations").get<std::vector<std::size_t>>();
  for (const auto& p : j.at("members")) {
    PatchFeature f;
    f.x = p.at("x").get<std::int32_t>();
    f.y = p.at("y").get<std::int32_t>();
    f.feature = p.at("f").get<std::vector<float>>();
    m.members.push_back(std::move(f));
  }
  return m;
}

json params_to_json(const EngineParams& p) {
  json quality = p.retccl.quality_threshold ? json(*p.retccl.quality_threshold) : json(nullptr);
  return {{"seed", p.seed},
          {"yottixel", {{"k_primary", p.yottixel.k_primary},
                        {"selection_fraction", p.yottixel.selection_fraction}}},
          {"sish", {{"k_primary", p.sish.k_primary},
                    {"selection_fraction", p.sish.selection_fraction},
                    {"universe_bits", p.sish.universe_bits},
                    {"hamming_threshold", p.sish.hamming_threshold},
                    {"probe_budget", p.sish.probe_budget},
                    {"seed_offset", p.sish.seed_offset},
                    {"drop_constant_patches", p.sish.drop_constant_patches}}},
          {"retccl", {{"k_primary", p.retccl.k_primary},
                      {"selection_fraction", p.retccl.selection_fraction},
                      {"sim_threshold", p.retccl.sim_threshold},
                      {"quality_threshold", quality}}},
          {"hshr", {{"k_fixed", p.hshr.k_fixed},
                    {"knn_k", p.hshr.knn_k},
                    {"alpha", p.hshr.alpha},
                    {"beta", p.hshr.beta}}}};
}

EngineParams params_from_json(const json& j) {
  EngineParams p;
  p.seed = j.at("seed").get<std::uint64_t>();
  const auto& y = j.at("yottixel");
  p.yottixel.k_primary = y.at("k_primary");
  p.yottixel.selection_fraction = y.at("selection_fraction");
  const auto& s = j.at("sish");
  p.sish.k_primary = s.at("k_primary");
  p.sish.selection_fraction = s.at("selection_fraction");
  p.sish.universe_bits = s.at("universe_bits");
  p.sish.hamming_threshold = s.at("hamming_threshold");
  p.sish.probe_budget = s.at("probe_budget");
  p.sish.seed_offset = s.at("seed_offset");
  p.sish.drop_constant_patches = s.at("drop_constant_patches");
  const auto& r = j.at("retccl");
  p.retccl.k_primary = r.at("k_primary");
  p.retccl.selection_fraction = r.at("selection_fraction");
  p.retccl.sim_threshold = r.at("sim_threshold");
  if (!r.at("quality_threshold").is_null()) {
    p.retccl.quality_threshold = r.at("quality_threshold").get<double>();
  }
  const auto& h = j.at("hshr");
  p.hshr.k_fixed = h.at("k_fixed");
  p.hshr.knn_k = h.at("knn_k");
  p.hshr.alpha = h.at("alpha");
  p.hshr.beta = h.at("beta");
  return p;
}

}  // namespace

std::string_view to_string(EngineKind kind) {
  switch (kind) {
    case EngineKind::yottixel: return "yottixel";
    case EngineKind::sish: return "sish";
    case EngineKind::retccl: return "retccl";
    case EngineKind::hshr: return "hshr";
  }
  return "unknown";
}

EngineKind parse_engine(std::string_view text) {
  if (text == "yottixel") return EngineKind::yottixel;
  if (text == "sish") return EngineKind::sish;
  if (text == "retccl") return EngineKind::retccl;
  if (text == "hshr") return EngineKind::hshr;
  throw Error(ErrorKind::parse, "unknown engine '" + std::string(text) + "'");
}

std::uint64_t slide_seed(std::uint64_t base, std::string_view slide_id) {
  // FNV-1a over the id, mixed with the base seed.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : slide_id) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h ^ (base * 0x9e3779b97f4a7c15ULL);
}

Mosaic make_mosaic(EngineKind engine, const EngineParams& params, const SlideRecord& slide) {
  const std::uint64_t seed = slide_seed(params.seed, slide.slide_id());
  switch (engine) {
    case EngineKind::yottixel:
      return build_mosaic_percent(slide, params.yottixel.k_primary,
                                  params.yottixel.selection_fraction, seed);
    case EngineKind::sish: {
      if (!params.sish.drop_constant_patches) {
        return build_mosaic_percent(slide, params.sish.k_primary, params.sish.selection_fraction,
                                    seed);
      }
      const SlideRecord filtered = drop_constant_patches(slide);
      if (filtered.patches.empty()) {
        throw Error(ErrorKind::unprocessed_slide,
                    "sish: every patch of '" + slide.slide_id() + "' is blank");
      }
      return build_mosaic_percent(filtered, params.sish.k_primary,
                                  params.sish.selection_fraction, seed);
    }
    case EngineKind::retccl:
      return build_mosaic_percent(slide, params.retccl.k_primary,
                                  params.retccl.selection_fraction, seed);
    case EngineKind::hshr:
      return build_mosaic_fixed(slide, params.hshr.k_fixed, seed);
  }
  throw Error(ErrorKind::domain, "unknown engine");
}

std::unique_ptr<SearchIndex> build_index(EngineKind engine, const EngineParams& params,
                                         std::size_t dim, std::span<const IndexedSlide> slides) {
  if (slides.empty()) throw Error(ErrorKind::empty_input, "build_index: no slides to index");
  switch (engine) {
    case EngineKind::yottixel: return std::make_unique<YottixelIndex>(dim, slides);
    case EngineKind::sish: return std::make_unique<SishIndex>(dim, params.sish, slides);
    case EngineKind::retccl: return std::make_unique<RetcclIndex>(dim, params.retccl, slides);
    case EngineKind::hshr: return std::make_unique<HshrIndex>(params.hshr, slides);
  }
  throw Error(ErrorKind::domain, "unknown engine");
}

MosaicDatabase build_database(EngineKind engine, const EngineParams& params,
                              std::span<const SlideRecord> slides, std::size_t threads) {
  MosaicDatabase db;
  db.engine = engine;
  db.params = params;
  if (slides.empty()) throw Error(ErrorKind::empty_input, "build_database: no slides");
  db.dim = slides.front().patches.empty() ? 0 : slides.front().patches.front().feature.size();

  std::vector<std::optional<Mosaic>> mosaics(slides.size());
  std::vector<std::string> failures(slides.size());
  parallel_for(slides.size(), threads, [&](std::size_t i) {
    try {
      validate_patches(slides[i].patches, db.dim);
      mosaics[i] = make_mosaic(engine, params, slides[i]);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::unprocessed_slide && e.kind() != ErrorKind::empty_input) throw;
      failures[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < slides.size(); ++i) {
    if (mosaics[i] && !mosaics[i]->empty()) {
      db.slides.push_back({slides[i].labels, std::move(*mosaics[i])});
    } else {
      db.unprocessed.emplace_back(slides[i].slide_id(),
                                  failures[i].empty() ? "empty mosaic" : failures[i]);
    }
  }
  return db;
}

void save_database(const MosaicDatabase& db, const std::filesystem::path& path) {
  json slides = json::array();
  for (const auto& s : db.slides) {
    slides.push_back({{"slide_id", s.labels.slide_id},
                      {"patient_id", s.labels.patient_id},
                      {"site", s.labels.site},
                      {"subtype", s.labels.subtype},
                      {"magnification", std::string(to_string(s.labels.magnification))},
                      {"mosaic", mosaic_to_json(s.mosaic)}});
  }
  json unprocessed = json::array();
  for (const auto& [id, why] : db.unprocessed) unprocessed.push_back({{"slide_id", id}, {"reason", why}});
  const json doc = {{"format", "wsisearch-db"},
                    {"version", kDatabaseFormatVersion},
                    {"engine", std::string(to_string(db.engine))},
                    {"dim", db.dim},
                    {"params", params_to_json(db.params)},
                    {"slides", std::move(slides)},
                    {"unprocessed", std::move(unprocessed)}};
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::format, "cannot write database '" + path.string() + "'");
  out << doc.dump() << '\n';
}

MosaicDatabase load_database(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::format, "cannot open database '" + path.string() + "'");
  try {
    const json doc = json::parse(in);
    if (doc.at("format") != "wsisearch-db" || doc.at("version") != kDatabaseFormatVersion) {
      throw Error(ErrorKind::format, "'" + path.string() + "' is not a wsisearch database");
    }
    MosaicDatabase db;
    db.engine = parse_engine(doc.at("engine").get<std::string>());
    db.dim = doc.at("dim").get<std::size_t>();
    db.params = params_from_json(doc.at("params"));
    for (const auto& s : doc.at("slides")) {
      IndexedSlide slide;
      slide.labels.slide_id = s.at("slide_id");
      slide.labels.patient_id = s.at("patient_id");
      slide.labels.site = s.at("site");
      slide.labels.subtype = s.at("subtype");
      slide.labels.magnification = parse_magnification(s.at("magnification").get<std::string>());
      slide.mosaic = mosaic_from_json(s.at("mosaic"), slide.labels.slide_id);
      db.slides.push_back(std::move(slide));
    }
    for (const auto& u : doc.at("unprocessed")) {
      db.unprocessed.emplace_back(u.at("slide_id"), u.at("reason"));
    }
    return db;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::format, "malformed database '" + path.string() + "': " + e.what());
  }
}

}  // namespace wsisearch
