#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wsisearch/core.hpp"
#include "wsisearch/hshr.hpp"
#include "wsisearch/mosaic.hpp"
#include "wsisearch/retccl.hpp"
#include "wsisearch/sish.hpp"
#include "wsisearch/yottixel.hpp"

namespace wsisearch {

enum class EngineKind { yottixel, sish, retccl, hshr };

std::string_view to_string(EngineKind kind);
EngineKind parse_engine(std::string_view text);

struct EngineParams {
  yottixel::Config yottixel;
  sish::Config sish;
  retccl::Config retccl;
  hshr::Config hshr;
  std::uint64_t seed = 0;
};

/// Per-slide clustering seed; depends only on the base seed and the slide id
/// so database and query mosaics of one slide agree.
std::uint64_t slide_seed(std::uint64_t base, std::string_view slide_id);

/// The engine's mosaic recipe applied to one slide.
Mosaic make_mosaic(EngineKind engine, const EngineParams& params, const SlideRecord& slide);

/// A slide as stored in a database: labels plus its engine mosaic.
struct IndexedSlide {
  SlideLabels labels;
  Mosaic mosaic;
};

/// Uniform query surface over the four engines.
class SearchIndex {
 public:
  virtual ~SearchIndex() = default;

  virtual EngineKind kind() const = 0;
  virtual std::size_t slide_count() const = 0;

  virtual RetrievalResult query_slides(const Mosaic& query, std::size_t k,
                                       const SlideIdSet& excluded = {}) const = 0;

  /// Throws ErrorKind::unsupported_operation for engines without patch search.
  virtual RetrievalResult query_patch(const PatchFeature& query, std::size_t k,
                                      const SlideIdSet& excluded = {}) const = 0;
};

std::unique_ptr<SearchIndex> build_index(EngineKind engine, const EngineParams& params,
                                         std::size_t dim, std::span<const IndexedSlide> slides);

struct MosaicDatabase {
  EngineKind engine = EngineKind::yottixel;
  EngineParams params;
  std::size_t dim = 0;
  std::vector<IndexedSlide> slides;
  // Slides whose mosaic could not be built, with the reason.
  std::vector<std::pair<std::string, std::string>> unprocessed;
};

/// Builds every slide's mosaic (optionally on `threads` workers). Slides that
/// fail with an unprocessed-slide or empty-input error are recorded, not
/// fatal.
MosaicDatabase build_database(EngineKind engine, const EngineParams& params,
                              std::span<const SlideRecord> slides, std::size_t threads = 1);

void save_database(const MosaicDatabase& db, const std::filesystem::path& path);
MosaicDatabase load_database(const std::filesystem::path& path);

}  // namespace wsisearch
