#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "wsisearch/core.hpp"
#include "wsisearch/mosaic.hpp"
#include "wsisearch/veb_tree.hpp"

namespace wsisearch::sish {

/// Width of the encoded index: six base-256 pooled digits.
inline constexpr unsigned kIndexBits = 48;

struct Config {
  std::size_t k_primary = 9;
  double selection_fraction = 0.15;
  unsigned universe_bits = kIndexBits;
  int hamming_threshold = 128;
  std::size_t probe_budget = 500;
  // One unit of the most significant (whole-vector) pooled digit.
  std::uint64_t seed_offset = std::uint64_t{1} << 40;
  bool drop_constant_patches = true;
};

/// Per-component value range of the database features; fixes the
/// quantization grid shared by database and queries.
struct FeatureStats {
  std::vector<float> min;
  std::vector<float> max;

  static FeatureStats compute(std::span<const PatchFeature> patches);
  void absorb(std::span<const float> feature);
};

/// Quantizes each component to 0..255 against `stats`, average-pools the
/// result over the whole vector, its halves and its thirds, and packs the six
/// rounded means as base-256 digits (whole vector most significant). The
/// quantized vector is padded by repeating its last component until its
/// length divides by six.
std::uint64_t index_encode(std::span<const float> feature, const FeatureStats& stats);

struct Entry {
  std::uint64_t index = 0;
  Barcode code;
  std::string slide_id;
  std::int32_t x = 0;
  std::int32_t y = 0;
  int ordinal = 0;
};

struct Match {
  const Entry* entry = nullptr;
  int hamming = 0;
};

struct GuidedSearchResult {
  std::vector<Match> matches;
  std::size_t probes = 0;
  std::vector<std::uint64_t> visited;  // tree members in probe order
};

class Database {
 public:
  Database(std::size_t dim, Config config, FeatureStats stats);

  /// Computes feature statistics over every mosaic member, then indexes them.
  static Database build(std::size_t dim, const Config& config,
                        std::span<const SlideLabels> labels, std::span<const Mosaic> mosaics);

  std::size_t dim() const { return dim_; }
  const Config& config() const { return config_; }
  const FeatureStats& stats() const { return stats_; }
  const VebTree& tree() const { return tree_; }
  std::size_t slide_count() const { return labels_.size(); }
  const std::map<std::string, SlideLabels>& labels() const { return labels_; }
  const std::unordered_map<std::uint64_t, std::vector<Entry>>& buckets() const {
    return buckets_;
  }

  void add(const SlideLabels& labels, const Mosaic& mosaic);

  /// Index and barcode for one patch, using this database's statistics.
  Entry make_entry(const PatchFeature& patch, int ordinal = 0) const;

  GuidedSearchResult guided_search(const Entry& query, std::size_t probe_budget,
                                   const SlideIdSet& excluded = {}) const;
  GuidedSearchResult guided_search(const Entry& query) const {
    return guided_search(query, config_.probe_budget);
  }

  RetrievalResult query_slides(const Mosaic& query, std::size_t k,
                               const SlideIdSet& excluded = {}) const;
  RetrievalResult query_patches(const PatchFeature& query, std::size_t k,
                                const SlideIdSet& excluded = {}) const;

 private:
  std::uint64_t to_key(std::uint64_t index) const;

  std::size_t dim_;
  Config config_;
  FeatureStats stats_;
  VebTree tree_;
  std::unordered_map<std::uint64_t, std::vector<Entry>> buckets_;
  std::map<std::string, SlideLabels> labels_;
};

/// Uncertainty-aware slide ranking over per-query-patch search results.
///
/// Patches whose retrieved subtype labels have entropy above the median are
/// discarded. Each surviving match votes for its slide with weight
/// 1 / (1 + entropy) divided by the database frequency of the slide's
/// subtype. Slides are ranked by total vote, ties by slide_id.
RetrievalResult rank_slides(std::span<const std::vector<Match>> patch_results,
                            const std::map<std::string, SlideLabels>& labels, std::size_t k);

}  // namespace wsisearch::sish
