#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wsisearch/core.hpp"
#include "wsisearch/mosaic.hpp"

namespace wsisearch::retccl {

struct Config {
  std::size_t k_primary = 9;
  double selection_fraction = 0.20;
  double sim_threshold = 0.70;
  // Minimum mean top-5 score a bag needs to survive; unset means the median
  // of that mean across the query's bags.
  std::optional<double> quality_threshold;
};

/// Hits per bag that enter the quality score and the diagnosis vote.
inline constexpr std::size_t kBagTop = 5;

struct Hit {
  std::string slide_id;
  int ordinal = 0;
  double score = 0.0;
  std::string subtype;
};

struct Bag {
  int query_ordinal = 0;
  std::vector<Hit> hits;  // descending score
  double entropy = 0.0;   // +inf for an empty bag

  double mean_top_score() const;
};

struct IndexedPatch {
  std::string slide_id;
  int ordinal = 0;
  PatchFeature patch;
  double norm = 0.0;
};

class Database {
 public:
  Database(std::size_t dim, Config config);

  std::size_t dim() const { return dim_; }
  const Config& config() const { return config_; }
  std::size_t patch_count() const { return patches_.size(); }
  const std::vector<IndexedPatch>& patches() const { return patches_; }
  const std::map<std::string, SlideLabels>& labels() const { return labels_; }

  void add(const SlideLabels& labels, const Mosaic& mosaic);

  /// One bag per query mosaic member holding every database patch with
  /// cosine similarity at or above the threshold.
  std::vector<Bag> build_bags(const Mosaic& query, const SlideIdSet& excluded = {}) const;

  RetrievalResult query_slides(const Mosaic& query, std::size_t k,
                               const SlideIdSet& excluded = {}) const;

  /// Global top-k patches by cosine, descending; ties by (slide_id, ordinal).
  RetrievalResult query_patches(const PatchFeature& query, std::size_t k,
                                const SlideIdSet& excluded = {}) const;

 private:
  std::size_t dim_;
  Config config_;
  std::vector<IndexedPatch> patches_;
  std::map<std::string, SlideLabels> labels_;
};

/// Drops empty bags and bags whose mean top-5 score is below the quality
/// threshold, then orders the rest by ascending entropy.
std::vector<Bag> filter_and_order_bags(std::vector<Bag> bags,
                                       std::optional<double> quality_threshold = std::nullopt);

/// Walks bags in order; each contributes the best hit carrying its top-5
/// majority diagnosis. Slides already collected are skipped.
RetrievalResult vote_slides(std::span<const Bag> bags, std::size_t k,
                            const std::map<std::string, SlideLabels>& labels);

}  // namespace wsisearch::retccl
