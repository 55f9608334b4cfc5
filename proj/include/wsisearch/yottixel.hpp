#pragma once

#include <map>
#include <string>
#include <vector>

#include "wsisearch/core.hpp"
#include "wsisearch/mosaic.hpp"

namespace wsisearch::yottixel {

struct Config {
  std::size_t k_primary = 9;
  double selection_fraction = 0.15;
};

struct CodedPatch {
  Barcode code;
  std::int32_t x = 0;
  std::int32_t y = 0;
};

struct BagOfBarcodes {
  std::string slide_id;
  std::vector<CodedPatch> barcodes;

  std::size_t size() const { return barcodes.size(); }
};

/// One barcode per mosaic member. An empty mosaic marks the slide as
/// unprocessed.
BagOfBarcodes index_slide(const SlideRecord& slide, const Mosaic& mosaic);
BagOfBarcodes index_mosaic(const Mosaic& mosaic);

/// Median over query barcodes of the minimum Hamming distance to any target
/// barcode. Not symmetric in general.
double bob_distance(const BagOfBarcodes& query, const BagOfBarcodes& target);

class Database {
 public:
  explicit Database(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return bobs_.size(); }

  void add(const SlideLabels& labels, BagOfBarcodes bob);

  const std::map<std::string, BagOfBarcodes>& bobs() const { return bobs_; }
  const SlideLabels& labels(const std::string& slide_id) const;

  /// k smallest BoB distances, ascending; ties by slide_id.
  RetrievalResult query_slides(const BagOfBarcodes& query, std::size_t k,
                               const SlideIdSet& excluded = {}) const;

  /// Global top-k patches by Hamming distance; ties by (slide_id, ordinal).
  RetrievalResult query_patches(const Barcode& query, std::size_t k,
                                const SlideIdSet& excluded = {}) const;

 private:
  std::size_t dim_;
  std::map<std::string, BagOfBarcodes> bobs_;
  std::map<std::string, SlideLabels> labels_;
};

}  // namespace wsisearch::yottixel
