#include "wsisearch/yottixel.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <tuple>
#include <utility>

namespace wsisearch::yottixel {

BagOfBarcodes index_mosaic(const Mosaic& mosaic) {
  if (mosaic.empty()) {
    throw Error(ErrorKind::unprocessed_slide,
                "yottixel: slide '" + mosaic.slide_id + "' has an empty mosaic");
  }
  BagOfBarcodes bob;
  bob.slide_id = mosaic.slide_id;
  std::set<std::pair<std::int32_t, std::int32_t>> seen;
  for (const auto& member : mosaic.members) {
    if (!seen.emplace(member.x, member.y).second) {
      throw Error(ErrorKind::validation, "yottixel: duplicate patch coordinate in slide '" +
                                             mosaic.slide_id + "'");
    }
    bob.barcodes.push_back({binarize_barcode(member.feature), member.x, member.y});
  }
  return bob;
}

BagOfBarcodes index_slide(const SlideRecord& slide, const Mosaic& mosaic) {
  BagOfBarcodes bob = index_mosaic(mosaic);
  bob.slide_id = slide.slide_id();
  return bob;
}

double bob_distance(const BagOfBarcodes& query, const BagOfBarcodes& target) {
  if (query.barcodes.empty() || target.barcodes.empty()) {
    throw Error(ErrorKind::empty_input, "bob_distance: empty bag of barcodes");
  }
  std::vector<double> minima;
  minima.reserve(query.size());
  for (const auto& q : query.barcodes) {
    int best = std::numeric_limits<int>::max();
    for (const auto& t : target.barcodes) {
      best = std::min(best, hamming_distance(q.code, t.code));
      if (best == 0) break;
    }
    minima.push_back(best);
  }
  return median(std::move(minima));
}

void Database::add(const SlideLabels& labels, BagOfBarcodes bob) {
  if (bob.barcodes.empty()) {
    throw Error(ErrorKind::unprocessed_slide, "yottixel: empty BoB for '" + labels.slide_id + "'");
  }
  for (const auto& b : bob.barcodes) {
    if (b.code.size() + 1 != dim_) {
      throw Error(ErrorKind::dimension, "yottixel: barcode length does not match D-1");
    }
  }
  if (bobs_.contains(labels.slide_id)) {
    throw Error(ErrorKind::validation, "yottixel: duplicate slide_id '" + labels.slide_id + "'");
  }
  bob.slide_id = labels.slide_id;
  labels_[labels.slide_id] = labels;
  bobs_.emplace(labels.slide_id, std::move(bob));
}

const SlideLabels& Database::labels(const std::string& slide_id) const {
  return labels_.at(slide_id);
}

RetrievalResult Database::query_slides(const BagOfBarcodes& query, std::size_t k,
                                       const SlideIdSet& excluded) const {
  std::vector<std::pair<double, const std::string*>> scored;
  scored.reserve(bobs_.size());
  for (const auto& [id, bob] : bobs_) {
    if (excluded.contains(id)) continue;
    scored.emplace_back(bob_distance(query, bob), &id);
  }
  const std::size_t take = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + take, scored.end(),
                    [](const auto& a, const auto& b) {
                      return std::tie(a.first, *a.second) < std::tie(b.first, *b.second);
                    });

  RetrievalResult result;
  result.k_requested = k;
  for (std::size_t i = 0; i < take; ++i) {
    const auto& l = labels_.at(*scored[i].second);
    result.entries.push_back(
        {l.slide_id, l.site, l.subtype, scored[i].first, DistanceKind::hamming, -1});
  }
  return result;
}

RetrievalResult Database::query_patches(const Barcode& query, std::size_t k,
                                        const SlideIdSet& excluded) const {
  struct Hit {
    int distance;
    const std::string* slide;
    int ordinal;
  };
  std::vector<Hit> hits;
  for (const auto& [id, bob] : bobs_) {
    if (excluded.contains(id)) continue;
    for (std::size_t i = 0; i < bob.barcodes.size(); ++i) {
      hits.push_back({hamming_distance(query, bob.barcodes[i].code), &id, static_cast<int>(i)});
    }
  }
  const std::size_t take = std::min(k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + take, hits.end(),
                    [](const Hit& a, const Hit& b) {
                      return std::tie(a.distance, *a.slide, a.ordinal) <
                             std::tie(b.distance, *b.slide, b.ordinal);
                    });
  RetrievalResult result;
  result.k_requested = k;
  for (std::size_t i = 0; i < take; ++i) {
    const auto& l = labels_.at(*hits[i].slide);
    result.entries.push_back({l.slide_id, l.site, l.subtype, double(hits[i].distance),
                              DistanceKind::hamming, hits[i].ordinal});
  }
  return result;
}

}  // namespace wsisearch::yottixel
