#include "wsisearch/retccl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <tuple>

namespace wsisearch::retccl {
namespace {

double norm_of(std::span<const float> v) {
  double s = 0.0;
  for (float x : v) s += double(x) * x;
  return std::sqrt(s);
}

double cosine_with_norms(std::span<const float> a, double na, std::span<const float> b,
                         double nb) {
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += double(a[i]) * b[i];
  return std::clamp(dot / (na * nb), -1.0, 1.0);
}

bool hit_order(const Hit& a, const Hit& b) {
  if (a.score != b.score) return a.score > b.score;
  return std::tie(a.slide_id, a.ordinal) < std::tie(b.slide_id, b.ordinal);
}

}  // namespace

double Bag::mean_top_score() const {
  if (hits.empty()) return -std::numeric_limits<double>::infinity();
  const std::size_t n = std::min(kBagTop, hits.size());
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += hits[i].score;
  return s / double(n);
}

Database::Database(std::size_t dim, Config config) : dim_(dim), config_(config) {
  if (!(config_.sim_threshold > 0.0 && config_.sim_threshold <= 1.0)) {
    throw Error(ErrorKind::domain, "retccl: similarity threshold must lie in (0, 1]");
  }
}

void Database::add(const SlideLabels& labels, const Mosaic& mosaic) {
  if (mosaic.empty()) {
    throw Error(ErrorKind::unprocessed_slide,
                "retccl: slide '" + labels.slide_id + "' has an empty mosaic");
  }
  if (labels_.contains(labels.slide_id)) {
    throw Error(ErrorKind::validation, "retccl: duplicate slide_id '" + labels.slide_id + "'");
  }
  validate_patches(mosaic.members, dim_);
  labels_[labels.slide_id] = labels;
  for (std::size_t i = 0; i < mosaic.members.size(); ++i) {
    const auto& p = mosaic.members[i];
    const double n = norm_of(p.feature);
    if (n == 0.0) continue;  // cosine undefined; never retrievable
    patches_.push_back({labels.slide_id, static_cast<int>(i), p, n});
  }
}

std::vector<Bag> Database::build_bags(const Mosaic& query, const SlideIdSet& excluded) const {
  std::vector<Bag> bags;
  bags.reserve(query.members.size());
  for (std::size_t q = 0; q < query.members.size(); ++q) {
    Bag bag;
    bag.query_ordinal = static_cast<int>(q);
    const auto& feature = query.members[q].feature;
    if (feature.size() != dim_) {
      throw Error(ErrorKind::dimension, "retccl: query dimension does not match database");
    }
    const double qn = norm_of(feature);
    if (qn > 0.0) {
      for (const auto& ip : patches_) {
        if (excluded.contains(ip.slide_id)) continue;
        const double s = cosine_with_norms(feature, qn, ip.patch.feature, ip.norm);
        if (s >= config_.sim_threshold) {
          bag.hits.push_back({ip.slide_id, ip.ordinal, s, labels_.at(ip.slide_id).subtype});
        }
      }
    }
    std::sort(bag.hits.begin(), bag.hits.end(), hit_order);
    if (bag.hits.empty()) {
      bag.entropy = std::numeric_limits<double>::infinity();
    } else {
      std::vector<std::string> subtypes;
      subtypes.reserve(bag.hits.size());
      for (const auto& h : bag.hits) subtypes.push_back(h.subtype);
      bag.entropy = label_entropy(subtypes);
    }
    bags.push_back(std::move(bag));
  }
  return bags;
}

std::vector<Bag> filter_and_order_bags(std::vector<Bag> bags,
                                       std::optional<double> quality_threshold) {
  std::erase_if(bags, [](const Bag& b) { return b.hits.empty(); });
  if (bags.empty()) return bags;

  double threshold;
  if (quality_threshold) {
    threshold = *quality_threshold;
  } else {
    std::vector<double> means;
    means.reserve(bags.size());
    for (const auto& b : bags) means.push_back(b.mean_top_score());
    threshold = median(std::move(means));
  }
  std::erase_if(bags, [threshold](const Bag& b) { return b.mean_top_score() < threshold; });
  std::stable_sort(bags.begin(), bags.end(), [](const Bag& a, const Bag& b) {
    if (a.entropy != b.entropy) return a.entropy < b.entropy;
    return a.query_ordinal < b.query_ordinal;
  });
  return bags;
}

RetrievalResult vote_slides(std::span<const Bag> bags, std::size_t k,
                            const std::map<std::string, SlideLabels>& labels) {
  RetrievalResult result;
  result.k_requested = k;
  std::set<std::string> taken;
  for (const Bag& bag : bags) {
    if (result.entries.size() >= k) break;
    if (bag.hits.empty()) continue;
    const std::size_t top = std::min(kBagTop, bag.hits.size());

    // Majority diagnosis among the top hits; hits are sorted by score, so
    // the first label to reach the best count belongs to the higher-scoring
    // hit.
    std::vector<std::pair<std::string, int>> counts;
    for (std::size_t i = 0; i < top; ++i) {
      auto it = std::find_if(counts.begin(), counts.end(),
                             [&](const auto& c) { return c.first == bag.hits[i].subtype; });
      if (it == counts.end()) {
        counts.emplace_back(bag.hits[i].subtype, 1);
      } else {
        ++it->second;
      }
    }
    const auto winner = std::max_element(counts.begin(), counts.end(),
                                          [](const auto& a, const auto& b) {
                                            return a.second < b.second;
                                          });

    const Hit* representative = nullptr;
    for (std::size_t i = 0; i < top; ++i) {
      if (bag.hits[i].subtype == winner->first) {
        representative = &bag.hits[i];
        break;
      }
    }
    if (!taken.insert(representative->slide_id).second) continue;
    const auto& l = labels.at(representative->slide_id);
    result.entries.push_back(
        {l.slide_id, l.site, l.subtype, representative->score, DistanceKind::cosine, -1});
  }
  return result;
}

RetrievalResult Database::query_slides(const Mosaic& query, std::size_t k,
                                       const SlideIdSet& excluded) const {
  const auto bags = filter_and_order_bags(build_bags(query, excluded), config_.quality_threshold);
  return vote_slides(bags, k, labels_);
}

RetrievalResult Database::query_patches(const PatchFeature& query, std::size_t k,
                                        const SlideIdSet& excluded) const {
  if (query.feature.size() != dim_) {
    throw Error(ErrorKind::dimension, "retccl: query dimension does not match database");
  }
  const double qn = norm_of(query.feature);
  if (qn == 0.0) throw Error(ErrorKind::undefined_similarity, "retccl: zero query vector");

  std::vector<Hit> hits;
  hits.reserve(patches_.size());
  for (const auto& ip : patches_) {
    if (excluded.contains(ip.slide_id)) continue;
    hits.push_back({ip.slide_id, ip.ordinal,
                    cosine_with_norms(query.feature, qn, ip.patch.feature, ip.norm), {}});
  }
  const std::size_t take = std::min(k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + take, hits.end(), hit_order);

  RetrievalResult result;
  result.k_requested = k;
  for (std::size_t i = 0; i < take; ++i) {
    const auto& l = labels_.at(hits[i].slide_id);
    result.entries.push_back(
        {l.slide_id, l.site, l.subtype, hits[i].score, DistanceKind::cosine, hits[i].ordinal});
  }
  return result;
}

}  // namespace wsisearch::retccl
