#include "wsisearch/sish.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <unordered_set>

namespace wsisearch::sish {

FeatureStats FeatureStats::compute(std::span<const PatchFeature> patches) {
  FeatureStats stats;
  for (const auto& p : patches) stats.absorb(p.feature);
  return stats;
}

void FeatureStats::absorb(std::span<const float> feature) {
  if (min.empty()) {
    min.assign(feature.begin(), feature.end());
    max.assign(feature.begin(), feature.end());
    return;
  }
  if (feature.size() != min.size()) {
    throw Error(ErrorKind::dimension, "FeatureStats: dimension mismatch");
  }
  for (std::size_t i = 0; i < feature.size(); ++i) {
    min[i] = std::min(min[i], feature[i]);
    max[i] = std::max(max[i], feature[i]);
  }
}

std::uint64_t index_encode(std::span<const float> feature, const FeatureStats& stats) {
  if (feature.empty() || feature.size() != stats.min.size() ||
      feature.size() != stats.max.size()) {
    throw Error(ErrorKind::dimension, "index_encode: feature does not match statistics");
  }
  bool any_range = false;
  std::vector<double> quantized(feature.size());
  for (std::size_t i = 0; i < feature.size(); ++i) {
    const double lo = stats.min[i];
    const double hi = stats.max[i];
    if (hi <= lo) {
      quantized[i] = 0.0;
      continue;
    }
    any_range = true;
    const double q = std::round(255.0 * (double(feature[i]) - lo) / (hi - lo));
    quantized[i] = std::clamp(q, 0.0, 255.0);
  }
  if (!any_range) {
    throw Error(ErrorKind::domain, "index_encode: degenerate statistics (min == max everywhere)");
  }
  while (quantized.size() % 6 != 0) quantized.push_back(quantized.back());

  const std::size_t n = quantized.size();
  std::uint64_t index = 0;
  for (std::size_t parts : {1u, 2u, 3u}) {
    const std::size_t width = n / parts;
    for (std::size_t p = 0; p < parts; ++p) {
      double sum = 0.0;
      for (std::size_t i = p * width; i < (p + 1) * width; ++i) sum += quantized[i];
      const auto digit =
          static_cast<std::uint64_t>(std::clamp(std::round(sum / double(width)), 0.0, 255.0));
      index = (index << 8) | digit;
    }
  }
  return index;
}

Database::Database(std::size_t dim, Config config, FeatureStats stats)
    : dim_(dim), config_(config), stats_(std::move(stats)), tree_(config.universe_bits) {
  if (stats_.min.size() != dim_ || stats_.max.size() != dim_) {
    throw Error(ErrorKind::dimension, "sish: statistics dimension does not match database");
  }
}

Database Database::build(std::size_t dim, const Config& config,
                         std::span<const SlideLabels> labels, std::span<const Mosaic> mosaics) {
  if (labels.size() != mosaics.size()) {
    throw Error(ErrorKind::validation, "sish: one mosaic per slide is required");
  }
  FeatureStats stats;
  for (const auto& m : mosaics) {
    validate_patches(m.members, dim);
    for (const auto& p : m.members) stats.absorb(p.feature);
  }
  if (stats.min.empty()) throw Error(ErrorKind::empty_input, "sish: no mosaic patches to index");
  Database db(dim, config, std::move(stats));
  for (std::size_t i = 0; i < labels.size(); ++i) db.add(labels[i], mosaics[i]);
  return db;
}

std::uint64_t Database::to_key(std::uint64_t index) const {
  if (config_.universe_bits >= kIndexBits) return index;
  return index >> (kIndexBits - config_.universe_bits);
}

Entry Database::make_entry(const PatchFeature& patch, int ordinal) const {
  if (patch.feature.size() != dim_) {
    throw Error(ErrorKind::dimension, "sish: patch dimension does not match database");
  }
  Entry e;
  e.index = index_encode(patch.feature, stats_);
  e.code = binarize_barcode(patch.feature);
  e.x = patch.x;
  e.y = patch.y;
  e.ordinal = ordinal;
  return e;
}

void Database::add(const SlideLabels& labels, const Mosaic& mosaic) {
  if (mosaic.empty()) {
    throw Error(ErrorKind::unprocessed_slide,
                "sish: slide '" + labels.slide_id + "' has an empty mosaic");
  }
  if (labels_.contains(labels.slide_id)) {
    throw Error(ErrorKind::validation, "sish: duplicate slide_id '" + labels.slide_id + "'");
  }
  labels_[labels.slide_id] = labels;
  for (std::size_t i = 0; i < mosaic.members.size(); ++i) {
    Entry e = make_entry(mosaic.members[i], static_cast<int>(i));
    e.slide_id = labels.slide_id;
    const std::uint64_t key = to_key(e.index);
    tree_.insert(key);
    buckets_[key].push_back(std::move(e));
  }
}

GuidedSearchResult Database::guided_search(const Entry& query, std::size_t probe_budget,
                                           const SlideIdSet& excluded) const {
  GuidedSearchResult out;
  if (tree_.empty()) return out;

  const std::uint64_t universe = tree_.universe_size();
  const std::uint64_t m = std::min(to_key(query.index), universe - 1);
  const std::uint64_t c = std::max<std::uint64_t>(1, to_key(config_.seed_offset));

  std::vector<std::uint64_t> seeds{m};
  if (m + c < universe) seeds.push_back(m + c);
  if (m >= c) seeds.push_back(m - c);

  struct Walker {
    std::uint64_t pos;
    bool forward;
    bool active = true;
  };
  std::vector<Walker> walkers;
  std::unordered_set<std::uint64_t> seen;
  auto visit = [&](std::uint64_t key) {
    if (seen.insert(key).second) out.visited.push_back(key);
  };

  for (std::uint64_t s : seeds) {
    if (out.probes >= probe_budget) break;
    ++out.probes;
    if (tree_.member(s)) visit(s);
    walkers.push_back({s, true});
    walkers.push_back({s, false});
  }

  bool any_active = true;
  while (out.probes < probe_budget && any_active) {
    any_active = false;
    for (auto& w : walkers) {
      if (!w.active) continue;
      if (out.probes >= probe_budget) break;
      ++out.probes;
      const auto next = w.forward ? tree_.successor(w.pos) : tree_.predecessor(w.pos);
      if (!next) {
        w.active = false;
        continue;
      }
      w.pos = *next;
      visit(*next);
      any_active = true;
    }
  }

  for (std::uint64_t key : out.visited) {
    const auto it = buckets_.find(key);
    if (it == buckets_.end()) continue;
    for (const Entry& e : it->second) {
      if (excluded.contains(e.slide_id)) continue;
      const int d = hamming_distance(query.code, e.code);
      if (d <= config_.hamming_threshold) out.matches.push_back({&e, d});
    }
  }
  std::sort(out.matches.begin(), out.matches.end(), [](const Match& a, const Match& b) {
    return std::tie(a.hamming, a.entry->slide_id, a.entry->ordinal) <
           std::tie(b.hamming, b.entry->slide_id, b.entry->ordinal);
  });
  return out;
}

RetrievalResult Database::query_slides(const Mosaic& query, std::size_t k,
                                       const SlideIdSet& excluded) const {
  std::vector<std::vector<Match>> per_patch;
  per_patch.reserve(query.members.size());
  for (std::size_t i = 0; i < query.members.size(); ++i) {
    const Entry e = make_entry(query.members[i], static_cast<int>(i));
    per_patch.push_back(guided_search(e, config_.probe_budget, excluded).matches);
  }
  return rank_slides(per_patch, labels_, k);
}

RetrievalResult Database::query_patches(const PatchFeature& query, std::size_t k,
                                        const SlideIdSet& excluded) const {
  const Entry e = make_entry(query);
  const auto found = guided_search(e, config_.probe_budget, excluded);
  RetrievalResult result;
  result.k_requested = k;
  for (std::size_t i = 0; i < std::min(k, found.matches.size()); ++i) {
    const Match& m = found.matches[i];
    const auto& l = labels_.at(m.entry->slide_id);
    result.entries.push_back({l.slide_id, l.site, l.subtype, double(m.hamming),
                              DistanceKind::hamming, m.entry->ordinal});
  }
  return result;
}

RetrievalResult rank_slides(std::span<const std::vector<Match>> patch_results,
                            const std::map<std::string, SlideLabels>& labels, std::size_t k) {
  RetrievalResult result;
  result.k_requested = k;

  std::map<std::string, double> frequency;
  for (const auto& [id, l] : labels) frequency[l.subtype] += 1.0;
  for (auto& [subtype, f] : frequency) f /= double(labels.size());

  std::vector<double> entropies(patch_results.size(), 0.0);
  std::vector<double> observed;
  for (std::size_t i = 0; i < patch_results.size(); ++i) {
    if (patch_results[i].empty()) continue;
    std::vector<std::string> subtypes;
    subtypes.reserve(patch_results[i].size());
    for (const Match& m : patch_results[i]) {
      subtypes.push_back(labels.at(m.entry->slide_id).subtype);
    }
    entropies[i] = label_entropy(subtypes);
    observed.push_back(entropies[i]);
  }
  if (observed.empty()) return result;
  const double cutoff = median(observed);

  std::map<std::string, double> votes;
  for (std::size_t i = 0; i < patch_results.size(); ++i) {
    if (patch_results[i].empty() || entropies[i] > cutoff) continue;
    const double certainty = 1.0 / (1.0 + entropies[i]);
    for (const Match& m : patch_results[i]) {
      const auto& l = labels.at(m.entry->slide_id);
      votes[l.slide_id] += certainty / frequency.at(l.subtype);
    }
  }

  std::vector<std::pair<double, const std::string*>> ranked;
  for (const auto& [id, v] : votes) ranked.emplace_back(v, &id);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return *a.second < *b.second;
  });
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) {
    const auto& l = labels.at(*ranked[i].second);
    result.entries.push_back(
        {l.slide_id, l.site, l.subtype, ranked[i].first, DistanceKind::hamming, -1});
  }
  return result;
}

}  // namespace wsisearch::sish
