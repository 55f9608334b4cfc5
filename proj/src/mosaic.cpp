#include "wsisearch/mosaic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace wsisearch {
namespace {

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

// Uniform double in [0, 1) built from the raw engine output so results do not
// depend on the standard library's distribution implementation.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

PointSet seed_plus_plus(const PointSet& points, std::size_t k, std::mt19937_64& rng) {
  const std::size_t n = points.size();
  PointSet centers;
  centers.reserve(k);
  centers.push_back(points[static_cast<std::size_t>(uniform01(rng) * n)]);

  std::vector<double> nearest(n);
  for (std::size_t i = 0; i < n; ++i) nearest[i] = squared_distance(points[i], centers[0]);

  while (centers.size() < k) {
    const double total = std::accumulate(nearest.begin(), nearest.end(), 0.0);
    std::size_t chosen = 0;
    if (total <= 0.0) {
      chosen = static_cast<std::size_t>(uniform01(rng) * n);
    } else {
      double target = uniform01(rng) * total;
      chosen = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        target -= nearest[i];
        if (target < 0.0) {
          chosen = i;
          break;
        }
      }
    }
    centers.push_back(points[chosen]);
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(points[i], centers.back()));
    }
  }
  return centers;
}

std::size_t nearest_center(const std::vector<double>& p, const PointSet& centers, double* dist) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const double d = squared_distance(p, centers[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (dist != nullptr) *dist = best_d;
  return best;
}

}  // namespace

KMeansResult kmeans(const PointSet& points, std::size_t k, std::uint64_t seed) {
  if (points.empty()) throw Error(ErrorKind::empty_input, "kmeans: no points");
  if (k == 0) throw Error(ErrorKind::domain, "kmeans: k must be at least 1");
  const std::size_t dim = points.front().size();
  for (const auto& p : points) {
    if (p.size() != dim) throw Error(ErrorKind::dimension, "kmeans: ragged point set");
  }

  const std::size_t n = points.size();
  k = std::min(k, n);

  std::mt19937_64 rng(seed);
  PointSet centers = seed_plus_plus(points, k, rng);
  std::vector<std::size_t> assign(n, std::numeric_limits<std::size_t>::max());

  for (int iter = 0; iter < kMaxLloydIterations; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = nearest_center(points[i], centers, nullptr);
      if (c != assign[i]) {
        assign[i] = c;
        changed = true;
      }
    }
    if (!changed) break;

    PointSet sums(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto& s = sums[assign[i]];
      for (std::size_t d = 0; d < dim; ++d) s[d] += points[i][d];
      ++counts[assign[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;  // keep stale center; dropped below if still empty
      for (std::size_t d = 0; d < dim; ++d) centers[c][d] = sums[c][d] / counts[c];
    }
  }

  // Drop empty clusters and compact indices.
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t a : assign) ++counts[a];
  std::vector<std::size_t> remap(k, 0);
  KMeansResult result;
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) continue;
    remap[c] = result.centroids.size();
    result.centroids.push_back(std::move(centers[c]));
  }
  result.assignments.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    result.assignments[i] = remap[assign[i]];
    result.inertia += squared_distance(points[i], result.centroids[result.assignments[i]]);
  }
  return result;
}

PointSet to_points(std::span<const PatchFeature> patches) {
  PointSet points;
  points.reserve(patches.size());
  for (const auto& p : patches) points.emplace_back(p.feature.begin(), p.feature.end());
  return points;
}

Mosaic build_mosaic_percent(const SlideRecord& slide, const PointSet& cluster_features,
                            std::size_t k_primary, double fraction, std::uint64_t seed) {
  if (slide.patches.empty()) {
    throw Error(ErrorKind::empty_input, "build_mosaic_percent: slide '" + slide.slide_id() +
                                            "' has no patches");
  }
  if (cluster_features.size() != slide.patches.size()) {
    throw Error(ErrorKind::dimension,
                "build_mosaic_percent: one cluster feature per patch is required");
  }
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error(ErrorKind::domain, "build_mosaic_percent: fraction must lie in (0, 1]");
  }

  const KMeansResult primary = kmeans(cluster_features, k_primary, seed);
  std::vector<std::vector<std::size_t>> groups(primary.effective_k());
  for (std::size_t i = 0; i < primary.assignments.size(); ++i) {
    groups[primary.assignments[i]].push_back(i);
  }

  std::vector<std::size_t> selected;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& members = groups[g];
    // The epsilon keeps e.g. 0.15 * 20 from rounding up to 4.
    const auto wanted = static_cast<std::size_t>(
        std::ceil(fraction * static_cast<double>(members.size()) - 1e-9));
    const std::size_t k_spatial = std::max<std::size_t>(1, wanted);

    PointSet coords;
    coords.reserve(members.size());
    for (std::size_t idx : members) {
      coords.push_back({double(slide.patches[idx].x), double(slide.patches[idx].y)});
    }
    const KMeansResult spatial = kmeans(coords, k_spatial, seed + 1 + g);

    for (std::size_t c = 0; c < spatial.effective_k(); ++c) {
      std::size_t best = members.size();
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < members.size(); ++j) {
        if (spatial.assignments[j] != c) continue;
        const double d = squared_distance(coords[j], spatial.centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = j;
        }
      }
      selected.push_back(members[best]);
    }
  }
  std::sort(selected.begin(), selected.end());

  Mosaic mosaic;
  mosaic.slide_id = slide.slide_id();
  mosaic.method = MosaicMethod::percent_of_clusters;
  mosaic.k_primary = k_primary;
  mosaic.selection_fraction = fraction;
  for (std::size_t idx : selected) {
    mosaic.members.push_back(slide.patches[idx]);
    mosaic.populations.push_back(1);
  }
  return mosaic;
}

Mosaic build_mosaic_percent(const SlideRecord& slide, std::size_t k_primary, double fraction,
                            std::uint64_t seed) {
  return build_mosaic_percent(slide, to_points(slide.patches), k_primary, fraction, seed);
}

Mosaic build_mosaic_fixed(const SlideRecord& slide, std::size_t k_fixed, std::uint64_t seed) {
  if (slide.patches.empty()) {
    throw Error(ErrorKind::empty_input,
                "build_mosaic_fixed: slide '" + slide.slide_id() + "' has no patches");
  }
  const PointSet points = to_points(slide.patches);
  const KMeansResult km = kmeans(points, k_fixed, seed);

  Mosaic mosaic;
  mosaic.slide_id = slide.slide_id();
  mosaic.method = MosaicMethod::fixed_centroids;
  mosaic.k_fixed = k_fixed;
  mosaic.populations.assign(km.effective_k(), 0);
  for (std::size_t a : km.assignments) ++mosaic.populations[a];

  for (std::size_t c = 0; c < km.effective_k(); ++c) {
    // Synthetic member: centroid feature at the coordinate of the nearest
    // real patch in its cluster.
    std::size_t nearest = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (km.assignments[i] != c) continue;
      const double d = squared_distance(points[i], km.centroids[c]);
      if (d < best_d) {
        best_d = d;
        nearest = i;
      }
    }
    PatchFeature member;
    member.x = slide.patches[nearest].x;
    member.y = slide.patches[nearest].y;
    member.feature.assign(km.centroids[c].begin(), km.centroids[c].end());
    mosaic.members.push_back(std::move(member));
  }
  return mosaic;
}

SlideRecord drop_constant_patches(SlideRecord slide) {
  std::erase_if(slide.patches, [](const PatchFeature& p) {
    return std::adjacent_find(p.feature.begin(), p.feature.end(), std::not_equal_to<>()) ==
           p.feature.end();
  });
  return slide;
}

}  // namespace wsisearch
