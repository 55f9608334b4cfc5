#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wsisearch/core.hpp"

namespace wsisearch {

using PointSet = std::vector<std::vector<double>>;

struct KMeansResult {
  std::vector<std::size_t> assignments;
  PointSet centroids;
  double inertia = 0.0;
  std::size_t effective_k() const { return centroids.size(); }
};

inline constexpr int kMaxLloydIterations = 100;

/// Lloyd's algorithm with k-means++ seeding. k is clamped to the number of
/// points and clusters left empty after convergence are dropped, so every
/// reported centroid owns at least one point.
KMeansResult kmeans(const PointSet& points, std::size_t k, std::uint64_t seed);

enum class MosaicMethod { percent_of_clusters, fixed_centroids };

struct Mosaic {
  std::string slide_id;
  std::vector<PatchFeature> members;
  // Number of slide patches each member stands for (fixed_centroids: cluster
  // population; percent_of_clusters: 1).
  std::vector<std::size_t> populations;
  MosaicMethod method = MosaicMethod::percent_of_clusters;
  std::size_t k_primary = 0;
  double selection_fraction = 0.0;
  std::size_t k_fixed = 0;

  std::size_t size() const { return members.size(); }
  bool empty() const { return members.empty(); }
};

PointSet to_points(std::span<const PatchFeature> patches);

/// Feature clustering into k_primary groups, then per group a spatial k-means
/// with ceil(fraction * group size) clusters; the member nearest each spatial
/// centroid is kept.
Mosaic build_mosaic_percent(const SlideRecord& slide, const PointSet& cluster_features,
                            std::size_t k_primary, double fraction, std::uint64_t seed);

/// Convenience overload clustering on the patch features themselves.
Mosaic build_mosaic_percent(const SlideRecord& slide, std::size_t k_primary, double fraction,
                            std::uint64_t seed);

Mosaic build_mosaic_fixed(const SlideRecord& slide, std::size_t k_fixed, std::uint64_t seed);

/// Removes patches whose feature vector is constant (blank-tile surrogate).
SlideRecord drop_constant_patches(SlideRecord slide);

}  // namespace wsisearch
