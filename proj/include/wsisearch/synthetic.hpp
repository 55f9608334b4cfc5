#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "wsisearch/core.hpp"
#include "wsisearch/io.hpp"

namespace wsisearch {

/// Desk-scale stand-in for a labelled slide collection. Subtype j belongs to
/// site j % n_sites; every site has at least one subtype.
struct SyntheticSpec {
  std::size_t n_sites = 5;
  std::size_t n_subtypes = 8;
  std::size_t slides_per_subtype = 10;
  std::size_t patches_per_slide = 100;
  std::size_t dim = 1024;
  double separation = 1.0;  // scale of the site and subtype mean vectors
  double sigma = 0.1;       // per-component patch noise
  std::uint64_t seed = 7;
};

void validate(const SyntheticSpec& spec);

/// Patch features ~ Normal(site_mean + subtype_mean, sigma^2 I), means drawn
/// from a seeded unit Gaussian scaled by `separation`. Patches sit on a square
/// grid in row-major order. Slide ids are zero-padded so lexical order matches
/// generation order.
std::vector<SlideRecord> synth_generate(const SyntheticSpec& spec);

/// Writes one PSF1 file per slide under `dir/features` and `dir/manifest.csv`.
Manifest synth_write(const SyntheticSpec& spec, const std::filesystem::path& dir);

}  // namespace wsisearch
