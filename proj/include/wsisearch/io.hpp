#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wsisearch/core.hpp"

namespace wsisearch {

// PSF1 patch feature files, little-endian:
//   "PSF1" | u32 n_patches | u32 dim | n_patches x (i32 x, i32 y, dim x f32)
inline constexpr char kFeatureMagic[4] = {'P', 'S', 'F', '1'};

struct FeatureFile {
  std::uint32_t dim = 0;
  std::vector<PatchFeature> patches;
};

void write_features(std::ostream& out, const std::vector<PatchFeature>& patches,
                    std::uint32_t dim);
void write_features(const std::filesystem::path& path, const std::vector<PatchFeature>& patches,
                    std::uint32_t dim);

/// Throws ErrorKind::format on bad magic or truncation, and ErrorKind::dimension
/// when `expected_dim` is given and differs from the header.
FeatureFile read_features(std::istream& in, std::optional<std::uint32_t> expected_dim = {});
FeatureFile read_features(const std::filesystem::path& path,
                          std::optional<std::uint32_t> expected_dim = {});

struct ManifestRow {
  SlideLabels labels;
  std::filesystem::path features_path;  // resolved against the manifest directory
};

struct Manifest {
  std::vector<ManifestRow> rows;
  std::vector<std::string> warnings;
};

inline constexpr char kManifestHeader[] =
    "slide_id,patient_id,site,subtype,magnification,features_path";

/// CSV with the header above. Duplicate slide ids and malformed rows throw
/// ErrorKind::parse naming the line; repeated patient ids only warn.
Manifest parse_manifest(std::istream& in, const std::filesystem::path& base_dir = {});
Manifest parse_manifest(const std::filesystem::path& path);

void write_manifest(std::ostream& out, const std::vector<ManifestRow>& rows,
                    const std::filesystem::path& base_dir = {});

/// Loads every slide listed in the manifest; all feature files must share one
/// dimension, returned through `dim`.
std::vector<SlideRecord> load_slides(const Manifest& manifest, std::uint32_t* dim = nullptr);

/// Minimal CSV field splitting (no quoting; fields must not contain commas).
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace wsisearch
