#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace wsisearch {

enum class ErrorKind {
  dimension,
  domain,
  undefined_similarity,
  range,
  empty_input,
  unprocessed_slide,
  unsupported_operation,
  undefined_aggregate,
  format,
  parse,
  validation,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` drives CLI exit codes and
/// report rendering.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct PatchFeature {
  std::int32_t x = 0;
  std::int32_t y = 0;
  std::vector<float> feature;

  bool operator==(const PatchFeature&) const = default;
};

/// Fixed-length bit string packed into 64-bit words, bit i of the string at
/// word i/64, position i%64. Unused tail bits are always zero.
class Barcode {
 public:
  Barcode() = default;
  explicit Barcode(std::size_t length);

  static Barcode from_string(std::string_view bits);

  std::size_t size() const noexcept { return length_; }
  bool test(std::size_t i) const;
  void set(std::size_t i, bool value = true);

  std::span<const std::uint64_t> words() const noexcept { return words_; }

  std::string to_string() const;
  std::string to_hex() const;
  static Barcode from_hex(std::string_view hex, std::size_t length);

  bool operator==(const Barcode&) const = default;

 private:
  std::size_t length_ = 0;
  std::vector<std::uint64_t> words_;
};

enum class Magnification { x20, x40 };

std::string_view to_string(Magnification m);
Magnification parse_magnification(std::string_view text);

struct SlideLabels {
  std::string slide_id;
  std::string patient_id;
  std::string site;
  std::string subtype;
  Magnification magnification = Magnification::x20;
};

struct SlideRecord {
  SlideLabels labels;
  std::vector<PatchFeature> patches;

  const std::string& slide_id() const { return labels.slide_id; }
};

enum class DistanceKind { hamming, cosine, hypergraph };

std::string_view to_string(DistanceKind kind);

/// Slides a query must never return (self-exclusion by patient).
using SlideIdSet = std::unordered_set<std::string>;

struct RetrievalEntry {
  std::string target_id;
  std::string target_site;
  std::string target_subtype;
  double score = 0.0;
  DistanceKind distance_kind = DistanceKind::hamming;
  // Patch ordinal within the target slide's mosaic; -1 for slide-level hits.
  int patch_ordinal = -1;
};

struct RetrievalResult {
  std::vector<RetrievalEntry> entries;
  std::size_t k_requested = 0;
};

int hamming_distance(const Barcode& a, const Barcode& b);

double cosine_similarity(std::span<const float> a, std::span<const float> b);

/// Shannon entropy (natural log) of the empirical label distribution.
double label_entropy(std::span<const std::string> labels);

/// Bit i is set when feature[i + 1] > feature[i].
Barcode binarize_barcode(std::span<const float> feature);

/// Median of a non-empty list; the mean of the two middle values for even
/// counts.
double median(std::vector<double> values);

/// Checks that every patch has `dim` finite components.
void validate_patches(std::span<const PatchFeature> patches, std::size_t dim);

}  // namespace wsisearch
