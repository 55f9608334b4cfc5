#include "wsisearch/core.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>

namespace wsisearch {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::dimension: return "dimension error";
    case ErrorKind::domain: return "domain error";
    case ErrorKind::undefined_similarity: return "undefined similarity";
    case ErrorKind::range: return "range error";
    case ErrorKind::empty_input: return "empty input";
    case ErrorKind::unprocessed_slide: return "unprocessed slide";
    case ErrorKind::unsupported_operation: return "unsupported operation";
    case ErrorKind::undefined_aggregate: return "undefined aggregate";
    case ErrorKind::format: return "format error";
    case ErrorKind::parse: return "parse error";
    case ErrorKind::validation: return "validation error";
  }
  return "error";
}

Barcode::Barcode(std::size_t length)
    : length_(length), words_((length + 63) / 64, 0) {}

Barcode Barcode::from_string(std::string_view bits) {
  Barcode code(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1') {
      code.set(i);
    } else if (bits[i] != '0') {
      throw Error(ErrorKind::parse, "barcode string may only contain 0 and 1");
    }
  }
  return code;
}

bool Barcode::test(std::size_t i) const {
  return (words_[i / 64] >> (i % 64)) & 1u;
}

void Barcode::set(std::size_t i, bool value) {
  const std::uint64_t mask = std::uint64_t{1} << (i % 64);
  if (value) {
    words_[i / 64] |= mask;
  } else {
    words_[i / 64] &= ~mask;
  }
}

std::string Barcode::to_string() const {
  std::string out(length_, '0');
  for (std::size_t i = 0; i < length_; ++i) {
    if (test(i)) out[i] = '1';
  }
  return out;
}

std::string Barcode::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(words_.size() * 16);
  for (std::uint64_t w : words_) {
    for (int shift = 60; shift >= 0; shift -= 4) {
      out.push_back(kDigits[(w >> shift) & 0xF]);
    }
  }
  return out;
}

Barcode Barcode::from_hex(std::string_view hex, std::size_t length) {
  Barcode code(length);
  if (hex.size() != code.words_.size() * 16) {
    throw Error(ErrorKind::format, "barcode hex length does not match bit length");
  }
  for (std::size_t w = 0; w < code.words_.size(); ++w) {
    std::uint64_t value = 0;
    for (std::size_t j = 0; j < 16; ++j) {
      const char c = hex[w * 16 + j];
      int digit;
      if (c >= '0' && c <= '9') {
        digit = c - '0';
      } else if (c >= 'a' && c <= 'f') {
        digit = c - 'a' + 10;
      } else {
        throw Error(ErrorKind::format, "invalid hex digit in barcode");
      }
      value = (value << 4) | static_cast<std::uint64_t>(digit);
    }
    code.words_[w] = value;
  }
  const std::size_t tail = length % 64;
  if (tail != 0 && (code.words_.back() >> tail) != 0) {
    throw Error(ErrorKind::format, "barcode has bits set beyond its length");
  }
  return code;
}

std::string_view to_string(Magnification m) {
  return m == Magnification::x20 ? "20x" : "40x";
}

Magnification parse_magnification(std::string_view text) {
  if (text == "20x" || text == "20") return Magnification::x20;
  if (text == "40x" || text == "40") return Magnification::x40;
  throw Error(ErrorKind::parse, "magnification must be 20x or 40x, got '" + std::string(text) + "'");
}

std::string_view to_string(DistanceKind kind) {
  switch (kind) {
    case DistanceKind::hamming: return "hamming";
    case DistanceKind::cosine: return "cosine";
    case DistanceKind::hypergraph: return "hypergraph";
  }
  return "unknown";
}

int hamming_distance(const Barcode& a, const Barcode& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::dimension,
                "hamming_distance: length mismatch " + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()));
  }
  const auto wa = a.words();
  const auto wb = b.words();
  int count = 0;
  for (std::size_t i = 0; i < wa.size(); ++i) {
    count += std::popcount(wa[i] ^ wb[i]);
  }
  return count;
}

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::dimension, "cosine_similarity: dimension mismatch");
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += double(a[i]) * b[i];
    na += double(a[i]) * a[i];
    nb += double(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) {
    throw Error(ErrorKind::undefined_similarity, "cosine_similarity: zero vector");
  }
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double label_entropy(std::span<const std::string> labels) {
  if (labels.empty()) {
    throw Error(ErrorKind::domain, "label_entropy: empty label multiset");
  }
  std::map<std::string_view, std::size_t> counts;
  for (const auto& label : labels) ++counts[label];
  const double n = static_cast<double>(labels.size());
  double h = 0.0;
  for (const auto& [label, c] : counts) {
    const double p = static_cast<double>(c) / n;
    h -= p * std::log(p);
  }
  return h == 0.0 ? 0.0 : h;  // normalize -0.0
}

Barcode binarize_barcode(std::span<const float> feature) {
  if (feature.size() < 2) {
    throw Error(ErrorKind::dimension, "binarize_barcode: feature length must be at least 2");
  }
  Barcode code(feature.size() - 1);
  for (std::size_t i = 0; i + 1 < feature.size(); ++i) {
    if (feature[i + 1] > feature[i]) code.set(i);
  }
  return code;
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorKind::domain, "median of an empty list");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + mid);
  return (lower + upper) / 2.0;
}

void validate_patches(std::span<const PatchFeature> patches, std::size_t dim) {
  for (std::size_t p = 0; p < patches.size(); ++p) {
    const auto& f = patches[p].feature;
    if (f.size() != dim) {
      throw Error(ErrorKind::dimension, "patch " + std::to_string(p) + " has dimension " +
                                            std::to_string(f.size()) + ", expected " +
                                            std::to_string(dim));
    }
    if (!std::all_of(f.begin(), f.end(), [](float v) { return std::isfinite(v); })) {
      throw Error(ErrorKind::domain, "patch " + std::to_string(p) + " has non-finite components");
    }
  }
}

}  // namespace wsisearch
