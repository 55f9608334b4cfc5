#include "wsisearch/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>

namespace wsisearch {
namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                         static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
  out.write(bytes, 4);
}

std::uint32_t get_u32(std::istream& in, const char* what) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4)) {
    throw Error(ErrorKind::format, std::string("PSF1: truncated file while reading ") + what);
  }
  return std::uint32_t(bytes[0]) | (std::uint32_t(bytes[1]) << 8) |
         (std::uint32_t(bytes[2]) << 16) | (std::uint32_t(bytes[3]) << 24);
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

}  // namespace

void write_features(std::ostream& out, const std::vector<PatchFeature>& patches,
                    std::uint32_t dim) {
  validate_patches(patches, dim);
  out.write(kFeatureMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(patches.size()));
  put_u32(out, dim);
  for (const auto& p : patches) {
    put_u32(out, std::bit_cast<std::uint32_t>(p.x));
    put_u32(out, std::bit_cast<std::uint32_t>(p.y));
    for (float v : p.feature) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  if (!out) throw Error(ErrorKind::format, "PSF1: write failed");
}

void write_features(const std::filesystem::path& path, const std::vector<PatchFeature>& patches,
                    std::uint32_t dim) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::format, "PSF1: cannot open '" + path.string() + "' for writing");
  write_features(out, patches, dim);
}

FeatureFile read_features(std::istream& in, std::optional<std::uint32_t> expected_dim) {
  char magic[4];
  if (!in.read(magic, 4)) throw Error(ErrorKind::format, "PSF1: truncated file while reading magic");
  if (std::memcmp(magic, kFeatureMagic, 4) != 0) throw Error(ErrorKind::format, "PSF1: bad magic");

  FeatureFile file;
  const std::uint32_t n = get_u32(in, "patch count");
  file.dim = get_u32(in, "dimension");
  if (expected_dim && *expected_dim != file.dim) {
    throw Error(ErrorKind::dimension, "PSF1: file dimension " + std::to_string(file.dim) +
                                          " does not match database dimension " +
                                          std::to_string(*expected_dim));
  }
  file.patches.reserve(std::min<std::uint32_t>(n, 1u << 20));
  for (std::uint32_t i = 0; i < n; ++i) {
    PatchFeature p;
    p.x = std::bit_cast<std::int32_t>(get_u32(in, "patch record"));
    p.y = std::bit_cast<std::int32_t>(get_u32(in, "patch record"));
    p.feature.resize(file.dim);
    for (auto& v : p.feature) v = std::bit_cast<float>(get_u32(in, "patch record"));
    file.patches.push_back(std::move(p));
  }
  return file;
}

FeatureFile read_features(const std::filesystem::path& path,
                          std::optional<std::uint32_t> expected_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::format, "PSF1: cannot open '" + path.string() + "'");
  return read_features(in, expected_dim);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else if (c != '\r') {
      current.push_back(c);
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

Manifest parse_manifest(std::istream& in, const std::filesystem::path& base_dir) {
  Manifest manifest;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::set<std::string> ids;
  std::map<std::string, std::string> patients;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || line.front() == '#') continue;
    auto fields = split_csv_line(line);
    for (auto& f : fields) f = trim(f);
    const std::string where = "manifest line " + std::to_string(line_no) + ": ";
    if (!header_seen) {
      header_seen = true;
      if (fields.size() == 6 && fields[0] == "slide_id") continue;
      throw Error(ErrorKind::parse, where + "expected header '" + kManifestHeader + "'");
    }
    if (fields.size() != 6) {
      throw Error(ErrorKind::parse, where + "expected 6 fields, found " + std::to_string(fields.size()));
    }
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (fields[i].empty()) throw Error(ErrorKind::parse, where + "empty field " + std::to_string(i + 1));
    }
    ManifestRow row;
    row.labels.slide_id = fields[0];
    row.labels.patient_id = fields[1];
    row.labels.site = fields[2];
    row.labels.subtype = fields[3];
    try {
      row.labels.magnification = parse_magnification(fields[4]);
    } catch (const Error& e) {
      throw Error(ErrorKind::parse, where + e.what());
    }
    row.features_path = fields[5];
    if (row.features_path.is_relative() && !base_dir.empty()) {
      row.features_path = base_dir / row.features_path;
    }
    if (!ids.insert(row.labels.slide_id).second) {
      throw Error(ErrorKind::parse, where + "duplicate slide_id '" + row.labels.slide_id + "'");
    }
    auto [it, fresh] = patients.emplace(row.labels.patient_id, row.labels.slide_id);
    if (!fresh) {
      manifest.warnings.push_back("slides '" + it->second + "' and '" + row.labels.slide_id +
                                  "' share patient_id '" + row.labels.patient_id + "'");
    }
    manifest.rows.push_back(std::move(row));
  }
  if (!header_seen) throw Error(ErrorKind::parse, "manifest is empty");
  return manifest;
}

Manifest parse_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::parse, "cannot open manifest '" + path.string() + "'");
  return parse_manifest(in, path.parent_path());
}

void write_manifest(std::ostream& out, const std::vector<ManifestRow>& rows,
                    const std::filesystem::path& base_dir) {
  out << kManifestHeader << '\n';
  for (const auto& r : rows) {
    const auto path = base_dir.empty() ? r.features_path
                                       : r.features_path.lexically_relative(base_dir);
    out << r.labels.slide_id << ',' << r.labels.patient_id << ',' << r.labels.site << ','
        << r.labels.subtype << ',' << to_string(r.labels.magnification) << ','
        << path.generic_string() << '\n';
  }
}

std::vector<SlideRecord> load_slides(const Manifest& manifest, std::uint32_t* dim) {
  std::vector<SlideRecord> slides;
  std::optional<std::uint32_t> expected;
  for (const auto& row : manifest.rows) {
    FeatureFile file = read_features(row.features_path, expected);
    expected = file.dim;
    validate_patches(file.patches, file.dim);
    slides.push_back({row.labels, std::move(file.patches)});
  }
  if (dim != nullptr) *dim = expected.value_or(0);
  return slides;
}

}  // namespace wsisearch
