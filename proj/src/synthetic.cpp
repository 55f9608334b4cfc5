#include "wsisearch/synthetic.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

namespace wsisearch {
namespace {

constexpr std::array<const char*, 5> kSiteNames = {"brain", "lung", "liver", "breast", "colon"};

std::string site_name(std::size_t i) {
  if (i < kSiteNames.size()) return kSiteNames[i];
  return "site" + std::to_string(i);
}

std::string padded(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%05zu", prefix, i);
  return buf;
}

}  // namespace

void validate(const SyntheticSpec& spec) {
  if (spec.n_sites == 0 || spec.n_subtypes == 0 || spec.slides_per_subtype == 0 ||
      spec.patches_per_slide == 0 || spec.dim == 0) {
    throw Error(ErrorKind::validation, "synthetic spec: all counts must be at least 1");
  }
  if (spec.n_subtypes < spec.n_sites) {
    throw Error(ErrorKind::validation, "synthetic spec: need at least one subtype per site");
  }
  if (spec.dim < 2) throw Error(ErrorKind::validation, "synthetic spec: dim must be at least 2");
  if (!(spec.sigma > 0.0) || !(spec.separation > 0.0)) {
    throw Error(ErrorKind::validation, "synthetic spec: sigma and separation must be positive");
  }
}

std::vector<SlideRecord> synth_generate(const SyntheticSpec& spec) {
  validate(spec);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> unit(0.0, 1.0);

  auto draw_mean = [&] {
    std::vector<double> v(spec.dim);
    for (auto& x : v) x = spec.separation * unit(rng);
    return v;
  };
  std::vector<std::vector<double>> site_means;
  for (std::size_t s = 0; s < spec.n_sites; ++s) site_means.push_back(draw_mean());
  std::vector<std::vector<double>> subtype_means;
  for (std::size_t t = 0; t < spec.n_subtypes; ++t) subtype_means.push_back(draw_mean());

  const auto side = static_cast<std::size_t>(
      std::ceil(std::sqrt(static_cast<double>(spec.patches_per_slide))));

  std::vector<SlideRecord> slides;
  slides.reserve(spec.n_subtypes * spec.slides_per_subtype);
  std::size_t slide_no = 0;
  for (std::size_t t = 0; t < spec.n_subtypes; ++t) {
    const std::size_t site = t % spec.n_sites;
    const std::string site_label = site_name(site);
    const std::string subtype_label = site_label + "_t" + std::to_string(t / spec.n_sites);
    for (std::size_t j = 0; j < spec.slides_per_subtype; ++j, ++slide_no) {
      SlideRecord slide;
      slide.labels.slide_id = padded("s", slide_no);
      slide.labels.patient_id = padded("p", slide_no);
      slide.labels.site = site_label;
      slide.labels.subtype = subtype_label;
      slide.labels.magnification = slide_no % 2 == 0 ? Magnification::x20 : Magnification::x40;
      slide.patches.reserve(spec.patches_per_slide);
      for (std::size_t p = 0; p < spec.patches_per_slide; ++p) {
        PatchFeature patch;
        patch.x = static_cast<std::int32_t>(p % side);
        patch.y = static_cast<std::int32_t>(p / side);
        patch.feature.resize(spec.dim);
        for (std::size_t d = 0; d < spec.dim; ++d) {
          patch.feature[d] = static_cast<float>(site_means[site][d] + subtype_means[t][d] +
                                                spec.sigma * unit(rng));
        }
        slide.patches.push_back(std::move(patch));
      }
      slides.push_back(std::move(slide));
    }
  }
  return slides;
}

Manifest synth_write(const SyntheticSpec& spec, const std::filesystem::path& dir) {
  const auto slides = synth_generate(spec);
  std::filesystem::create_directories(dir / "features");
  Manifest manifest;
  for (const auto& slide : slides) {
    ManifestRow row;
    row.labels = slide.labels;
    row.features_path = dir / "features" / (slide.slide_id() + ".psf1");
    write_features(row.features_path, slide.patches, static_cast<std::uint32_t>(spec.dim));
    manifest.rows.push_back(std::move(row));
  }
  std::ofstream out(dir / "manifest.csv");
  write_manifest(out, manifest.rows, dir);
  if (!out) throw Error(ErrorKind::format, "cannot write manifest in '" + dir.string() + "'");
  return manifest;
}

}  // namespace wsisearch
