#include <gtest/gtest.h>

#include <algorithm>

#include "wsisearch/sish.hpp"

using namespace wsisearch;
using namespace wsisearch::sish;

namespace {

FeatureStats unit_stats(std::size_t dim) {
  return {std::vector<float>(dim, 0.0f), std::vector<float>(dim, 255.0f)};
}

SlideLabels labels(const std::string& id, const std::string& subtype) {
  return {id, "p_" + id, "lung", subtype, Magnification::x20};
}

Mosaic flat_mosaic(const std::string& id, std::initializer_list<float> levels, std::size_t dim) {
  Mosaic m;
  m.slide_id = id;
  int x = 0;
  for (float v : levels) {
    m.members.push_back({x++, 0, std::vector<float>(dim, v)});
    m.populations.push_back(1);
  }
  return m;
}

constexpr std::uint64_t kAllDigits = 0x010101010101ull;

}  // namespace

TEST(IndexEncode, ZeroAndSaturation) {
  const auto stats = unit_stats(12);
  EXPECT_EQ(index_encode(std::vector<float>(12, 0.0f), stats), 0u);
  EXPECT_EQ(index_encode(std::vector<float>(12, 255.0f), stats), (std::uint64_t{1} << 48) - 1);
  EXPECT_EQ(index_encode(std::vector<float>(12, 300.0f), stats), (std::uint64_t{1} << 48) - 1);
}

TEST(IndexEncode, DigitLayout) {
  // Quantized vector [0..5] * 10: whole mean 25, halves 10/40, thirds 5/25/45.
  const auto stats = unit_stats(6);
  const std::vector<float> f = {0, 10, 20, 30, 40, 50};
  const std::uint64_t want = (25ull << 40) | (10ull << 32) | (40ull << 24) | (5ull << 16) |
                             (25ull << 8) | 45ull;
  EXPECT_EQ(index_encode(f, stats), want);
}

TEST(IndexEncode, PadsWithLastComponent) {
  // Length 4 pads to [0, 0, 0, 60, 60, 60].
  const auto stats = unit_stats(4);
  const std::vector<float> f = {0, 0, 0, 60};
  const std::uint64_t want = (30ull << 40) | (0ull << 32) | (60ull << 24) | (0ull << 16) |
                             (30ull << 8) | 60ull;
  EXPECT_EQ(index_encode(f, stats), want);
}

TEST(IndexEncode, NearbyFeaturesShareIndex) {
  FeatureStats stats{std::vector<float>(8, -1.0f), std::vector<float>(8, 1.0f)};
  std::vector<float> a = {0.1f, -0.3f, 0.5f, 0.9f, -0.9f, 0.0f, 0.2f, 0.4f};
  std::vector<float> b = a;
  for (auto& v : b) v += 0.0005f;  // well under one step of 2/255
  EXPECT_EQ(index_encode(a, stats), index_encode(b, stats));
}

TEST(IndexEncode, DimensionMismatch) {
  EXPECT_THROW(index_encode(std::vector<float>(3, 0.f), unit_stats(4)), Error);
}

TEST(GuidedSearch, VisitsNeighboursBeforeFarKeys) {
  const std::size_t dim = 6;
  Database db(dim, Config{}, unit_stats(dim));
  db.add(labels("a", "x"), flat_mosaic("a", {100}, dim));
  db.add(labels("b", "x"), flat_mosaic("b", {105}, dim));
  db.add(labels("c", "x"), flat_mosaic("c", {200}, dim));
  const Entry q = db.make_entry({0, 0, std::vector<float>(dim, 101)});
  EXPECT_EQ(q.index, 101 * kAllDigits);
  const auto r = db.guided_search(q);
  auto pos = [&](std::uint64_t level) {
    return std::find(r.visited.begin(), r.visited.end(), level * kAllDigits) - r.visited.begin();
  };
  ASSERT_EQ(r.visited.size(), 3u);
  EXPECT_LT(pos(100), pos(200));
  EXPECT_LT(pos(105), pos(200));
  EXPECT_LE(r.probes, Config{}.probe_budget);
}

TEST(GuidedSearch, IdenticalEntryFirstAndBudgetRespected) {
  const std::size_t dim = 16;
  Database db(dim, Config{}, unit_stats(dim));
  Mosaic m;
  for (int i = 0; i < 40; ++i) {
    std::vector<float> f(dim);
    for (std::size_t d = 0; d < dim; ++d) f[d] = float((i * 37 + d * 11 * (i % 5 + 1)) % 256);
    m.members.push_back({i, 0, f});
  }
  db.add(labels("s", "x"), m);
  const Entry q = db.make_entry(m.members[17]);
  const auto r = db.guided_search(q);
  ASSERT_FALSE(r.matches.empty());
  EXPECT_EQ(r.matches[0].hamming, 0);
  EXPECT_EQ(r.matches[0].entry->ordinal, 17);
  EXPECT_EQ(db.guided_search(q, 3).probes, 3u);
  EXPECT_TRUE(db.guided_search(q, 0).matches.empty());
}

TEST(GuidedSearch, ThresholdFiltersEverything) {
  const std::size_t dim = 300;
  Database db(dim, Config{}, unit_stats(dim));
  std::vector<float> up(dim), down(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    up[d] = float(d % 200);
    down[d] = float(200 - d % 200);
  }
  Mosaic m;
  m.members.push_back({0, 0, down});
  db.add(labels("s", "x"), m);
  const auto r = db.guided_search(db.make_entry({0, 0, up}));
  EXPECT_EQ(r.visited.size(), 1u);
  EXPECT_TRUE(r.matches.empty());
  EXPECT_TRUE(db.query_patches({0, 0, up}, 5).entries.empty());
  Mosaic qm;
  qm.members.push_back({0, 0, up});
  EXPECT_TRUE(db.query_slides(qm, 5).entries.empty());
}

TEST(GuidedSearch, HammingBoundHolds) {
  const std::size_t dim = 400;
  Database db(dim, Config{}, unit_stats(dim));
  Mosaic m;
  for (int i = 0; i < 60; ++i) {
    std::vector<float> f(dim);
    for (std::size_t d = 0; d < dim; ++d) f[d] = float((d * (i + 3) * 7919 + i) % 256);
    m.members.push_back({i, 0, f});
  }
  db.add(labels("s", "x"), m);
  for (const auto& p : m.members) {
    const Entry q = db.make_entry(p);
    for (const auto& match : db.guided_search(q).matches) {
      EXPECT_LE(match.hamming, 128);
      EXPECT_EQ(match.hamming, hamming_distance(q.code, match.entry->code));
    }
  }
}

TEST(GuidedSearch, ExclusionRemovesSlide) {
  const std::size_t dim = 6;
  Database db(dim, Config{}, unit_stats(dim));
  db.add(labels("a", "x"), flat_mosaic("a", {100}, dim));
  db.add(labels("b", "x"), flat_mosaic("b", {100}, dim));
  const auto r = db.guided_search(db.make_entry({0, 0, std::vector<float>(dim, 100)}), 500, {"a"});
  ASSERT_EQ(r.matches.size(), 1u);
  EXPECT_EQ(r.matches[0].entry->slide_id, "b");
}

TEST(RankSlides, SingleMatchWeightOne) {
  std::map<std::string, SlideLabels> l = {{"a", labels("a", "x")}};
  Entry e;
  e.slide_id = "a";
  const std::vector<std::vector<Match>> results = {{{&e, 0}}};
  const auto r = rank_slides(results, l, 5);
  ASSERT_EQ(r.entries.size(), 1u);
  EXPECT_EQ(r.entries[0].target_id, "a");
  EXPECT_DOUBLE_EQ(r.entries[0].score, 1.0);
}

TEST(RankSlides, RarerSubtypeWinsEqualRawVotes) {
  std::map<std::string, SlideLabels> l = {
      {"b1", labels("b1", "common")}, {"b2", labels("b2", "common")}, {"z", labels("z", "rare")}};
  Entry eb, ez;
  eb.slide_id = "b1";
  ez.slide_id = "z";
  const std::vector<std::vector<Match>> results = {{{&eb, 3}, {&ez, 3}}};
  const auto r = rank_slides(results, l, 5);
  ASSERT_EQ(r.entries.size(), 2u);
  EXPECT_EQ(r.entries[0].target_id, "z");
  EXPECT_EQ(r.entries[1].target_id, "b1");
  EXPECT_NEAR(r.entries[0].score / r.entries[1].score, 2.0, 1e-12);
}

TEST(RankSlides, HighEntropyPatchesDiscarded) {
  std::map<std::string, SlideLabels> l = {{"a", labels("a", "x")}, {"b", labels("b", "y")}};
  Entry ea, eb;
  ea.slide_id = "a";
  eb.slide_id = "b";
  // Entropies 0, 0, ln2: the mixed patch is above the median and is dropped.
  const std::vector<std::vector<Match>> results = {{{&ea, 0}}, {{&ea, 1}}, {{&ea, 0}, {&eb, 0}}};
  const auto r = rank_slides(results, l, 5);
  ASSERT_EQ(r.entries.size(), 1u);
  EXPECT_EQ(r.entries[0].target_id, "a");
}

TEST(RankSlides, NoSurvivorsGivesEmptyResult) {
  std::map<std::string, SlideLabels> l = {{"a", labels("a", "x")}};
  const std::vector<std::vector<Match>> results = {{}, {}};
  EXPECT_TRUE(rank_slides(results, l, 5).entries.empty());
}
