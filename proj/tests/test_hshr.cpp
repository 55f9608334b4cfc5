#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "wsisearch/hshr.hpp"

using namespace wsisearch;
using namespace wsisearch::hshr;

namespace {

SlideLabels labels(const std::string& id) {
  return {id, "p_" + id, "brain", "gbm", Magnification::x20};
}

SlideSignature signature(const std::string& id, const std::string& hash) {
  SlideSignature s;
  s.slide_id = id;
  s.centroid_hashes = {Barcode::from_string(hash)};
  s.attention = {1.0};
  s.slide_hash = Barcode::from_string(hash);
  return s;
}

std::string random_bits(std::mt19937_64& rng, std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += char('0' + rng() % 2);
  return s;
}

Hypergraph random_graph(std::size_t n, std::size_t bits, std::uint64_t seed,
                        std::vector<std::string>* hashes = nullptr) {
  std::mt19937_64 rng(seed);
  std::vector<SlideSignature> sigs;
  std::vector<SlideLabels> ls;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string id = "s" + std::to_string(1000 + i);
    const std::string h = random_bits(rng, bits);
    if (hashes) hashes->push_back(h);
    sigs.push_back(signature(id, h));
    ls.push_back(labels(id));
  }
  return build_hypergraph(std::move(sigs), std::move(ls), 10);
}

}  // namespace

TEST(Signature, IdenticalPatchesOneCentroid) {
  Mosaic m;
  m.slide_id = "s";
  m.members = {{0, 0, {1, 3, 2}}};
  m.populations = {7};
  const auto s = slide_signature(m);
  ASSERT_EQ(s.attention.size(), 1u);
  EXPECT_DOUBLE_EQ(s.attention[0], 1.0);
  EXPECT_EQ(s.slide_hash.to_string(), "10");
}

TEST(Signature, AttentionFollowsPopulation) {
  Mosaic m;
  m.members = {{0, 0, {0, 1}}, {1, 0, {4, 1}}};
  m.populations = {3, 1};
  const auto s = slide_signature(m);
  EXPECT_DOUBLE_EQ(s.attention[0], 0.75);
  EXPECT_DOUBLE_EQ(s.attention[1], 0.25);
  // Weighted mean (1, 1): no ascent.
  EXPECT_EQ(s.slide_hash.to_string(), "0");
  EXPECT_EQ(s.centroid_hashes[0].to_string(), "1");
}

TEST(Signature, EmptyMosaicUnprocessed) {
  try {
    slide_signature(Mosaic{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::unprocessed_slide);
  }
}

TEST(Hypergraph, SingleVertexSelfLoop) {
  const auto g = build_hypergraph({signature("a", "1010")}, {labels("a")}, 10);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_DOUBLE_EQ(g.incidence(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(g.edge_weight(0), 1.0);
}

TEST(Hypergraph, IdenticalSlidesMutual) {
  const auto g = build_hypergraph({signature("a", "1010"), signature("b", "1010")},
                                  {labels("a"), labels("b")}, 10);
  EXPECT_DOUBLE_EQ(g.affinity(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(g.incidence(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(g.incidence(1, 0), 1.0);
}

TEST(Hypergraph, IncidenceInvariants) {
  std::vector<std::string> hashes;
  const auto g = random_graph(40, 64, 3, &hashes);
  for (std::size_t s = 0; s < g.size(); ++s) {
    EXPECT_DOUBLE_EQ(g.incidence(s, s), 1.0);
    std::size_t members = 0;
    double sum = 0.0;
    for (std::size_t t = 0; t < g.size(); ++t) {
      EXPECT_DOUBLE_EQ(g.affinity(s, t), g.affinity(t, s));
      const double h = g.incidence(t, s);
      EXPECT_GE(h, 0.0);
      EXPECT_LE(h, 1.0);
      if (h > 0.0) {
        ++members;
        sum += h;
        EXPECT_DOUBLE_EQ(h, g.affinity(s, t));
      }
    }
    EXPECT_GE(members, 11u);
    EXPECT_NEAR(g.edge_weight(s), sum / double(members), 1e-12);
  }
}

TEST(Hypergraph, QueryIdenticalToSlideRanksItFirst) {
  std::vector<std::string> hashes;
  const auto g = random_graph(60, 128, 8, &hashes);
  for (std::size_t i = 0; i < g.size(); i += 7) {
    const auto r = g.query_similarity(signature("q", hashes[i]), 5, 1.0, 1.0);
    ASSERT_FALSE(r.entries.empty());
    EXPECT_EQ(r.entries[0].target_id, g.labels()[i].slide_id);
  }
}

TEST(Hypergraph, FarQueryValidOrdering) {
  const auto g = random_graph(30, 32, 5);
  const auto r = g.query_similarity(signature("q", std::string(32, '0')), 30, 1.0, 1.0);
  ASSERT_EQ(r.entries.size(), 30u);
  for (std::size_t i = 0; i + 1 < r.entries.size(); ++i) {
    EXPECT_TRUE(std::isfinite(r.entries[i].score));
    const auto& a = r.entries[i];
    const auto& b = r.entries[i + 1];
    EXPECT_TRUE(a.score > b.score || (a.score == b.score && a.target_id < b.target_id));
  }
}

TEST(Hypergraph, ExclusionAndDeterminism) {
  std::vector<std::string> hashes;
  const auto g = random_graph(30, 64, 9, &hashes);
  const auto q = signature("q", hashes[4]);
  const auto a = g.query_similarity(q, 10, 1.0, 1.0, {g.labels()[4].slide_id});
  const auto b = g.query_similarity(q, 10, 1.0, 1.0, {g.labels()[4].slide_id});
  ASSERT_EQ(a.entries.size(), 10u);
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    EXPECT_NE(a.entries[i].target_id, g.labels()[4].slide_id);
    EXPECT_EQ(a.entries[i].target_id, b.entries[i].target_id);
    EXPECT_EQ(a.entries[i].score, b.entries[i].score);
  }
}

TEST(Hypergraph, PatchQueryUnsupported) {
  try {
    query_patches();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::unsupported_operation);
    EXPECT_NE(std::string(e.what()).find("hshr"), std::string::npos);
  }
}
