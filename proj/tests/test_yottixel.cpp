#include <gtest/gtest.h>

#include "wsisearch/yottixel.hpp"

using namespace wsisearch;
using namespace wsisearch::yottixel;

namespace {

BagOfBarcodes bob(const std::string& id, const std::vector<std::string>& codes) {
  BagOfBarcodes b;
  b.slide_id = id;
  int x = 0;
  for (const auto& c : codes) b.barcodes.push_back({Barcode::from_string(c), x++, 0});
  return b;
}

SlideLabels labels(const std::string& id, const std::string& site = "brain") {
  return {id, "p_" + id, site, site + "_t0", Magnification::x20};
}

}  // namespace

TEST(IndexMosaic, OneBarcodePerMember) {
  Mosaic m;
  m.slide_id = "s";
  m.members = {{0, 0, {1, 2, 3}}, {1, 0, {3, 2, 1}}, {2, 0, {1, 3, 2}}};
  const auto b = index_mosaic(m);
  ASSERT_EQ(b.size(), 3u);
  EXPECT_EQ(b.barcodes[0].code.to_string(), "11");
  EXPECT_EQ(b.barcodes[1].code.to_string(), "00");
  EXPECT_EQ(b.barcodes[2].code.to_string(), "10");
}

TEST(IndexMosaic, DuplicatePatchesKept) {
  Mosaic m;
  m.members = {{0, 0, {1, 2}}, {1, 0, {1, 2}}};
  const auto b = index_mosaic(m);
  ASSERT_EQ(b.size(), 2u);
  EXPECT_EQ(b.barcodes[0].code, b.barcodes[1].code);
}

TEST(IndexMosaic, EmptyMosaicIsUnprocessed) {
  try {
    index_mosaic(Mosaic{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::unprocessed_slide);
  }
}

TEST(BobDistance, Basics) {
  const auto a = bob("a", {"1100", "0011", "1010"});
  EXPECT_DOUBLE_EQ(bob_distance(a, a), 0.0);
  EXPECT_DOUBLE_EQ(bob_distance(bob("q", {"1100"}), bob("t", {"0101"})), 2.0);
}

TEST(BobDistance, EvenCountMedian) {
  // Per-query minima 1, 4, 9, 10 against a single all-zero target barcode.
  const auto q = bob("q", {"1000000000", "1111000000", "1111111110", "1111111111"});
  const auto t = bob("t", {"0000000000"});
  EXPECT_DOUBLE_EQ(bob_distance(q, t), 6.5);
}

TEST(BobDistance, NotSymmetric) {
  const auto q = bob("q", {"0000"});
  const auto t = bob("t", {"0000", "1111", "1110"});
  EXPECT_DOUBLE_EQ(bob_distance(q, t), 0.0);
  EXPECT_DOUBLE_EQ(bob_distance(t, q), 3.0);
}

TEST(Database, CloneRankedFirstAndTiesById) {
  Database db(5);
  db.add(labels("c"), bob("c", {"1111"}));
  db.add(labels("b"), bob("b", {"0000"}));
  db.add(labels("a"), bob("a", {"1111"}));
  db.add(labels("d"), bob("d", {"0111"}));
  const auto r = db.query_slides(bob("q", {"1111"}), 3);
  ASSERT_EQ(r.entries.size(), 3u);
  EXPECT_EQ(r.entries[0].target_id, "a");
  EXPECT_EQ(r.entries[1].target_id, "c");
  EXPECT_EQ(r.entries[2].target_id, "d");
  EXPECT_DOUBLE_EQ(r.entries[0].score, 0.0);
  EXPECT_DOUBLE_EQ(r.entries[2].score, 1.0);

  const auto ex = db.query_slides(bob("q", {"1111"}), 3, {"a"});
  EXPECT_EQ(ex.entries[0].target_id, "c");
}

TEST(Database, PatchQuery) {
  Database db(5);
  db.add(labels("a"), bob("a", {"0000", "1111"}));
  db.add(labels("b"), bob("b", {"1110"}));
  const auto r = db.query_patches(Barcode::from_string("1111"), 5);
  ASSERT_EQ(r.entries.size(), 3u);
  EXPECT_EQ(r.entries[0].target_id, "a");
  EXPECT_EQ(r.entries[0].patch_ordinal, 1);
  EXPECT_EQ(r.entries[0].score, 0.0);
  EXPECT_EQ(r.entries[1].target_id, "b");
  EXPECT_EQ(r.entries[2].score, 4.0);
}

TEST(Database, DuplicateSlideRejected) {
  Database db(5);
  db.add(labels("a"), bob("a", {"0000"}));
  EXPECT_THROW(db.add(labels("a"), bob("a", {"0000"})), Error);
}
