#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "wsisearch/core.hpp"

using namespace wsisearch;

TEST(Hamming, Examples) {
  EXPECT_EQ(hamming_distance(Barcode::from_string("1010"), Barcode::from_string("1010")), 0);
  EXPECT_EQ(hamming_distance(Barcode::from_string("1010"), Barcode::from_string("0110")), 2);
  EXPECT_EQ(hamming_distance(Barcode::from_string("1111"), Barcode::from_string("0000")), 4);
}

TEST(Hamming, LengthMismatchThrows) {
  try {
    hamming_distance(Barcode::from_string("10"), Barcode::from_string("101"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::dimension);
  }
}

TEST(Hamming, MatchesBitLoopAcrossWordBoundaries) {
  std::mt19937_64 rng(3);
  for (std::size_t len : {1u, 63u, 64u, 65u, 130u, 1023u}) {
    std::string a, b;
    for (std::size_t i = 0; i < len; ++i) {
      a += char('0' + rng() % 2);
      b += char('0' + rng() % 2);
    }
    int want = 0;
    for (std::size_t i = 0; i < len; ++i) want += a[i] != b[i];
    EXPECT_EQ(hamming_distance(Barcode::from_string(a), Barcode::from_string(b)), want);
  }
}

TEST(Barcode, StringAndHexRoundTrip) {
  const std::string bits = "1011000111010101010101010101010101010101010101010101010101010101011";
  const Barcode b = Barcode::from_string(bits);
  EXPECT_EQ(b.size(), bits.size());
  EXPECT_EQ(b.to_string(), bits);
  EXPECT_EQ(Barcode::from_hex(b.to_hex(), b.size()), b);
  EXPECT_THROW(Barcode::from_string("10x"), Error);
}

TEST(Cosine, Examples) {
  const std::vector<float> v = {0.3f, -1.2f, 4.0f};
  EXPECT_NEAR(cosine_similarity(v, v), 1.0, 1e-12);
  EXPECT_NEAR(cosine_similarity(std::vector<float>{1, 0}, std::vector<float>{0, 1}), 0.0, 1e-12);
  EXPECT_NEAR(cosine_similarity(std::vector<float>{1, 1}, std::vector<float>{1, 0}),
              1.0 / std::sqrt(2.0), 1e-9);
}

TEST(Cosine, Errors) {
  try {
    cosine_similarity(std::vector<float>{0, 0}, std::vector<float>{1, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::undefined_similarity);
  }
  try {
    cosine_similarity(std::vector<float>{1}, std::vector<float>{1, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::dimension);
  }
}

TEST(Entropy, Examples) {
  const std::vector<std::string> one = {"A", "A", "A"};
  const std::vector<std::string> four = {"A", "B", "C", "D"};
  const std::vector<std::string> two = {"A", "A", "B", "B"};
  EXPECT_NEAR(label_entropy(one), 0.0, 1e-12);
  EXPECT_NEAR(label_entropy(four), std::log(4.0), 1e-12);
  EXPECT_NEAR(label_entropy(four), 1.3863, 1e-4);
  EXPECT_NEAR(label_entropy(two), 0.6931, 1e-4);
  EXPECT_THROW(label_entropy(std::vector<std::string>{}), Error);
}

TEST(Binarize, Examples) {
  EXPECT_EQ(binarize_barcode(std::vector<float>{0.1f, 0.5f, 0.3f}).to_string(), "10");
  EXPECT_EQ(binarize_barcode(std::vector<float>(5, 2.0f)).to_string(), "0000");
  EXPECT_EQ(binarize_barcode(std::vector<float>{1, 2, 3, 4}).to_string(), "111");
}

TEST(Binarize, LengthIsDimMinusOne) {
  std::mt19937 rng(1);
  std::normal_distribution<float> n;
  std::vector<float> f(1024);
  for (auto& v : f) v = n(rng);
  const Barcode b = binarize_barcode(f);
  ASSERT_EQ(b.size(), 1023u);
  for (std::size_t i = 0; i < b.size(); ++i) EXPECT_EQ(b.test(i), f[i + 1] > f[i]);
}

TEST(Median, OddAndEven) {
  EXPECT_DOUBLE_EQ(median({3, 1, 2}), 2.0);
  EXPECT_DOUBLE_EQ(median({1, 4, 9, 10}), 6.5);
  EXPECT_THROW(median({}), Error);
}

TEST(ValidatePatches, RejectsWrongDimAndNonFinite) {
  std::vector<PatchFeature> ok = {{0, 0, {1, 2}}, {1, 0, {3, 4}}};
  EXPECT_NO_THROW(validate_patches(ok, 2));
  EXPECT_THROW(validate_patches(ok, 3), Error);
  ok[1].feature[0] = std::nanf("");
  EXPECT_THROW(validate_patches(ok, 2), Error);
}

TEST(Magnification, ParseRoundTrip) {
  EXPECT_EQ(parse_magnification(to_string(Magnification::x40)), Magnification::x40);
  EXPECT_EQ(parse_magnification("20x"), Magnification::x20);
  EXPECT_THROW(parse_magnification("10x"), Error);
}
