#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "kimatch/embed.hpp"
#include "kimatch/error.hpp"
#include "test_support.hpp"

using namespace kimatch;
using namespace kimatch::embed;

namespace {

double norm(const std::vector<double>& v) { return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0)); }

}  // namespace

TEST(Cosine, HandComputedValue) {
  const std::vector<double> u{1, 2, 2}, v{2, 1, 2};
  EXPECT_DOUBLE_EQ(cosine(u, v), 8.0 / 9.0);
}

TEST(Cosine, OrthogonalAndParallel) {
  const std::vector<double> e1{1, 0, 0}, e2{0, 1, 0}, s{3, 0, 0}, n{-2, 0, 0};
  EXPECT_EQ(cosine(e1, e2), 0.0);
  EXPECT_DOUBLE_EQ(cosine(e1, s), 1.0);
  EXPECT_DOUBLE_EQ(cosine(e1, n), -1.0);
}

TEST(Cosine, Errors) {
  const std::vector<double> a{1, 2}, b{1, 2, 3}, z{0, 0};
  try {
    cosine(a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
  try {
    cosine(a, z);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroVector);
  }
}

TEST(HashedEmbedder, EmptyTextIsFlaggedZero) {
  const HashedEmbedder emb;
  const auto e = emb.embed("");
  EXPECT_TRUE(e.empty);
  EXPECT_EQ(e.values.size(), HashedEmbedder::kDimension);
  EXPECT_EQ(norm(e.values), 0.0);
  EXPECT_EQ(e.provider, "hashed-v1");
}

TEST(HashedEmbedder, DeterministicUnitVectors) {
  const auto& emb = testkit::resources().embedder();
  const auto a = emb.embed("I feel anxious since the lockdown started");
  const auto b = emb.embed("I feel anxious since the lockdown started");
  EXPECT_EQ(a.values, b.values);
  EXPECT_NEAR(norm(a.values), 1.0, 1e-12);
  EXPECT_EQ(emb.dimension(), 256u);
}

TEST(HashedEmbedder, SharedTokensRaiseSimilarity) {
  const auto& emb = testkit::resources().embedder();
  const std::string base = "my sister lost her job when the restaurant closed last spring";
  const std::string similar = "my sister lost her job when the bakery closed last winter";  // 8 of 10 shared
  const std::string different = "purple giraffes juggle quietly under orange moons tonight";
  const double close = cosine(emb.embed(base).values, emb.embed(similar).values);
  const double far = cosine(emb.embed(base).values, emb.embed(different).values);
  EXPECT_GT(close, far);
  EXPECT_GT(close, 0.5);
}

TEST(HashedEmbedder, OrderSensitiveButDuplicationStable) {
  const auto& emb = testkit::resources().embedder();
  const std::string t = "schools shut and we are stuck at home with the kids";
  EXPECT_NE(emb.embed(t).values, emb.embed("kids the with home at stuck are we and shut schools").values);
  EXPECT_GE(cosine(emb.embed(t).values, emb.embed(t + " " + t).values), 0.99);
}

TEST(HashedEmbedder, ConceptBlockCountsLexiconHits) {
  const auto& r = testkit::resources();
  const auto with = r.embedder().embed("panic attacks");
  const HashedEmbedder bare;
  const auto without = bare.embed("panic attacks");
  // Same n-grams; only the concept dimensions differ.
  EXPECT_NE(with.values, without.values);
}

TEST(Embedder, Factory) {
  EXPECT_EQ(make_embedder("hashed-v1")->name(), "hashed-v1");
  EXPECT_EQ(make_embedder("external:http://127.0.0.1:9/embed", {}, 8)->dimension(), 8u);
  try {
    make_embedder("word2vec");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
  }
}

TEST(Embedder, UnreachableEndpoint) {
  const HttpEmbedder emb("http://127.0.0.1:9/embed", 8);
  try {
    emb.embed("hello");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmbedderUnavailable);
  }
}

TEST(Fnv1a, ReferenceVectors) {
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a("foobar"), 0x85944171f73967e8ULL);
}
