#pragma once

// Text embedding providers and cosine similarity.

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kimatch/knowledge.hpp"

namespace kimatch::embed {

struct Embedding {
  std::vector<double> values;
  std::string provider;
  // Set for empty input; values are then all zero.
  bool empty = false;
};

class Embedder {
 public:
  virtual ~Embedder() = default;

  virtual std::string name() const = 0;
  virtual std::size_t dimension() const = 0;
  virtual Embedding embed(std::string_view text) const = 0;
};

// Throws DimensionMismatch for unequal lengths and ZeroVector when either
// input has zero norm.
double cosine(std::span<const double> u, std::span<const double> v);

// "hashed-v1": signed feature hashing of word unigrams, word bigrams and
// character trigrams into the first dimensions, plus one dimension per
// registered lexicon counting its concept hits. The n-gram block is scaled to
// unit norm, the concept block to norm 2, then the whole vector to unit norm.
class HashedEmbedder final : public Embedder {
 public:
  static constexpr std::size_t kDimension = 256;
  static constexpr std::size_t kConceptDims = 16;
  static constexpr double kTrigramWeight = 0.5;
  static constexpr double kConceptScale = 2.0;

  explicit HashedEmbedder(std::vector<knowledge::Lexicon> lexicons = {});

  std::string name() const override { return "hashed-v1"; }
  std::size_t dimension() const override { return kDimension; }
  Embedding embed(std::string_view text) const override;

 private:
  std::vector<knowledge::Lexicon> lexicons_;
};

// Remote provider: POST {"text": str} to the endpoint, expects
// {"vector": [float]} of the declared dimension. Inputs longer than
// `max_input_chars` are truncated with a warning.
class HttpEmbedder final : public Embedder {
 public:
  HttpEmbedder(std::string endpoint, std::size_t dimension, std::size_t max_input_chars = 0);

  std::string name() const override { return "external:" + endpoint_; }
  std::size_t dimension() const override { return dimension_; }
  Embedding embed(std::string_view text) const override;

 private:
  std::string endpoint_;
  std::size_t dimension_;
  std::size_t max_input_chars_;
};

// "hashed-v1" or "external:<url>".
std::unique_ptr<Embedder> make_embedder(std::string_view spec,
                                        std::vector<knowledge::Lexicon> lexicons = {},
                                        std::size_t external_dimension = HashedEmbedder::kDimension);

// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

}  // namespace kimatch::embed
