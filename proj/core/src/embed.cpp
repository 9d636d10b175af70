#include "kimatch/embed.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "kimatch/error.hpp"
#include "kimatch/tokenizer.hpp"

namespace kimatch::embed {

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size())
    throw Error(ErrorCode::DimensionMismatch, "cosine of vectors with different dimensions");
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) throw Error(ErrorCode::ZeroVector, "cosine of a zero vector");
  const double c = dot / (std::sqrt(nu) * std::sqrt(nv));
  return std::clamp(c, -1.0, 1.0);
}

namespace {

constexpr std::size_t kHashedDims = HashedEmbedder::kDimension - HashedEmbedder::kConceptDims;

void add_feature(std::vector<double>& v, std::string_view key, double weight) {
  const std::uint64_t h = fnv1a(key);
  const double sign = (h >> 63) ? -1.0 : 1.0;
  v[h % kHashedDims] += sign * weight;
}

void scale_to_norm(std::span<double> v, double target) {
  double n = 0.0;
  for (double x : v) n += x * x;
  if (n == 0.0) return;
  const double f = target / std::sqrt(n);
  for (double& x : v) x *= f;
}

}  // namespace

HashedEmbedder::HashedEmbedder(std::vector<knowledge::Lexicon> lexicons)
    : lexicons_(std::move(lexicons)) {}

Embedding HashedEmbedder::embed(std::string_view text) const {
  Embedding out{std::vector<double>(kDimension, 0.0), name(), false};
  const auto tokens = textproc::tokenize(text);

  std::vector<std::string> words;
  for (const auto& t : tokens)
    if (!textproc::is_sentence_boundary(t)) words.push_back(t);
  if (words.empty()) {
    out.empty = true;
    return out;
  }

  for (std::size_t i = 0; i < words.size(); ++i) {
    add_feature(out.values, "w:" + words[i], 1.0);
    if (i + 1 < words.size()) add_feature(out.values, "b:" + words[i] + ' ' + words[i + 1], 1.0);
    const std::string padded = '^' + words[i] + '$';
    for (std::size_t j = 0; j + 3 <= padded.size(); ++j)
      add_feature(out.values, "c:" + padded.substr(j, 3), kTrigramWeight);
  }

  // Concept matching runs on the full token stream so phrases never span
  // sentence boundaries.
  for (std::size_t li = 0; li < lexicons_.size(); ++li) {
    const auto hits = knowledge::match_concepts(tokens, lexicons_[li]);
    out.values[kHashedDims + li % kConceptDims] += static_cast<double>(hits.size());
  }

  std::span<double> all(out.values);
  scale_to_norm(all.first(kHashedDims), 1.0);
  scale_to_norm(all.subspan(kHashedDims), kConceptScale);
  scale_to_norm(all, 1.0);
  return out;
}

HttpEmbedder::HttpEmbedder(std::string endpoint, std::size_t dimension, std::size_t max_input_chars)
    : endpoint_(std::move(endpoint)), dimension_(dimension), max_input_chars_(max_input_chars) {
  if (dimension_ == 0) throw Error(ErrorCode::InvalidArgument, "embedding dimension must be >= 1");
}

Embedding HttpEmbedder::embed(std::string_view text) const {
  Embedding out{std::vector<double>(dimension_, 0.0), name(), false};
  if (textproc::word_tokens(text).empty()) {
    out.empty = true;
    return out;
  }
  std::string input(text);
  if (max_input_chars_ > 0 && input.size() > max_input_chars_) {
    spdlog::warn("embedder input of {} bytes truncated to {}", input.size(), max_input_chars_);
    input.resize(max_input_chars_);
  }

  const auto scheme = endpoint_.find("://");
  const auto path_pos = endpoint_.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  const std::string host = endpoint_.substr(0, path_pos);
  const std::string path = path_pos == std::string::npos ? "/" : endpoint_.substr(path_pos);

  httplib::Client client(host);
  client.set_connection_timeout(5);
  client.set_read_timeout(30);
  const auto res = client.Post(path, nlohmann::json{{"text", input}}.dump(), "application/json");
  if (!res || res->status != 200)
    throw Error(ErrorCode::EmbedderUnavailable, "embedding endpoint unreachable: " + endpoint_);

  nlohmann::json body;
  try {
    body = nlohmann::json::parse(res->body);
    out.values = body.at("vector").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::EmbedderUnavailable, std::string("bad embedding response: ") + e.what());
  }
  if (out.values.size() != dimension_)
    throw Error(ErrorCode::DimensionMismatch, "embedding endpoint returned " +
                                                  std::to_string(out.values.size()) + " values");
  for (double x : out.values)
    if (!std::isfinite(x)) throw Error(ErrorCode::EmbedderUnavailable, "non-finite embedding value");
  scale_to_norm(out.values, 1.0);
  return out;
}

std::unique_ptr<Embedder> make_embedder(std::string_view spec,
                                        std::vector<knowledge::Lexicon> lexicons,
                                        std::size_t external_dimension) {
  if (spec == "hashed-v1") return std::make_unique<HashedEmbedder>(std::move(lexicons));
  constexpr std::string_view kExternal = "external:";
  if (spec.starts_with(kExternal))
    return std::make_unique<HttpEmbedder>(std::string(spec.substr(kExternal.size())),
                                          external_dimension);
  throw Error(ErrorCode::InvalidArgument, "unknown embedder: " + std::string(spec));
}

}  // namespace kimatch::embed
