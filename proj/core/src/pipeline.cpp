#include "kimatch/pipeline.hpp"

#include "kimatch/error.hpp"

namespace kimatch::pipeline {

Resources::Resources(knowledge::Lexicon anxiety, knowledge::Lexicon depression,
                     std::vector<textproc::EventSpec> events, knowledge::CategoryDictionary dict,
                     knowledge::EmotionScale scale, std::unique_ptr<embed::Embedder> embedder,
                     textproc::FilterConfig filter)
    : anxiety_(std::move(anxiety)),
      depression_(std::move(depression)),
      events_(std::move(events)),
      dict_(std::move(dict)),
      scale_(std::move(scale)),
      embedder_(std::move(embedder)),
      filter_(filter) {
  if (!embedder_) throw Error(ErrorCode::EmbedderUnavailable, "no embedder configured");
}

Resources Resources::load(const config::Json& cfg) {
  auto path = [&](const std::string& rel) { return config::resolve_path(cfg, rel); };
  auto anxiety = knowledge::load_lexicon_file(path(cfg.at("lexicons").at("anxiety").get<std::string>()));
  auto depression = knowledge::load_lexicon_file(path(cfg.at("lexicons").at("depression").get<std::string>()));

  std::vector<textproc::EventSpec> events;
  std::vector<knowledge::Lexicon> registered{anxiety, depression};
  for (const auto& e : cfg.at("events")) {
    textproc::EventSpec spec;
    const auto name = e.at("event").get<std::string>();
    const auto parsed = textproc::parse_event(name);
    if (!parsed) throw Error(ErrorCode::FormatError, "unknown event in config: " + name);
    spec.event = *parsed;
    spec.description = e.value("description", std::string());
    if (e.contains("lexicon") && !e["lexicon"].is_null()) {
      spec.lexicon = knowledge::load_lexicon_file(path(e["lexicon"].get<std::string>()));
      registered.push_back(*spec.lexicon);
    }
    events.push_back(std::move(spec));
  }

  auto dict = knowledge::load_category_dictionary_file(path(cfg.at("categories").get<std::string>()));
  auto scale = knowledge::load_emotion_scale_file(path(cfg.at("emotion_scale").get<std::string>()));
  auto embedder = embed::make_embedder(cfg.value("embedder", std::string("hashed-v1")), std::move(registered),
                                       cfg.value("embedder_dimension", std::size_t{256}));
  return Resources(std::move(anxiety), std::move(depression), std::move(events), std::move(dict),
                   std::move(scale), std::move(embedder), config::filter_config(cfg));
}

textproc::Taggers Resources::taggers() const { return {&anxiety_, &depression_, &events_, embedder_.get()}; }

textproc::Post Resources::tag(textproc::Post post) const { return textproc::tag_post(std::move(post), taggers(), filter_); }

features::FeatureVector Resources::features_of(const std::vector<std::string>& tokens) const {
  return features::extract(tokens, dict_, scale_);
}

std::vector<double> Resources::role_input(std::string_view text) const {
  const auto tokens = textproc::tokenize(text);
  return roles::role_input(embedder_->embed(text), features_of(tokens), scale_.min(), scale_.max());
}

matcher::InputParts Resources::input_parts(std::string_view text, double role_prob) const {
  matcher::InputParts parts;
  parts.content = embedder_->embed(text).values;
  auto f = features_of(textproc::tokenize(text));
  f.role_prob = role_prob;
  parts.features = f;
  parts.role_prob = role_prob;
  return parts;
}

}  // namespace kimatch::pipeline
