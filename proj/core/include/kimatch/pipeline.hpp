#pragma once

// Loaded resources (lexicons, dictionaries, embedder) and the text -> feature
// steps shared by the command line tool and the service.

#include <memory>
#include <string_view>
#include <vector>

#include "kimatch/config.hpp"
#include "kimatch/embed.hpp"
#include "kimatch/features.hpp"
#include "kimatch/knowledge.hpp"
#include "kimatch/matcher.hpp"
#include "kimatch/roles.hpp"
#include "kimatch/textproc.hpp"

namespace kimatch::pipeline {

class Resources {
 public:
  Resources(knowledge::Lexicon anxiety, knowledge::Lexicon depression, std::vector<textproc::EventSpec> events,
            knowledge::CategoryDictionary dict, knowledge::EmotionScale scale,
            std::unique_ptr<embed::Embedder> embedder, textproc::FilterConfig filter);

  // Reads every resource named in the config. The embedder registers the
  // anxiety, depression and event lexicons, in that order.
  static Resources load(const config::Json& cfg);

  const knowledge::Lexicon& anxiety() const { return anxiety_; }
  const knowledge::Lexicon& depression() const { return depression_; }
  const std::vector<textproc::EventSpec>& events() const { return events_; }
  const knowledge::CategoryDictionary& dictionary() const { return dict_; }
  const knowledge::EmotionScale& emotion_scale() const { return scale_; }
  const embed::Embedder& embedder() const { return *embedder_; }
  const textproc::FilterConfig& filter() const { return filter_; }

  textproc::Taggers taggers() const;
  textproc::Post tag(textproc::Post post) const;

  features::FeatureVector features_of(const std::vector<std::string>& tokens) const;
  // Role classifier input for one text.
  std::vector<double> role_input(std::string_view text) const;
  matcher::InputParts input_parts(std::string_view text, double role_prob) const;

 private:
  knowledge::Lexicon anxiety_;
  knowledge::Lexicon depression_;
  std::vector<textproc::EventSpec> events_;
  knowledge::CategoryDictionary dict_;
  knowledge::EmotionScale scale_;
  std::unique_ptr<embed::Embedder> embedder_;
  textproc::FilterConfig filter_;
};

}  // namespace kimatch::pipeline
