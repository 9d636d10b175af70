#include "kimatch/textproc.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <istream>
#include <nlohmann/json.hpp>
#include <ostream>

#include "kimatch/embed.hpp"
#include "kimatch/error.hpp"

namespace kimatch::textproc {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 2> kConditionNames{"Anxiety", "Depression"};
constexpr std::array<std::string_view, kEventCount> kEventNames{
    "SchoolClosure", "BusinessClosure", "Lockdown", "ShelterInPlace", "Hospitalization", "GeneralCovid"};

constexpr std::array<std::string_view, 7> kNegationCues{"n't", "not", "no", "never", "nor", "without",
                                                        "neither"};

}  // namespace

std::string_view to_string(Condition c) { return kConditionNames[static_cast<std::size_t>(c)]; }
std::string_view to_string(Event e) { return kEventNames[static_cast<std::size_t>(e)]; }

std::optional<Condition> parse_condition(std::string_view name) {
  for (std::size_t i = 0; i < kConditionNames.size(); ++i)
    if (kConditionNames[i] == name) return static_cast<Condition>(i);
  return std::nullopt;
}

std::optional<Event> parse_event(std::string_view name) {
  for (std::size_t i = 0; i < kEventNames.size(); ++i)
    if (kEventNames[i] == name) return static_cast<Event>(i);
  return std::nullopt;
}

Post make_post(std::string id, std::string user_id, std::int64_t timestamp, std::string text) {
  Post p;
  p.id = std::move(id);
  p.user_id = std::move(user_id);
  p.timestamp = timestamp;
  p.tokens = tokenize(text);
  p.text = std::move(text);
  return p;
}

bool is_negation_cue(std::string_view token) {
  return std::find(kNegationCues.begin(), kNegationCues.end(), token) != kNegationCues.end();
}

std::vector<NegationSpan> detect_negation(const std::vector<std::string>& tokens, std::size_t window) {
  std::vector<NegationSpan> spans;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!is_negation_cue(tokens[i])) continue;
    NegationSpan span{i, i + 1, i + 1};
    while (span.scope_end < tokens.size() && span.scope_end - span.scope_begin < window &&
           !is_sentence_boundary(tokens[span.scope_end]))
      ++span.scope_end;
    spans.push_back(span);
  }
  return spans;
}

namespace {

// Sentence index of every token; boundary tokens belong to the sentence they close.
std::vector<std::size_t> sentence_ids(const std::vector<std::string>& tokens) {
  std::vector<std::size_t> ids(tokens.size());
  std::size_t s = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    ids[i] = s;
    if (is_sentence_boundary(tokens[i])) ++s;
  }
  return ids;
}

bool has_unnegated_match(const std::vector<std::string>& tokens, const std::vector<NegationSpan>& spans,
                         const std::vector<std::size_t>& sentence, const knowledge::Lexicon& lexicon,
                         Condition condition, std::set<NegatedConcept>& negated) {
  const auto matches = knowledge::match_concepts(tokens, lexicon);
  std::vector<bool> is_negated(matches.size(), false);
  // (concept, sentence) pairs denied somewhere in that sentence.
  std::set<std::pair<std::string, std::size_t>> denied;
  for (std::size_t m = 0; m < matches.size(); ++m) {
    for (const auto& span : spans) {
      if (matches[m].begin < span.scope_end && span.scope_begin < matches[m].end) {
        is_negated[m] = true;
        denied.emplace(matches[m].concept_text, sentence[matches[m].begin]);
        break;
      }
    }
  }
  bool positive = false;
  for (std::size_t m = 0; m < matches.size(); ++m) {
    if (denied.contains({matches[m].concept_text, sentence[matches[m].begin]})) is_negated[m] = true;
    if (is_negated[m])
      negated.insert({matches[m].concept_text, condition});
    else
      positive = true;
  }
  return positive;
}

}  // namespace

PostTags tag_condition(const Post& post, const knowledge::Lexicon& anxiety,
                       const knowledge::Lexicon& depression, std::size_t window) {
  const auto& tokens = post.tokens.empty() && !post.text.empty() ? tokenize(post.text) : post.tokens;
  const auto spans = detect_negation(tokens, window);
  const auto sentence = sentence_ids(tokens);

  PostTags tags = post.tags;
  tags.conditions.clear();
  tags.negated_concepts.clear();
  if (has_unnegated_match(tokens, spans, sentence, anxiety, Condition::Anxiety, tags.negated_concepts))
    tags.conditions.insert(Condition::Anxiety);
  if (has_unnegated_match(tokens, spans, sentence, depression, Condition::Depression,
                          tags.negated_concepts))
    tags.conditions.insert(Condition::Depression);
  return tags;
}

PostTags tag_event(const Post& post, const std::vector<EventSpec>& events,
                   const embed::Embedder& embedder, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "event threshold must lie in (0, 1]");
  const auto& tokens = post.tokens.empty() && !post.text.empty() ? tokenize(post.text) : post.tokens;

  PostTags tags = post.tags;
  tags.events.clear();
  const auto post_vec = embedder.embed(post.text);

  auto fires = [&](const EventSpec& spec) {
    if (spec.lexicon && !knowledge::match_concepts(tokens, *spec.lexicon).empty()) return true;
    if (post_vec.empty || spec.description.empty()) return false;
    const auto desc_vec = embedder.embed(spec.description);
    if (desc_vec.empty) return false;
    return embed::cosine(post_vec.values, desc_vec.values) >= threshold;
  };

  for (const auto& spec : events)
    if (spec.event != Event::GeneralCovid && fires(spec)) tags.events.insert(spec.event);
  if (tags.events.empty())
    for (const auto& spec : events)
      if (spec.event == Event::GeneralCovid && fires(spec)) tags.events.insert(spec.event);
  return tags;
}

Post tag_post(Post post, const Taggers& taggers, const FilterConfig& config) {
  if (post.tokens.empty()) post.tokens = tokenize(post.text);
  if (taggers.anxiety && taggers.depression)
    post.tags = tag_condition(post, *taggers.anxiety, *taggers.depression, config.negation_window);
  if (taggers.events && taggers.embedder)
    post.tags = tag_event(post, *taggers.events, *taggers.embedder, config.event_threshold);
  return post;
}

std::vector<Post> filter_corpus(const std::vector<Post>& posts, const Taggers& taggers,
                                const FilterConfig& config) {
  std::vector<Post> kept;
  for (const auto& p : posts) {
    Post tagged = tag_post(p, taggers, config);
    if (config.require_event && tagged.tags.events.empty()) continue;
    if (config.require_condition && tagged.tags.conditions.empty()) continue;
    kept.push_back(std::move(tagged));
  }
  return kept;
}

json tags_to_json(const PostTags& tags) {
  json j;
  j["conditions"] = json::array();
  for (auto c : tags.conditions) j["conditions"].push_back(to_string(c));
  j["events"] = json::array();
  for (auto e : tags.events) j["events"].push_back(to_string(e));
  j["negated_concepts"] = json::array();
  for (const auto& n : tags.negated_concepts)
    j["negated_concepts"].push_back({{"concept", n.concept_text}, {"condition", to_string(n.condition)}});
  return j;
}

PostTags tags_from_json(const json& j) {
  PostTags tags;
  for (const auto& c : j.value("conditions", json::array())) {
    const auto parsed = parse_condition(c.get<std::string>());
    if (!parsed) throw Error(ErrorCode::FormatError, "unknown condition " + c.dump());
    tags.conditions.insert(*parsed);
  }
  for (const auto& e : j.value("events", json::array())) {
    const auto parsed = parse_event(e.get<std::string>());
    if (!parsed) throw Error(ErrorCode::FormatError, "unknown event " + e.dump());
    tags.events.insert(*parsed);
  }
  for (const auto& n : j.value("negated_concepts", json::array())) {
    const auto parsed = parse_condition(n.at("condition").get<std::string>());
    if (!parsed) throw Error(ErrorCode::FormatError, "unknown condition in negated concept");
    tags.negated_concepts.insert({n.at("concept").get<std::string>(), *parsed});
  }
  return tags;
}

std::vector<Post> read_corpus(std::istream& in) {
  std::vector<Post> posts;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = json::parse(line);
      Post p = make_post(j.at("id").is_string() ? j["id"].get<std::string>() : j["id"].dump(),
                         j.at("user_id").is_string() ? j["user_id"].get<std::string>()
                                                     : j["user_id"].dump(),
                         j.value("timestamp", std::int64_t{0}), j.at("text").get<std::string>());
      if (!is_valid_utf8(p.text))
        throw Error(ErrorCode::FormatError, "line " + std::to_string(lineno) + ": invalid UTF-8");
      if (j.contains("tags")) p.tags = tags_from_json(j["tags"]);
      if (!seen.insert(p.id).second)
        throw Error(ErrorCode::FormatError, "duplicate post id " + p.id);
      posts.push_back(std::move(p));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::FormatError, "corpus line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return posts;
}

std::vector<Post> read_corpus_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  return read_corpus(in);
}

void write_corpus(std::ostream& out, const std::vector<Post>& posts, bool with_tags) {
  for (const auto& p : posts) {
    json j{{"id", p.id}, {"user_id", p.user_id}, {"timestamp", p.timestamp}, {"text", p.text}};
    if (with_tags) j["tags"] = tags_to_json(p.tags);
    out << j.dump() << '\n';
  }
}

}  // namespace kimatch::textproc
