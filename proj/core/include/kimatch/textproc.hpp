#pragma once

// Post model, negation detection and the two corpus filters: condition
// tagging against the anxiety/depression lexicons and event tagging against
// COVID-19 event lexicons plus embedding similarity.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <nlohmann/json.hpp>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "kimatch/knowledge.hpp"
#include "kimatch/tokenizer.hpp"

namespace kimatch::embed {
class Embedder;
}

namespace kimatch::textproc {

enum class Condition { Anxiety, Depression };
enum class Event {
  SchoolClosure,
  BusinessClosure,
  Lockdown,
  ShelterInPlace,
  Hospitalization,
  GeneralCovid,
};

inline constexpr std::size_t kEventCount = 6;

std::string_view to_string(Condition c);
std::string_view to_string(Event e);
std::optional<Condition> parse_condition(std::string_view name);
std::optional<Event> parse_event(std::string_view name);

struct NegatedConcept {
  std::string concept_text;
  Condition condition = Condition::Anxiety;

  auto operator<=>(const NegatedConcept&) const = default;
};

struct PostTags {
  std::set<Condition> conditions;
  std::set<Event> events;
  std::set<NegatedConcept> negated_concepts;

  bool operator==(const PostTags&) const = default;
};

struct Post {
  std::string id;
  std::string user_id;
  std::int64_t timestamp = 0;
  std::string text;
  std::vector<std::string> tokens;
  PostTags tags;

  bool operator==(const Post&) const = default;
};

Post make_post(std::string id, std::string user_id, std::int64_t timestamp, std::string text);

inline constexpr std::size_t kDefaultNegationWindow = 5;

bool is_negation_cue(std::string_view token);

struct NegationSpan {
  std::size_t cue = 0;
  std::size_t scope_begin = 0;  // token range [scope_begin, scope_end)
  std::size_t scope_end = 0;

  bool operator==(const NegationSpan&) const = default;
};

// One span per cue; the scope is the next `window` tokens, cut at the first
// sentence boundary. Scopes of different cues are independent.
std::vector<NegationSpan> detect_negation(const std::vector<std::string>& tokens,
                                          std::size_t window = kDefaultNegationWindow);

// Condition c is tagged when at least one non-negated concept of c's lexicon
// matches. A concept match is negated when it overlaps a negation scope; a
// negated concept also negates every other occurrence of the same concept in
// its sentence, so "they call it fear but it is not fear" denies "fear"
// for the whole sentence. Event tags and
// previously recorded tags are kept; condition tags are recomputed.
PostTags tag_condition(const Post& post, const knowledge::Lexicon& anxiety,
                       const knowledge::Lexicon& depression,
                       std::size_t window = kDefaultNegationWindow);

struct EventSpec {
  Event event = Event::GeneralCovid;
  std::optional<knowledge::Lexicon> lexicon;
  std::string description;
};

inline constexpr double kDefaultEventThreshold = 0.8;

// Event e is tagged when one of its concepts matches exactly or the cosine
// between the post and e's description embedding reaches `threshold`.
// GeneralCovid is only considered when no specific event was tagged.
// Throws InvalidArgument for a threshold outside (0, 1] and
// EmbedderUnavailable when the embedder cannot be reached.
PostTags tag_event(const Post& post, const std::vector<EventSpec>& events,
                   const embed::Embedder& embedder, double threshold = kDefaultEventThreshold);

struct FilterConfig {
  bool require_event = true;
  bool require_condition = true;
  double event_threshold = kDefaultEventThreshold;
  std::size_t negation_window = kDefaultNegationWindow;
};

struct Taggers {
  const knowledge::Lexicon* anxiety = nullptr;
  const knowledge::Lexicon* depression = nullptr;
  const std::vector<EventSpec>* events = nullptr;
  const embed::Embedder* embedder = nullptr;
};

Post tag_post(Post post, const Taggers& taggers, const FilterConfig& config);

// Tags every post and keeps those passing the enabled filters, in input order.
std::vector<Post> filter_corpus(const std::vector<Post>& posts, const Taggers& taggers,
                                const FilterConfig& config);

nlohmann::json tags_to_json(const PostTags& tags);
PostTags tags_from_json(const nlohmann::json& j);

// JSON lines: {"id","user_id","timestamp","text"} plus optional "tags".
std::vector<Post> read_corpus(std::istream& in);
std::vector<Post> read_corpus_file(const std::string& path);
void write_corpus(std::ostream& out, const std::vector<Post>& posts, bool with_tags = true);

}  // namespace kimatch::textproc
