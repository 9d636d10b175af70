#include "kimatch/labeler.hpp"

#include <algorithm>
#include <array>
#include <httplib.h>
#include <nlohmann/json.hpp>
#include <set>

#include "kimatch/tokenizer.hpp"

namespace kimatch::labeler {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Entailment: return "entailment";
    case Verdict::Contradiction: return "contradiction";
    case Verdict::Neutral: return "neutral";
  }
  return "neutral";
}

std::string_view to_string(SupportLabel l) {
  switch (l) {
    case SupportLabel::Similar: return "Similar";
    case SupportLabel::Supportive: return "Supportive";
    case SupportLabel::Informative: return "Informative";
  }
  return "Informative";
}

std::optional<Verdict> parse_verdict(std::string_view s) {
  for (auto v : {Verdict::Entailment, Verdict::Contradiction, Verdict::Neutral})
    if (to_string(v) == s) return v;
  return std::nullopt;
}

std::optional<SupportLabel> parse_support_label(std::string_view s) {
  for (auto l : {SupportLabel::Similar, SupportLabel::Supportive, SupportLabel::Informative})
    if (to_string(l) == s) return l;
  return std::nullopt;
}

SupportLabel to_support_label(Verdict v) {
  switch (v) {
    case Verdict::Entailment: return SupportLabel::Similar;
    case Verdict::Contradiction: return SupportLabel::Supportive;
    case Verdict::Neutral: return SupportLabel::Informative;
  }
  return SupportLabel::Informative;
}

Verdict to_verdict(SupportLabel l) {
  switch (l) {
    case SupportLabel::Similar: return Verdict::Entailment;
    case SupportLabel::Supportive: return Verdict::Contradiction;
    case SupportLabel::Informative: return Verdict::Neutral;
  }
  return Verdict::Neutral;
}

namespace {

const std::set<std::string, std::less<>> kStopwords{
    "a",    "an",   "the",  "and",  "or",   "but",  "if",    "of",   "to",    "in",    "on",   "at",
    "for",  "with", "by",   "from", "as",   "is",   "am",    "are",  "was",   "were",  "be",   "been",
    "it",   "its",  "this", "that", "these", "those", "i",   "me",   "my",    "myself", "we",  "us",
    "our",  "you",  "your", "he",   "she",  "him",  "her",   "they", "them",  "their", "so",   "do",
    "does", "did",  "n't",  "not",  "no",   "have", "has",   "had",  "'s",    "'m",    "'re",  "'ve",
    "'ll",  "'d",   "can",  "will", "would", "could", "should", "just", "very", "up",   "out",  "all",
    "any",  "some", "there", "here", "what", "which", "who", "how",  "about", "into",  "than", "then"};

const std::set<std::string, std::less<>> kFirstPerson{"i", "me", "my", "myself", "mine", "we", "us", "our", "ours"};
const std::set<std::string, std::less<>> kSecondPerson{"you", "your", "yours", "yourself", "yourselves"};
const std::set<std::string, std::less<>> kContrast{"but", "however", "though", "although", "advice", "should", "instead"};
const std::set<std::string, std::less<>> kImperatives{
    "be",       "try",    "take",   "give",  "go",     "talk",    "keep",      "stop",  "remember", "let",
    "get",      "find",   "reach",  "make",  "exercise", "meditate", "prioritize", "focus", "breathe", "consider",
    "look",     "call",   "seek",   "stay",  "please", "hang",    "avoid",     "start", "write",   "listen"};

std::vector<std::string> words_of(std::string_view text) { return textproc::word_tokens(text); }

}  // namespace

HeuristicScores HeuristicNli::scores(std::string_view premise, std::string_view hypothesis) const {
  const auto hyp_tokens = textproc::tokenize(hypothesis);
  const auto prem_words = words_of(premise);

  std::set<std::string> prem_content, hyp_content;
  for (const auto& w : prem_words)
    if (!kStopwords.contains(w)) prem_content.insert(w);

  std::size_t n = 0, first = 0, cues = 0;
  bool sentence_start = true;
  for (std::size_t i = 0; i < hyp_tokens.size(); ++i) {
    const auto& t = hyp_tokens[i];
    if (textproc::is_sentence_boundary(t)) {
      sentence_start = true;
      continue;
    }
    ++n;
    if (!kStopwords.contains(t)) hyp_content.insert(t);
    if (kFirstPerson.contains(t)) ++first;
    if (kSecondPerson.contains(t) || kContrast.contains(t)) ++cues;
    // "don't" / "do not" count once, on the negation token.
    if ((t == "n't" || t == "not") && i > 0 && hyp_tokens[i - 1] == "do") ++cues;
    if (sentence_start && kImperatives.contains(t)) ++cues;
    sentence_start = false;
  }

  HeuristicScores s;
  s.neutral = weights_.neutral_baseline;
  if (n == 0) return s;
  std::size_t inter = 0;
  for (const auto& w : hyp_content) inter += prem_content.count(w);
  const std::size_t uni = prem_content.size() + hyp_content.size() - inter;
  const double jac = uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
  s.entailment = jac + weights_.first_person * static_cast<double>(first) / static_cast<double>(n);
  s.contradiction = static_cast<double>(cues) / static_cast<double>(n);
  return s;
}

NliResult HeuristicNli::infer(std::string_view premise, std::string_view hypothesis) const {
  if (words_of(premise) == words_of(hypothesis)) return {Verdict::Entailment, 1.0};
  const auto s = scores(premise, hypothesis);
  // Candidates in tie-break order: the first maximum wins.
  const std::array<std::pair<Verdict, double>, 3> ranked{
      {{Verdict::Neutral, s.neutral}, {Verdict::Contradiction, s.contradiction}, {Verdict::Entailment, s.entailment}}};
  auto best = ranked[0];
  for (const auto& c : ranked)
    if (c.second > best.second) best = c;
  const double total = s.neutral + s.contradiction + s.entailment;
  return {best.first, total > 0.0 ? best.second / total : 1.0 / 3.0};
}

NliResult HttpNli::infer(std::string_view premise, std::string_view hypothesis) const {
  const auto scheme = endpoint_.find("://");
  const auto path_pos = endpoint_.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  httplib::Client client(endpoint_.substr(0, path_pos));
  client.set_connection_timeout(5);
  client.set_read_timeout(30);
  const nlohmann::json req{{"premise", std::string(premise)}, {"hypothesis", std::string(hypothesis)}};
  const auto res = client.Post(path_pos == std::string::npos ? "/" : endpoint_.substr(path_pos), req.dump(),
                               "application/json");
  if (!res || res->status != 200)
    throw Error(ErrorCode::BackendUnavailable, "NLI endpoint unreachable: " + endpoint_);
  try {
    const auto body = nlohmann::json::parse(res->body);
    const auto verdict = parse_verdict(body.at("verdict").get<std::string>());
    if (!verdict) throw Error(ErrorCode::BackendUnavailable, "NLI endpoint returned an unknown verdict");
    return {*verdict, std::clamp(body.value("confidence", 0.0), 0.0, 1.0)};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BackendUnavailable, std::string("bad NLI response: ") + e.what());
  }
}

std::unique_ptr<NliBackend> make_backend(std::string_view spec, HeuristicWeights weights) {
  if (spec == "heuristic") return std::make_unique<HeuristicNli>(weights);
  constexpr std::string_view kExternal = "external:";
  if (spec.starts_with(kExternal)) return std::make_unique<HttpNli>(std::string(spec.substr(kExternal.size())));
  throw Error(ErrorCode::InvalidArgument, "unknown NLI backend: " + std::string(spec));
}

NliResult nli(std::string_view premise, std::string_view hypothesis, const NliBackend& backend) {
  if (words_of(premise).empty() || words_of(hypothesis).empty())
    throw Error(ErrorCode::EmptyText, "premise and hypothesis must both contain words");
  return backend.infer(premise, hypothesis);
}

std::vector<LabeledReply> label_recommendations(std::string_view ss_text,
                                                const std::vector<std::pair<std::string, std::string>>& sps,
                                                const NliBackend& backend) {
  std::vector<LabeledReply> out;
  out.reserve(sps.size());
  for (const auto& [id, text] : sps) {
    LabeledReply r;
    r.sp_id = id;
    try {
      r.label = to_support_label(nli(ss_text, text, backend).verdict);
    } catch (const Error& e) {
      r.error = e.code();
      r.message = e.what();
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace kimatch::labeler
