#include "kimatch/knowledge.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "kimatch/error.hpp"
#include "kimatch/tokenizer.hpp"

namespace kimatch::knowledge {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::string normalize_phrase(std::string_view phrase) { return join(textproc::word_tokens(phrase)); }

bool PhraseSet::add(std::string_view phrase) {
  auto tokens = textproc::word_tokens(phrase);
  if (tokens.empty()) return false;
  std::string text = join(tokens);
  if (by_text_.contains(text)) return false;

  const std::size_t idx = concepts_.size();
  by_text_.emplace(text, idx);
  auto& bucket = by_first_token_[tokens.front()];
  concepts_.push_back({std::move(text), std::move(tokens)});
  bucket.push_back(idx);
  std::stable_sort(bucket.begin(), bucket.end(), [this](std::size_t a, std::size_t b) {
    return concepts_[a].tokens.size() > concepts_[b].tokens.size();
  });
  return true;
}

bool PhraseSet::contains(std::string_view normalized_text) const {
  return by_text_.contains(std::string(normalized_text));
}

std::vector<ConceptMatch> PhraseSet::match(const std::vector<std::string>& tokens) const {
  std::vector<ConceptMatch> out;
  std::size_t i = 0;
  while (i < tokens.size()) {
    const auto it = by_first_token_.find(tokens[i]);
    std::size_t consumed = 0;
    if (it != by_first_token_.end()) {
      for (std::size_t idx : it->second) {
        const auto& c = concepts_[idx];
        if (i + c.tokens.size() > tokens.size()) continue;
        if (std::equal(c.tokens.begin(), c.tokens.end(), tokens.begin() + i)) {
          out.push_back({c.text, i, i + c.tokens.size()});
          consumed = c.tokens.size();
          break;
        }
      }
    }
    i += consumed == 0 ? 1 : consumed;
  }
  return out;
}

Lexicon::Lexicon(std::string name, PhraseSet phrases)
    : name_(std::move(name)), phrases_(std::move(phrases)) {
  if (phrases_.empty()) throw Error(ErrorCode::EmptyLexicon, "lexicon '" + name_ + "' is empty");
}

bool Lexicon::contains(std::string_view phrase) const {
  return phrases_.contains(normalize_phrase(phrase));
}

Lexicon parse_lexicon(std::string_view source, std::string_view default_name) {
  if (!textproc::is_valid_utf8(source))
    throw Error(ErrorCode::FormatError, "lexicon source is not valid UTF-8");

  std::string name(default_name);
  PhraseSet phrases;
  const auto body = trim(source);
  if (!body.empty() && (body.front() == '{' || body.front() == '[')) {
    json doc;
    try {
      doc = json::parse(body);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::FormatError, std::string("lexicon JSON: ") + e.what());
    }
    const json* list = &doc;
    if (doc.is_object()) {
      if (!doc.contains("concepts") || !doc["concepts"].is_array())
        throw Error(ErrorCode::FormatError, "lexicon JSON needs a \"concepts\" array");
      if (doc.contains("name")) {
        if (!doc["name"].is_string()) throw Error(ErrorCode::FormatError, "lexicon name must be a string");
        name = doc["name"].get<std::string>();
      }
      list = &doc["concepts"];
    }
    for (const auto& item : *list) {
      if (!item.is_string()) throw Error(ErrorCode::FormatError, "lexicon concepts must be strings");
      phrases.add(item.get<std::string>());
    }
  } else {
    std::istringstream in{std::string(source)};
    std::string line;
    while (std::getline(in, line)) {
      const auto hash = line.find('#');
      phrases.add(trim(std::string_view(line).substr(0, hash)));
    }
  }
  return Lexicon(std::move(name), std::move(phrases));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Lexicon load_lexicon_file(const std::string& path) {
  auto stem = path.substr(path.find_last_of('/') + 1);
  stem = stem.substr(0, stem.find('.'));
  return parse_lexicon(read_file(path), stem);
}

std::string serialize_lexicon(const Lexicon& lexicon) {
  json doc;
  doc["name"] = lexicon.name();
  doc["concepts"] = json::array();
  for (const auto& c : lexicon.concepts()) doc["concepts"].push_back(c.text);
  return doc.dump();
}

std::vector<ConceptMatch> match_concepts(const std::vector<std::string>& tokens,
                                         const Lexicon& lexicon) {
  return lexicon.phrases().match(tokens);
}

std::string_view to_string(Category c) {
  switch (c) {
    case Category::Emotional: return "Emotional";
    case Category::Social: return "Social";
    case Category::Biological: return "Biological";
    case Category::Cognitive: return "Cognitive";
    case Category::FocusFuture: return "FocusFuture";
    case Category::Modals: return "Modals";
    case Category::InstADL: return "InstADL";
    case Category::BasicADL: return "BasicADL";
    case Category::Equipment: return "Equipment";
  }
  return "?";
}

std::optional<Category> parse_category(std::string_view name) {
  for (std::size_t i = 0; i < kCategoryCount; ++i) {
    const auto c = static_cast<Category>(i);
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

CategoryDictionary::CategoryDictionary(std::array<PhraseSet, kCategoryCount> categories)
    : categories_(std::move(categories)) {}

std::vector<Category> CategoryDictionary::categories_of(std::string_view phrase) const {
  const auto normalized = normalize_phrase(phrase);
  std::vector<Category> out;
  for (std::size_t i = 0; i < kCategoryCount; ++i)
    if (categories_[i].contains(normalized)) out.push_back(static_cast<Category>(i));
  return out;
}

bool CategoryDictionary::empty() const {
  return std::all_of(categories_.begin(), categories_.end(),
                     [](const PhraseSet& p) { return p.empty(); });
}

CategoryDictionary load_category_dictionary(std::string_view source) {
  json doc;
  try {
    doc = json::parse(source);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::FormatError, std::string("category dictionary JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("categories") || !doc["categories"].is_object())
    throw Error(ErrorCode::FormatError, "category dictionary needs a \"categories\" object");
  const auto& cats = doc["categories"];
  for (const auto& [key, _] : cats.items())
    if (!parse_category(key)) throw Error(ErrorCode::FormatError, "unknown category: " + key);

  std::array<PhraseSet, kCategoryCount> sets;
  for (std::size_t i = 0; i < kCategoryCount; ++i) {
    const auto name = std::string(to_string(static_cast<Category>(i)));
    if (!cats.contains(name)) throw Error(ErrorCode::FormatError, "missing category: " + name);
    if (!cats[name].is_array()) throw Error(ErrorCode::FormatError, name + " must be an array");
    for (const auto& w : cats[name]) {
      if (!w.is_string()) throw Error(ErrorCode::FormatError, name + " entries must be strings");
      sets[i].add(w.get<std::string>());
    }
  }
  return CategoryDictionary(std::move(sets));
}

CategoryDictionary load_category_dictionary_file(const std::string& path) {
  return load_category_dictionary(read_file(path));
}

EmotionScale::EmotionScale(double min, double max, double neutral,
                           std::unordered_map<std::string, double> scores)
    : min_(min), max_(max), neutral_(neutral), scores_(std::move(scores)) {
  if (!(min_ < max_) || neutral_ < min_ || neutral_ > max_)
    throw Error(ErrorCode::FormatError, "emotion scale endpoints are inconsistent");
  for (const auto& [word, s] : scores_)
    if (s < min_ || s > max_)
      throw Error(ErrorCode::FormatError, "score for '" + word + "' outside declared scale");
}

std::optional<double> EmotionScale::score(std::string_view word) const {
  const auto it = scores_.find(std::string(word));
  if (it == scores_.end()) return std::nullopt;
  return it->second;
}

namespace {

double parse_double(std::string_view s, std::string_view what) {
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw Error(ErrorCode::FormatError, "bad number for " + std::string(what) + ": '" + std::string(s) + "'");
  return v;
}

}  // namespace

EmotionScale load_emotion_scale(std::string_view source) {
  double min = 1.0, max = 9.0, neutral = 5.0;
  bool neutral_declared = false;
  std::unordered_map<std::string, double> scores;
  std::istringstream in{std::string(source)};
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    const auto view = trim(line);
    if (view.empty()) continue;
    if (view.front() == '#') {
      if (first) {
        std::istringstream header{std::string(view.substr(1))};
        std::string kv;
        while (header >> kv) {
          const auto eq = kv.find('=');
          if (eq == std::string::npos) continue;
          const auto key = kv.substr(0, eq);
          const double v = parse_double(std::string_view(kv).substr(eq + 1), key);
          if (key == "min") min = v;
          else if (key == "max") max = v;
          else if (key == "neutral") { neutral = v; neutral_declared = true; }
        }
      }
      first = false;
      continue;
    }
    first = false;
    const auto tab = view.find('\t');
    if (tab == std::string_view::npos)
      throw Error(ErrorCode::FormatError, "emotion scale line lacks a tab: '" + std::string(view) + "'");
    const auto word = normalize_phrase(view.substr(0, tab));
    if (word.empty()) continue;
    scores[word] = parse_double(view.substr(tab + 1), word);
  }
  if (!neutral_declared) neutral = (min + max) / 2.0;
  return EmotionScale(min, max, neutral, std::move(scores));
}

EmotionScale load_emotion_scale_file(const std::string& path) {
  return load_emotion_scale(read_file(path));
}

}  // namespace kimatch::knowledge
