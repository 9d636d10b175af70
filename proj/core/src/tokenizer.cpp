#include "kimatch/tokenizer.hpp"

#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <array>
#include <utility>

namespace kimatch::textproc {

std::string fold_case(std::string_view utf8) {
  auto u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  u.foldCase();
  std::string out;
  u.toUTF8String(out);
  return out;
}

bool is_valid_utf8(std::string_view bytes) {
  const auto* s = reinterpret_cast<const uint8_t*>(bytes.data());
  const auto length = static_cast<int32_t>(bytes.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(s, i, length, c);
    if (c < 0) return false;
  }
  return true;
}

bool is_sentence_boundary(std::string_view token) {
  return token == "." || token == "!" || token == "?";
}

namespace {

constexpr std::array<std::pair<std::string_view, std::string_view>, 4> kIrregularNegations{{
    {"ca", "can"}, {"wo", "will"}, {"sha", "shall"}, {"ai", "ai"}}};

constexpr std::array<std::string_view, 6> kClitics{"'s", "'re", "'ve", "'ll", "'d", "'m"};

void emit_word(std::string word, std::vector<std::string>& out) {
  while (!word.empty() && word.front() == '\'') word.erase(word.begin());
  while (!word.empty() && word.back() == '\'') word.pop_back();
  if (word.empty()) return;

  if (word == "cannot") {
    out.emplace_back("can");
    out.emplace_back("not");
    return;
  }
  if (word.size() > 3 && word.ends_with("n't")) {
    std::string stem = word.substr(0, word.size() - 3);
    for (const auto& [from, to] : kIrregularNegations)
      if (stem == from) stem = std::string(to);
    out.push_back(std::move(stem));
    out.emplace_back("n't");
    return;
  }
  for (auto clitic : kClitics) {
    if (word.size() > clitic.size() && word.ends_with(clitic)) {
      out.push_back(word.substr(0, word.size() - clitic.size()));
      out.emplace_back(clitic);
      return;
    }
  }
  out.push_back(std::move(word));
}

bool is_apostrophe(UChar32 c) { return c == '\'' || c == 0x2019 || c == 0x2018 || c == 0x02BC; }

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  const std::string folded = fold_case(text);
  const auto* s = reinterpret_cast<const uint8_t*>(folded.data());
  const auto length = static_cast<int32_t>(folded.size());

  std::vector<std::string> out;
  std::string word;
  bool last_was_boundary = false;
  auto flush = [&] {
    if (!word.empty()) {
      emit_word(std::move(word), out);
      word.clear();
      last_was_boundary = false;
    }
  };

  int32_t i = 0;
  UChar32 prev = 0;
  while (i < length) {
    const int32_t start = i;
    UChar32 c;
    U8_NEXT(s, i, length, c);
    if (c < 0) c = 0xFFFD;

    if (u_isalnum(c)) {
      word.append(folded, start, i - start);
    } else if (is_apostrophe(c)) {
      word.push_back('\'');
    } else if (c == '.' && u_isdigit(prev) && i < length && u_isdigit(s[i])) {
      word.push_back('.');
    } else if (c == '.' || c == '!' || c == '?' || c == 0x2026) {
      flush();
      if (!last_was_boundary) {
        out.emplace_back(c == '!' ? "!" : c == '?' ? "?" : ".");
        last_was_boundary = true;
      }
    } else {
      flush();
    }
    prev = c;
  }
  flush();
  return out;
}

std::vector<std::string> word_tokens(std::string_view text) {
  auto tokens = tokenize(text);
  std::erase_if(tokens, [](const std::string& t) { return is_sentence_boundary(t); });
  return tokens;
}

}  // namespace kimatch::textproc
