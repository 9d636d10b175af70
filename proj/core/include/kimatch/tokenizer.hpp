#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace kimatch::textproc {

// Unicode case folding of UTF-8 text. Invalid sequences become U+FFFD.
std::string fold_case(std::string_view utf8);

bool is_valid_utf8(std::string_view bytes);

// Lowercased word tokens plus sentence-ending punctuation (".", "!", "?").
// Contractions are split so negation cues stand alone:
//   "aren't" -> "are" "n't", "can't" -> "can" "n't", "cannot" -> "can" "not",
//   "i've" -> "i" "'ve". Hyphens and other punctuation separate words.
std::vector<std::string> tokenize(std::string_view text);

bool is_sentence_boundary(std::string_view token);

// Tokens with sentence punctuation removed.
std::vector<std::string> word_tokens(std::string_view text);

}  // namespace kimatch::textproc
