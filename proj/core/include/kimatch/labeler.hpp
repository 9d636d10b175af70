#pragma once

// Labels an SP reply relative to the SS post through natural language
// inference: the SS post is the premise, the SP text the hypothesis.
// Entailment -> Similar, Contradiction -> Supportive, Neutral -> Informative.

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kimatch/error.hpp"

namespace kimatch::labeler {

enum class Verdict { Entailment, Contradiction, Neutral };
enum class SupportLabel { Similar, Supportive, Informative };

std::string_view to_string(Verdict v);
std::string_view to_string(SupportLabel l);
std::optional<Verdict> parse_verdict(std::string_view s);
std::optional<SupportLabel> parse_support_label(std::string_view s);

SupportLabel to_support_label(Verdict v);
Verdict to_verdict(SupportLabel l);

struct NliResult {
  Verdict verdict = Verdict::Neutral;
  double confidence = 0.0;  // in [0, 1]
};

class NliBackend {
 public:
  virtual ~NliBackend() = default;
  virtual std::string name() const = 0;
  virtual NliResult infer(std::string_view premise, std::string_view hypothesis) const = 0;
};

struct HeuristicWeights {
  double first_person = 1.0;  // weight of first-person density in entailment evidence
  double neutral_baseline = 0.08;
};

struct HeuristicScores {
  double entailment = 0.0;
  double contradiction = 0.0;
  double neutral = 0.0;
};

// Deterministic lexical backend.
//   entailment    = content-word Jaccard(premise, hypothesis)
//                   + first_person * first-person pronoun density of the hypothesis
//   contradiction = (contrast cues + second-person pronouns + imperative
//                   sentence openers) / hypothesis length
//   neutral       = neutral_baseline
// The verdict is the argmax; ties prefer Neutral, then Contradiction. A
// hypothesis identical to the premise (after normalization) is Entailment.
class HeuristicNli final : public NliBackend {
 public:
  explicit HeuristicNli(HeuristicWeights weights = {}) : weights_(weights) {}

  std::string name() const override { return "heuristic"; }
  NliResult infer(std::string_view premise, std::string_view hypothesis) const override;
  HeuristicScores scores(std::string_view premise, std::string_view hypothesis) const;

 private:
  HeuristicWeights weights_;
};

// POST {"premise", "hypothesis"} -> {"verdict", "confidence"}.
class HttpNli final : public NliBackend {
 public:
  explicit HttpNli(std::string endpoint) : endpoint_(std::move(endpoint)) {}

  std::string name() const override { return "external:" + endpoint_; }
  NliResult infer(std::string_view premise, std::string_view hypothesis) const override;

 private:
  std::string endpoint_;
};

// "heuristic" or "external:<url>".
std::unique_ptr<NliBackend> make_backend(std::string_view spec, HeuristicWeights weights = {});

// Throws EmptyText when either side has no words.
NliResult nli(std::string_view premise, std::string_view hypothesis, const NliBackend& backend);

struct LabeledReply {
  std::string sp_id;
  std::optional<SupportLabel> label;
  std::optional<ErrorCode> error;  // set when this item failed
  std::string message;
};

// One entry per SP in input order; a failing item records its error and the
// batch continues.
std::vector<LabeledReply> label_recommendations(std::string_view ss_text,
                                                const std::vector<std::pair<std::string, std::string>>& sps,
                                                const NliBackend& backend);

}  // namespace kimatch::labeler
