#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "stormscope/corpus.hpp"
#include "stormscope/lexicon.hpp"
#include "stormscope/tokenize.hpp"

namespace stormscope {

// Canonical order: morphological (10), syntactic (7), punctuation (2),
// surface semantics (15), sentence length (1).
enum class Feature : std::uint8_t {
  n_adverbs,
  n_adjectives,
  n_verbs,
  n_proper_nouns,
  n_conjunctions,
  n_negations,
  n_comparatives,
  n_superlatives,
  n_personal_pronouns,
  n_passive_forms,
  n_contrastive_but,
  n_concessive_clauses,
  n_causal_clauses,
  n_consecutive_clauses,
  n_relative_clauses,
  n_temporal_clauses,
  n_conditional_clauses,
  n_quote_marks,
  n_question_marks,
  n_abstract_nouns,
  n_modal_verbs,
  n_state_verbs,
  n_high_modality,
  n_assertion_opinion,
  fear,
  surprise,
  anger,
  hope,
  disgust,
  happiness,
  sadness,
  trust,
  negative,
  positive,
  avg_sentence_length,
};

inline constexpr std::size_t kCountFeatures = 34;
inline constexpr std::size_t kFeatureCount = 35; // counts + avg_sentence_length

std::string_view feature_name(Feature f);
std::optional<Feature> parse_feature(std::string_view name);
inline Feature feature_at(std::size_t i) { return static_cast<Feature>(i); }
inline bool is_punctuation(Feature f) { return f == Feature::n_quote_marks || f == Feature::n_question_marks; }

struct FeatureVector {
  std::array<std::uint32_t, kCountFeatures> counts{};
  std::uint32_t n_tokens = 0;
  std::uint32_t n_sentences = 0;
  double avg_sentence_length = 0.0;
  /// Bit i set when LexiconRole i had no lexicon for the message language.
  std::uint32_t missing_roles = 0;

  std::uint32_t& operator[](Feature f) { return counts[static_cast<std::size_t>(f)]; }
  std::uint32_t operator[](Feature f) const { return counts[static_cast<std::size_t>(f)]; }
  /// Any of the 35 features as a real value.
  double value(Feature f) const;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

FeatureVector extract_features(std::string_view text, std::string_view lang, const LexiconSet& lexicons);
FeatureVector extract_features(const TokenizedText& tokens, std::string_view text, std::string_view lang,
                               const LexiconSet& lexicons);
inline FeatureVector extract_features(const Message& m, const LexiconSet& lexicons) {
  return extract_features(m.text, m.lang, lexicons);
}

enum class Weighting { per_message, per_token };

struct FeatureRates {
  std::array<double, kFeatureCount> values{};
  std::size_t n_messages = 0;
  double operator[](Feature f) const { return values[static_cast<std::size_t>(f)]; }
};

/// per_message: mean raw count; per_token: sum(count) / sum(n_tokens).
/// avg_sentence_length is always the message mean. Throws ArgumentError on empty input.
FeatureRates aggregate_features(std::span<const FeatureVector> vectors, Weighting weighting);

/// count / n_tokens for counts (0 when the message has no tokens), raw value for avg_sentence_length.
std::array<double, kFeatureCount> per_token_rates(const FeatureVector& v);

} // namespace stormscope
