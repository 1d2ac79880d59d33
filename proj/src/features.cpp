#include "stormscope/features.hpp"

#include <algorithm>

#include "stormscope/error.hpp"
#include "stormscope/text.hpp"

namespace stormscope {

namespace {

constexpr std::string_view kFeatureNames[kFeatureCount] = {
    "n_adverbs",           "n_adjectives",          "n_verbs",
    "n_proper_nouns",      "n_conjunctions",        "n_negations",
    "n_comparatives",      "n_superlatives",        "n_personal_pronouns",
    "n_passive_forms",     "n_contrastive_but",     "n_concessive_clauses",
    "n_causal_clauses",    "n_consecutive_clauses", "n_relative_clauses",
    "n_temporal_clauses",  "n_conditional_clauses", "n_quote_marks",
    "n_question_marks",    "n_abstract_nouns",      "n_modal_verbs",
    "n_state_verbs",       "n_high_modality",       "n_assertion_opinion",
    "fear",                "surprise",              "anger",
    "hope",                "disgust",               "happiness",
    "sadness",             "trust",                 "negative",
    "positive",            "avg_sentence_length",
};

constexpr Feature kEmotionFeatures[] = {Feature::fear,    Feature::surprise,  Feature::anger,
                                        Feature::hope,    Feature::disgust,   Feature::happiness,
                                        Feature::sadness, Feature::trust,     Feature::negative,
                                        Feature::positive};

struct SuffixRule {
  std::string_view suffix;
  std::size_t min_length; // in code points
};

// Heuristics for tokens absent from the pos_hint lexicon.
struct SuffixRules {
  std::vector<SuffixRule> adverb;
  std::vector<SuffixRule> adjective;
  std::vector<SuffixRule> verb;
  std::vector<SuffixRule> participle;
  std::vector<SuffixRule> superlative;
  std::vector<std::string_view> participle_prefix; // prefix + participle suffix, e.g. ge...t
  std::vector<std::string_view> negation_suffix;
  bool capitalized_proper_nouns = true;
};

const SuffixRules& rules_for(std::string_view lang) {
  static const SuffixRules english{
      .adverb = {{"ly", 5}},
      .adjective = {{"ous", 6}, {"ful", 6}, {"ive", 6}, {"able", 6}, {"ible", 6}, {"less", 6}},
      .verb = {{"ing", 6}, {"ed", 5}},
      .participle = {{"ed", 5}},
      .superlative = {{"est", 7}},
      .participle_prefix = {},
      .negation_suffix = {"n't", "n’t"},
      .capitalized_proper_nouns = true,
  };
  static const SuffixRules german{
      .adverb = {{"weise", 8}},
      .adjective = {{"lich", 6}, {"isch", 6}, {"bar", 6}, {"los", 6}, {"haft", 6}},
      .verb = {{"ieren", 7}},
      .participle = {},
      .superlative = {{"sten", 7}},
      .participle_prefix = {"ge"},
      .negation_suffix = {},
      .capitalized_proper_nouns = false,
  };
  static const SuffixRules other{};
  const auto primary = primary_language(lang);
  if (primary == "en") return english;
  if (primary == "de") return german;
  return other;
}

std::size_t cp_length(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++n;
  return n;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool matches(const std::vector<SuffixRule>& rules, std::string_view w) {
  return std::any_of(rules.begin(), rules.end(), [&](const SuffixRule& r) {
    return cp_length(w) >= r.min_length && ends_with(w, r.suffix);
  });
}

bool is_plain_word(std::string_view w) {
  if (w.empty() || w.front() == '#' || w.front() == '@') return false;
  return !std::all_of(w.begin(), w.end(), [](char c) { return c >= '0' && c <= '9'; });
}

// Tag ids resolved once per message for the lexicons that are present.
struct Resolved {
  const Lexicon* pos = nullptr;
  std::optional<TagId> adverb, adjective, verb, proper_noun, noun, comparative, superlative, participle, aux_passive;
  const Lexicon* markers = nullptr;
  std::optional<TagId> contrastive, concessive, causal, consecutive, relative, temporal, conditional;
  const Lexicon* modality = nullptr;
  std::optional<TagId> modal_verb, high_modality;
  const Lexicon* pronoun = nullptr;
  std::optional<TagId> personal;
  const Lexicon* emotion = nullptr;
  std::array<std::optional<TagId>, 10> emotions{};
  const Lexicon* negation = nullptr;
  const Lexicon* conjunction = nullptr;
  const Lexicon* abstract = nullptr;
  const Lexicon* state = nullptr;
  const Lexicon* assertion = nullptr;
  std::uint32_t missing = 0;

  static bool has(const Lexicon* lex, std::string_view w, const std::optional<TagId>& tag) {
    return lex != nullptr && tag && lex->has_tag(w, *tag);
  }
  static bool in(const Lexicon* lex, std::string_view w) { return lex != nullptr && lex->contains(w); }
};

Resolved resolve(const LexiconSet& set, std::string_view lang) {
  Resolved r;
  auto get = [&](LexiconRole role) {
    const Lexicon* lex = set.find(lang, role);
    if (lex == nullptr) r.missing |= 1u << static_cast<unsigned>(role);
    return lex;
  };
  auto tag = [](const Lexicon* lex, std::string_view name) -> std::optional<TagId> {
    return lex ? lex->tag_id(name) : std::nullopt;
  };
  r.pos = get(LexiconRole::pos_hint);
  r.adverb = tag(r.pos, "adverb");
  r.adjective = tag(r.pos, "adjective");
  r.verb = tag(r.pos, "verb");
  r.proper_noun = tag(r.pos, "proper_noun");
  r.noun = tag(r.pos, "noun");
  r.comparative = tag(r.pos, "comparative");
  r.superlative = tag(r.pos, "superlative");
  r.participle = tag(r.pos, "participle");
  r.aux_passive = tag(r.pos, "aux_passive");
  r.markers = get(LexiconRole::clause_marker);
  r.contrastive = tag(r.markers, "contrastive");
  r.concessive = tag(r.markers, "concessive");
  r.causal = tag(r.markers, "causal");
  r.consecutive = tag(r.markers, "consecutive");
  r.relative = tag(r.markers, "relative");
  r.temporal = tag(r.markers, "temporal");
  r.conditional = tag(r.markers, "conditional");
  r.modality = get(LexiconRole::modality);
  r.modal_verb = tag(r.modality, "modal_verb");
  r.high_modality = tag(r.modality, "high_modality");
  r.pronoun = get(LexiconRole::pronoun);
  r.personal = tag(r.pronoun, "personal");
  r.emotion = get(LexiconRole::emotion);
  for (std::size_t i = 0; i < 10; ++i) r.emotions[i] = tag(r.emotion, feature_name(kEmotionFeatures[i]));
  r.negation = get(LexiconRole::negation);
  r.conjunction = get(LexiconRole::conjunction);
  r.abstract = get(LexiconRole::abstract_noun);
  r.state = get(LexiconRole::state_verb);
  r.assertion = get(LexiconRole::assertion_opinion);
  get(LexiconRole::toxicity);
  return r;
}

bool comma_between(std::string_view text, std::size_t from, std::size_t to) {
  return from < to && text.substr(from, to - from).find(',') != std::string_view::npos;
}

} // namespace

std::string_view feature_name(Feature f) { return kFeatureNames[static_cast<std::size_t>(f)]; }

std::optional<Feature> parse_feature(std::string_view name) {
  for (std::size_t i = 0; i < kFeatureCount; ++i)
    if (kFeatureNames[i] == name) return static_cast<Feature>(i);
  return std::nullopt;
}

double FeatureVector::value(Feature f) const {
  if (f == Feature::avg_sentence_length) return avg_sentence_length;
  return static_cast<double>(counts[static_cast<std::size_t>(f)]);
}

FeatureVector extract_features(std::string_view text, std::string_view lang, const LexiconSet& lexicons) {
  return extract_features(tokenize(text, lang), text, lang, lexicons);
}

FeatureVector extract_features(const TokenizedText& tt, std::string_view text, std::string_view lang,
                               const LexiconSet& lexicons) {
  FeatureVector fv;
  const Resolved lx = resolve(lexicons, lang);
  const SuffixRules& rules = rules_for(lang);
  fv.missing_roles = lx.missing;
  fv.n_tokens = static_cast<std::uint32_t>(tt.tokens.size());
  fv.n_sentences = static_cast<std::uint32_t>(tt.sentences.size());
  fv.avg_sentence_length = fv.n_sentences > 0 ? static_cast<double>(fv.n_tokens) / fv.n_sentences : 0.0;
  fv[Feature::n_quote_marks] = static_cast<std::uint32_t>(tt.quote_marks);
  fv[Feature::n_question_marks] = static_cast<std::uint32_t>(tt.question_marks);

  const auto n = tt.tokens.size();
  std::vector<bool> participle(n, false);
  std::vector<bool> proper(n, false);
  std::vector<bool> noun_like(n, false);

  for (const auto& sentence : tt.sentences) {
    for (std::size_t i = sentence.begin; i < sentence.end; ++i) {
      const auto& tok = tt.tokens[i];
      const std::string_view w = tok.lower;
      // Suffix heuristics are for open-class words only.
      const bool closed_class = Resolved::in(lx.pos, w) || Resolved::in(lx.negation, w) ||
                                Resolved::in(lx.conjunction, w) || Resolved::in(lx.pronoun, w) ||
                                Resolved::in(lx.markers, w);
      const bool heuristic = !closed_class && is_plain_word(w);

      if (Resolved::has(lx.pos, w, lx.adverb) || (heuristic && matches(rules.adverb, w))) ++fv[Feature::n_adverbs];
      if (Resolved::has(lx.pos, w, lx.adjective) || (heuristic && matches(rules.adjective, w)))
        ++fv[Feature::n_adjectives];

      const bool ge_participle =
          heuristic && std::any_of(rules.participle_prefix.begin(), rules.participle_prefix.end(),
                                   [&](std::string_view p) {
                                     return w.substr(0, p.size()) == p && cp_length(w) >= 6 &&
                                            (ends_with(w, "t") || ends_with(w, "en"));
                                   });
      if (Resolved::has(lx.pos, w, lx.verb) || (heuristic && matches(rules.verb, w)) || ge_participle)
        ++fv[Feature::n_verbs];
      participle[i] =
          Resolved::has(lx.pos, w, lx.participle) || (heuristic && matches(rules.participle, w)) || ge_participle;

      const auto first = text::decode_utf8(tok.surface);
      const bool capitalized = !first.empty() && text::is_upper(first.front().value);
      proper[i] = Resolved::has(lx.pos, w, lx.proper_noun) ||
                  (rules.capitalized_proper_nouns && i != sentence.begin && capitalized && heuristic &&
                   !Resolved::in(lx.pronoun, w));
      if (proper[i]) ++fv[Feature::n_proper_nouns];
      noun_like[i] = proper[i] || Resolved::has(lx.pos, w, lx.noun) || Resolved::in(lx.abstract, w);

      if (Resolved::in(lx.conjunction, w)) ++fv[Feature::n_conjunctions];
      if (Resolved::in(lx.negation, w) ||
          std::any_of(rules.negation_suffix.begin(), rules.negation_suffix.end(),
                      [&](std::string_view s) { return ends_with(w, s); }))
        ++fv[Feature::n_negations];
      if (Resolved::has(lx.pos, w, lx.comparative)) ++fv[Feature::n_comparatives];
      if (Resolved::has(lx.pos, w, lx.superlative) || (heuristic && matches(rules.superlative, w)))
        ++fv[Feature::n_superlatives];
      if (Resolved::has(lx.pronoun, w, lx.personal)) ++fv[Feature::n_personal_pronouns];

      if (Resolved::in(lx.abstract, w)) ++fv[Feature::n_abstract_nouns];
      if (Resolved::has(lx.modality, w, lx.modal_verb)) ++fv[Feature::n_modal_verbs];
      if (Resolved::has(lx.modality, w, lx.high_modality)) ++fv[Feature::n_high_modality];
      if (Resolved::in(lx.state, w)) ++fv[Feature::n_state_verbs];
      if (Resolved::in(lx.assertion, w)) ++fv[Feature::n_assertion_opinion];
      for (std::size_t e = 0; e < 10; ++e)
        if (Resolved::has(lx.emotion, w, lx.emotions[e])) ++fv[kEmotionFeatures[e]];
    }

    // Second pass: rules that look at neighbouring tokens.
    for (std::size_t i = sentence.begin; i < sentence.end; ++i) {
      const std::string_view w = tt.tokens[i].lower;
      const bool has_next = i + 1 < sentence.end;
      const bool initial = i == sentence.begin;

      if (Resolved::has(lx.pos, w, lx.aux_passive)) {
        for (std::size_t k = i + 1; k < std::min(sentence.end, i + 4); ++k) {
          if (participle[k]) {
            ++fv[Feature::n_passive_forms];
            break;
          }
        }
      }
      if (lx.markers == nullptr) continue;
      if (Resolved::has(lx.markers, w, lx.contrastive) && (!initial || sentence.size() >= 3))
        ++fv[Feature::n_contrastive_but];
      if (!has_next) continue;
      if (Resolved::has(lx.markers, w, lx.concessive)) ++fv[Feature::n_concessive_clauses];
      if (Resolved::has(lx.markers, w, lx.causal)) ++fv[Feature::n_causal_clauses];
      if (Resolved::has(lx.markers, w, lx.consecutive)) ++fv[Feature::n_consecutive_clauses];
      if (Resolved::has(lx.markers, w, lx.temporal)) ++fv[Feature::n_temporal_clauses];
      if (Resolved::has(lx.markers, w, lx.conditional)) ++fv[Feature::n_conditional_clauses];
      if (Resolved::has(lx.markers, w, lx.relative) && !initial &&
          (noun_like[i - 1] || comma_between(text, tt.tokens[i - 1].end, tt.tokens[i].begin)))
        ++fv[Feature::n_relative_clauses];
    }
  }
  return fv;
}

std::array<double, kFeatureCount> per_token_rates(const FeatureVector& v) {
  std::array<double, kFeatureCount> out{};
  for (std::size_t i = 0; i < kCountFeatures; ++i)
    out[i] = v.n_tokens > 0 ? static_cast<double>(v.counts[i]) / v.n_tokens : 0.0;
  out[kCountFeatures] = v.avg_sentence_length;
  return out;
}

FeatureRates aggregate_features(std::span<const FeatureVector> vectors, Weighting weighting) {
  if (vectors.empty()) throw ArgumentError("aggregate_features: empty input");
  FeatureRates r;
  r.n_messages = vectors.size();
  std::array<double, kCountFeatures> sums{};
  double tokens = 0.0;
  double length_sum = 0.0;
  for (const auto& v : vectors) {
    for (std::size_t i = 0; i < kCountFeatures; ++i) sums[i] += v.counts[i];
    tokens += v.n_tokens;
    length_sum += v.avg_sentence_length;
  }
  const double denom = weighting == Weighting::per_message ? static_cast<double>(vectors.size()) : tokens;
  for (std::size_t i = 0; i < kCountFeatures; ++i) r.values[i] = denom > 0.0 ? sums[i] / denom : 0.0;
  r.values[kCountFeatures] = length_sum / static_cast<double>(vectors.size());
  return r;
}

} // namespace stormscope
