#include "doctest.h"

#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "stormscope/error.hpp"
#include "stormscope/features.hpp"
#include "stormscope/rng.hpp"
#include "stormscope/text.hpp"

using namespace stormscope;

namespace {

const LexiconSet& fixture_lexicons() {
  static const LexiconSet set = LexiconSet::load_directory(STORMSCOPE_TEST_DATA "/fixture_lexicons");
  return set;
}

struct FixtureLine {
  std::string sentence;
  std::map<std::string, std::uint32_t> expected;
};

std::vector<FixtureLine> load_fixture() {
  std::ifstream in(STORMSCOPE_TEST_DATA "/feature_fixture.tsv");
  REQUIRE(in);
  std::vector<FixtureLine> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    REQUIRE(tab != std::string::npos);
    FixtureLine f{line.substr(0, tab), {}};
    for (const auto& item : text::split(line.substr(tab + 1), ';')) {
      const auto eq = item.find('=');
      REQUIRE(eq != std::string::npos);
      f.expected[std::string(item.substr(0, eq))] = static_cast<std::uint32_t>(std::stoul(std::string(item.substr(eq + 1))));
    }
    out.push_back(std::move(f));
  }
  return out;
}

// Expected vector built only from the hand annotation.
FeatureVector expected_vector(const std::map<std::string, std::uint32_t>& counts, std::uint32_t n_sentences) {
  FeatureVector v;
  for (const auto& [name, n] : counts) {
    if (name == "n_tokens") {
      v.n_tokens = n;
      continue;
    }
    const auto f = parse_feature(name);
    REQUIRE_MESSAGE(f.has_value(), name);
    REQUIRE(*f != Feature::avg_sentence_length);
    v[*f] = n;
  }
  v.n_sentences = n_sentences;
  v.avg_sentence_length = n_sentences ? static_cast<double>(v.n_tokens) / n_sentences : 0.0;
  return v;
}

void check_equal(const FeatureVector& got, const FeatureVector& want, const std::string& context) {
  for (std::size_t i = 0; i < kCountFeatures; ++i)
    CHECK_MESSAGE(got.counts[i] == want.counts[i], context, " : ", feature_name(feature_at(i)));
  CHECK_MESSAGE(got.n_tokens == want.n_tokens, context);
  CHECK_MESSAGE(got.n_sentences == want.n_sentences, context);
  CHECK_MESSAGE(got.avg_sentence_length == doctest::Approx(want.avg_sentence_length).epsilon(1e-12), context);
}

} // namespace

TEST_CASE("feature names round trip in canonical order") {
  CHECK(feature_name(Feature::n_adverbs) == "n_adverbs");
  CHECK(feature_name(Feature::positive) == "positive");
  CHECK(feature_name(Feature::avg_sentence_length) == "avg_sentence_length");
  for (std::size_t i = 0; i < kFeatureCount; ++i) CHECK(parse_feature(feature_name(feature_at(i))) == feature_at(i));
  CHECK_FALSE(parse_feature("n_dative_verbs").has_value());
}

TEST_CASE("hand-annotated fixture matches sentence by sentence") {
  const auto lines = load_fixture();
  REQUIRE(lines.size() == 30);
  for (const auto& l : lines) {
    const auto got = extract_features(l.sentence, "en", fixture_lexicons());
    check_equal(got, expected_vector(l.expected, 1), l.sentence);
    CHECK(got.missing_roles == 0);
  }
}

TEST_CASE("hand-annotated fixture document is exactly additive") {
  const auto lines = load_fixture();
  std::string doc;
  std::map<std::string, std::uint32_t> total;
  for (const auto& l : lines) {
    if (!doc.empty()) doc += ' ';
    doc += l.sentence;
    for (const auto& [k, v] : l.expected) total[k] += v;
  }
  const auto got = extract_features(doc, "en", fixture_lexicons());
  check_equal(got, expected_vector(total, static_cast<std::uint32_t>(lines.size())), "document");
}

TEST_CASE("marker examples") {
  const auto v = extract_features("He is loved although nobody says so.", "en", fixture_lexicons());
  CHECK(v[Feature::n_passive_forms] == 1);
  CHECK(v[Feature::n_concessive_clauses] == 1);

  const auto empty = extract_features("", "en", fixture_lexicons());
  CHECK(empty == FeatureVector{});
  CHECK(empty.avg_sentence_length == 0.0);
}

TEST_CASE("missing lexicons are flagged and count zero") {
  const auto v = extract_features("I am so angry and sad.", "fr", fixture_lexicons());
  CHECK(v.missing_roles == (1u << kLexiconRoleCount) - 1);
  CHECK(v[Feature::anger] == 0);
  CHECK(v.n_tokens == 6);

  // Regional subtag falls back to the primary language.
  const auto gb = extract_features("I am so angry and sad.", "en-GB", fixture_lexicons());
  CHECK(gb.missing_roles == 0);
  CHECK(gb[Feature::anger] == 1);
}

TEST_CASE("extraction is deterministic and monotone under appending") {
  const auto lines = load_fixture();
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::string a;
    FeatureVector prev;
    const auto n = 1 + rng.below(6);
    for (std::uint64_t i = 0; i < n; ++i) {
      if (!a.empty()) a += ' ';
      a += lines[rng.below(lines.size())].sentence;
      const auto cur = extract_features(a, "en", fixture_lexicons());
      CHECK(cur == extract_features(a, "en", fixture_lexicons()));
      for (std::size_t k = 0; k < kCountFeatures; ++k) CHECK(cur.counts[k] >= prev.counts[k]);
      CHECK(cur.n_tokens >= prev.n_tokens);
      prev = cur;
    }
  }
}

TEST_CASE("concatenation of unterminated text stays within the boundary bound") {
  const std::vector<std::string> parts = {"but he said", "so what if", "Elon and the people", "which is good",
                                          "they were banned"};
  for (const auto& a : parts)
    for (const auto& b : parts) {
      const auto fa = extract_features(a, "en", fixture_lexicons());
      const auto fb = extract_features(b, "en", fixture_lexicons());
      const auto fab = extract_features(a + " " + b, "en", fixture_lexicons());
      for (std::size_t k = 0; k < kCountFeatures; ++k)
        CHECK(static_cast<long>(fab.counts[k]) >= static_cast<long>(fa.counts[k] + fb.counts[k]) - 35);
    }
}

TEST_CASE("counts never exceed token totals except punctuation") {
  for (const auto& l : load_fixture()) {
    const auto v = extract_features(l.sentence + " " + l.sentence, "en", fixture_lexicons());
    for (std::size_t k = 0; k < kCountFeatures; ++k)
      if (!is_punctuation(feature_at(k))) CHECK(v.counts[k] <= v.n_tokens);
  }
}

TEST_CASE("aggregate_features examples") {
  FeatureVector a, b;
  a[Feature::n_conjunctions] = 2;
  a.n_tokens = 10;
  a.avg_sentence_length = 5.0;
  b[Feature::n_conjunctions] = 4;
  b.n_tokens = 30;
  b.avg_sentence_length = 10.0;
  const std::vector<FeatureVector> v{a, b};
  CHECK(aggregate_features(v, Weighting::per_message)[Feature::n_conjunctions] == 3.0);
  CHECK(aggregate_features(v, Weighting::per_message)[Feature::avg_sentence_length] == 7.5);
  CHECK(aggregate_features(v, Weighting::per_token)[Feature::avg_sentence_length] == 7.5);

  b[Feature::n_conjunctions] = 0;
  const std::vector<FeatureVector> w{a, b};
  CHECK(aggregate_features(w, Weighting::per_token)[Feature::n_conjunctions] == doctest::Approx(0.05).epsilon(1e-15));

  CHECK_THROWS_AS(aggregate_features(std::span<const FeatureVector>{}, Weighting::per_message), ArgumentError);
}

TEST_CASE("aggregate_features matches a two-pass oracle") {
  Rng rng(2024);
  std::vector<FeatureVector> vs(100);
  for (auto& v : vs) {
    v.n_tokens = static_cast<std::uint32_t>(1 + rng.below(200));
    v.n_sentences = static_cast<std::uint32_t>(1 + rng.below(10));
    v.avg_sentence_length = static_cast<double>(v.n_tokens) / v.n_sentences;
    for (auto& c : v.counts) c = static_cast<std::uint32_t>(rng.below(v.n_tokens + 1));
  }
  const auto pm = aggregate_features(vs, Weighting::per_message);
  const auto pt = aggregate_features(vs, Weighting::per_token);
  CHECK(pm.n_messages == 100);
  for (std::size_t k = 0; k < kFeatureCount; ++k) {
    // pass 1: mean; pass 2: mean of residuals as a correction term
    long double sum = 0, tokens = 0, tok_sum = 0;
    for (const auto& v : vs) {
      sum += v.value(feature_at(k));
      tokens += v.n_tokens;
      tok_sum += v.value(feature_at(k));
    }
    long double mean = sum / vs.size();
    long double resid = 0;
    for (const auto& v : vs) resid += v.value(feature_at(k)) - mean;
    mean += resid / vs.size();
    CHECK(pm.values[k] == doctest::Approx(static_cast<double>(mean)).epsilon(1e-12));
    const double want_pt = k == kCountFeatures ? static_cast<double>(mean) : static_cast<double>(tok_sum / tokens);
    CHECK(pt.values[k] == doctest::Approx(want_pt).epsilon(1e-12));
  }
}

TEST_CASE("per_token aggregate of one vector equals count over tokens exactly") {
  const auto v = extract_features("Why do they hate Elon so much??? They believe the claim.", "en", fixture_lexicons());
  const std::vector<FeatureVector> one{v};
  const auto agg = aggregate_features(one, Weighting::per_token);
  const auto rates = per_token_rates(v);
  for (std::size_t k = 0; k < kCountFeatures; ++k) {
    CHECK(agg.values[k] == static_cast<double>(v.counts[k]) / v.n_tokens);
    CHECK(rates[k] == agg.values[k]);
  }
  CHECK(rates[kCountFeatures] == v.avg_sentence_length);
}
