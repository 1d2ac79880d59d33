#include "doctest.h"

#include <sstream>

#include "stormscope/error.hpp"
#include "stormscope/lexicon.hpp"
#include "stormscope/rng.hpp"

using namespace stormscope;

namespace {
Lexicon load(const std::string& s) {
  std::istringstream in(s);
  return load_lexicon(in, "test", "en");
}
} // namespace

TEST_CASE("load_lexicon basics") {
  auto lex = load("# comment\nangry\tanger,negative\n");
  CHECK(lex.tags("angry") == std::vector<std::string>{"anger", "negative"});

  auto merged = load("fear\tfear\nFear\tnegative\n");
  CHECK(merged.tags("fear") == std::vector<std::string>{"fear", "negative"});
  CHECK(merged.size() == 1);

  auto nfc = load("Gru\xCC\x88n\tpositive\n"); // "Grün" with a combining diaeresis
  CHECK(nfc.contains("gr\xC3\xBCn"));
}

TEST_CASE("load_lexicon errors carry line numbers") {
  auto expect = [](const std::string& input, const std::string& needle) {
    try {
      load(input);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK_MESSAGE(std::string(e.what()).find(needle) != std::string::npos, e.what());
    }
  };
  expect("ok\ttag\nbadword\n", "line 2");
  expect(" \ttag\n", "empty term at line 1");
  expect("word\t  \n", "empty tag list at line 1");
  expect("word\ta,,b\n", "empty tag at line 1");
  expect("#! tags: a,b\nword\tc\n", "line 2");
}

TEST_CASE("match_tokens") {
  auto lex = load("#! tags: fear,anger,negative,positive\nfear\tfear,negative\nwar\tanger,negative\n");
  std::vector<std::string> tokens{"i", "fear", "war"};
  auto counts = match_tokens(tokens, lex);
  CHECK(counts == TagCounts{{"anger", 1}, {"fear", 1}, {"negative", 2}, {"positive", 0}});
  auto empty = match_tokens(std::vector<std::string>{}, lex);
  for (const auto& [tag, n] : empty) CHECK(n == 0);
  CHECK(empty.size() == 4);
}

TEST_CASE("match_tokens equals a naive double loop on random data") {
  Rng rng(2024);
  const std::vector<std::string> tag_pool{"t0", "t1", "t2", "t3", "t4", "t5", "t6"};
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<std::pair<std::string, std::vector<std::string>>> entries;
    std::ostringstream src;
    for (int e = 0; e < 100; ++e) {
      std::string term = "w" + std::to_string(rng.below(150));
      std::vector<std::string> tags;
      const auto k = 1 + rng.below(3);
      for (std::uint64_t t = 0; t < k; ++t) tags.push_back(tag_pool[rng.below(tag_pool.size())]);
      src << term << '\t';
      for (std::size_t t = 0; t < tags.size(); ++t) src << (t ? "," : "") << tags[t];
      src << '\n';
      entries.emplace_back(term, tags);
    }
    const auto lex = load(src.str());
    std::vector<std::string> tokens;
    for (int i = 0; i < 1000; ++i) tokens.push_back("w" + std::to_string(rng.below(200)));

    // Oracle: for every tag, for every token, does any line with this term list the tag?
    std::map<std::string, std::size_t> oracle;
    for (const auto& tag : lex.tag_universe()) {
      std::size_t n = 0;
      for (const auto& tok : tokens) {
        bool hit = false;
        for (const auto& [term, tags] : entries)
          if (term == tok && std::find(tags.begin(), tags.end(), tag) != tags.end()) hit = true;
        n += hit ? 1 : 0;
      }
      oracle[tag] = n;
    }
    const auto counts = match_tokens(tokens, lex);
    CHECK(counts == TagCounts(oracle.begin(), oracle.end()));

    // Multiset operation: order of tokens does not matter.
    rng.shuffle(std::span<std::string>(tokens));
    CHECK(match_tokens(tokens, lex) == counts);

    std::size_t matched = 0, sum = 0;
    for (const auto& tok : tokens) matched += lex.contains(tok) ? 1 : 0;
    for (const auto& [_, n] : counts) sum += n;
    CHECK(sum >= matched);
  }
}

TEST_CASE("single-tag lexicon: tag sum equals matched tokens") {
  auto lex = load("a\tx\nb\ty\nc\tx\n");
  std::vector<std::string> tokens{"a", "b", "c", "d", "a"};
  std::size_t sum = 0;
  for (const auto& [_, n] : match_tokens(tokens, lex)) sum += n;
  CHECK(sum == 4);
}

TEST_CASE("LexiconSet directory loading and missing roles") {
  const auto set = LexiconSet::load_directory(std::string(STORMSCOPE_TEST_DATA) + "/fixture_lexicons");
  CHECK(set.find("en", LexiconRole::emotion) != nullptr);
  CHECK(set.find("en-GB", LexiconRole::emotion) != nullptr);
  CHECK(set.find("fr", LexiconRole::emotion) == nullptr);
  CHECK(set.missing_roles("en").empty());
  CHECK(set.missing_roles("fr").size() == kLexiconRoleCount);
  CHECK_THROWS_AS(LexiconSet::load_directory("/nonexistent/dir"), DataError);
}

TEST_CASE("shipped demo lexicons load for en and de") {
  const auto set = LexiconSet::load_directory(std::string(STORMSCOPE_REPO_DATA) + "/lexicons");
  for (const char* lang : {"en", "de"}) {
    CAPTURE(lang);
    CHECK(set.missing_roles(lang).empty());
    const auto* emo = set.find(lang, LexiconRole::emotion);
    REQUIRE(emo != nullptr);
    CHECK(emo->tag_universe().size() == 10);
  }
}
