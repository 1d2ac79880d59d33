#include "stormscope/kernels.hpp"

#include <omp.h>

#include "stormscope/tokenize.hpp"

namespace stormscope::kernels {

namespace {

bool has_toxic_token(const Message& m, const Lexicon* lex) {
  if (lex == nullptr || lex->empty()) return false;
  for (const auto& tok : tokenize(m.text, m.lang).tokens)
    if (lex->contains(tok.lower)) return true;
  return false;
}

void tally_message(const Message& m, EmojiHashtagTally& out) {
  const auto tt = tokenize(m.text, m.lang);
  for (const auto& e : tt.emojis) out.emojis[e.emoji] += e.count;
  for (const auto& h : tt.hashtags) ++out.hashtags[h];
}

void merge(EmojiHashtagTally& into, const EmojiHashtagTally& from) {
  for (const auto& [k, n] : from.emojis) into.emojis[k] += n;
  for (const auto& [k, n] : from.hashtags) into.hashtags[k] += n;
}

} // namespace

namespace serial {

std::vector<FeatureVector> extract_features(const Corpus& corpus, const LexiconSet& lexicons) {
  std::vector<FeatureVector> out;
  out.reserve(corpus.size());
  for (const auto& m : corpus.messages) out.push_back(stormscope::extract_features(m, lexicons));
  return out;
}

std::vector<std::uint8_t> toxic_flags(const Corpus& corpus, const Lexicon& toxicity) {
  std::vector<std::uint8_t> out;
  out.reserve(corpus.size());
  for (const auto& m : corpus.messages) out.push_back(has_toxic_token(m, &toxicity));
  return out;
}

std::vector<std::uint8_t> toxic_flags(const Corpus& corpus, const LexiconSet& lexicons) {
  std::vector<std::uint8_t> out;
  out.reserve(corpus.size());
  for (const auto& m : corpus.messages) out.push_back(has_toxic_token(m, lexicons.find(m.lang, LexiconRole::toxicity)));
  return out;
}

EmojiHashtagTally emoji_hashtag_tally(const Corpus& corpus) {
  EmojiHashtagTally out;
  for (const auto& m : corpus.messages) tally_message(m, out);
  return out;
}

} // namespace serial

namespace omp {

std::vector<FeatureVector> extract_features(const Corpus& corpus, const LexiconSet& lexicons) {
  const auto n = static_cast<std::int64_t>(corpus.size());
  std::vector<FeatureVector> out(corpus.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t i = 0; i < n; ++i) out[i] = stormscope::extract_features(corpus.messages[i], lexicons);
  return out;
}

std::vector<std::uint8_t> toxic_flags(const Corpus& corpus, const Lexicon& toxicity) {
  const auto n = static_cast<std::int64_t>(corpus.size());
  std::vector<std::uint8_t> out(corpus.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t i = 0; i < n; ++i) out[i] = has_toxic_token(corpus.messages[i], &toxicity);
  return out;
}

std::vector<std::uint8_t> toxic_flags(const Corpus& corpus, const LexiconSet& lexicons) {
  const auto n = static_cast<std::int64_t>(corpus.size());
  std::vector<std::uint8_t> out(corpus.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto& m = corpus.messages[i];
    out[i] = has_toxic_token(m, lexicons.find(m.lang, LexiconRole::toxicity));
  }
  return out;
}

EmojiHashtagTally emoji_hashtag_tally(const Corpus& corpus) {
  const auto n = static_cast<std::int64_t>(corpus.size());
  std::vector<EmojiHashtagTally> partial(static_cast<std::size_t>(omp_get_max_threads()));
#pragma omp parallel
  {
    auto& local = partial[static_cast<std::size_t>(omp_get_thread_num())];
#pragma omp for schedule(dynamic, 64)
    for (std::int64_t i = 0; i < n; ++i) tally_message(corpus.messages[i], local);
  }
  // Sums commute, so the merge order does not matter.
  EmojiHashtagTally out;
  for (const auto& p : partial) merge(out, p);
  return out;
}

} // namespace omp

} // namespace stormscope::kernels
