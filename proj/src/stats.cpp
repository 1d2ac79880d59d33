#include "stormscope/stats.hpp"

#include <algorithm>
#include <unordered_map>

#include "stormscope/error.hpp"
#include "stormscope/kernels.hpp"

namespace stormscope {

ParticipationStats participation_stats(const Corpus& corpus) {
  ParticipationStats s;
  std::unordered_map<std::string_view, std::size_t> per_author;
  for (const auto& m : corpus.messages) {
    if (!m.author_id) {
      ++s.n_without_author;
      continue;
    }
    ++per_author[*m.author_id];
    ++s.n_authored_messages;
  }
  if (per_author.empty()) throw DataError("participation_stats: no message carries an author_id");
  std::size_t gt1 = 0, gt2 = 0;
  for (const auto& [_, n] : per_author) {
    gt1 += n > 1;
    gt2 += n > 2;
  }
  s.n_authors = per_author.size();
  s.frac_gt1 = static_cast<double>(gt1) / s.n_authors;
  s.frac_gt2 = static_cast<double>(gt2) / s.n_authors;
  return s;
}

double toxicity_share(const Corpus& corpus, const Lexicon& toxicity) {
  if (corpus.empty()) return 0.0;
  const auto flags = kernels::omp::toxic_flags(corpus, toxicity);
  const auto hits = std::count(flags.begin(), flags.end(), std::uint8_t{1});
  return static_cast<double>(hits) / static_cast<double>(flags.size());
}

ToxicityReport toxicity_report(const Corpus& corpus, std::span<const std::uint8_t> flags,
                               const TimelineSeries& series) {
  if (flags.size() != corpus.size() || series.message_bins.size() != corpus.size())
    throw ArgumentError("toxicity_report: flags and series must match the corpus");
  ToxicityReport r;
  r.n_messages = corpus.size();
  r.bin_flagged.assign(series.size(), 0);
  r.bin_total.assign(series.size(), 0);
  for (std::size_t i = 0; i < flags.size(); ++i) {
    const auto b = series.message_bins[i];
    ++r.bin_total[b];
    if (flags[i]) {
      ++r.bin_flagged[b];
      ++r.n_flagged;
    }
  }
  r.share = r.n_messages ? static_cast<double>(r.n_flagged) / r.n_messages : 0.0;
  r.bin_share.resize(series.size());
  for (std::size_t b = 0; b < series.size(); ++b)
    r.bin_share[b] = r.bin_total[b] ? static_cast<double>(r.bin_flagged[b]) / r.bin_total[b] : 0.0;
  return r;
}

FrequencyTable to_frequency_table(const std::map<std::string, std::size_t>& tally) {
  FrequencyTable t(tally.begin(), tally.end());
  // UTF-8 byte order equals code point order, and the map is already in byte order.
  std::stable_sort(t.begin(), t.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  return t;
}

FrequencyTable emoji_table(const Corpus& corpus) {
  return to_frequency_table(kernels::omp::emoji_hashtag_tally(corpus).emojis);
}

FrequencyTable hashtag_table(const Corpus& corpus) {
  return to_frequency_table(kernels::omp::emoji_hashtag_tally(corpus).hashtags);
}

} // namespace stormscope
