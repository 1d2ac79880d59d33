#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stormscope/corpus.hpp"
#include "stormscope/lexicon.hpp"

namespace stormscope {

struct BinSpec {
  enum class Kind { duration, ordinal };
  Kind kind = Kind::duration;
  std::int64_t width = 86400; // seconds, or messages per bin for ordinal

  static BinSpec seconds(std::int64_t s) { return {Kind::duration, s}; }
  static BinSpec days(std::int64_t d) { return {Kind::duration, d * 86400}; }
  static BinSpec ordinal(std::int64_t n) { return {Kind::ordinal, n}; }

  friend bool operator==(const BinSpec&, const BinSpec&) = default;
};

/// Accepts "<n>d", "<n>h", "<n>m", "<n>s" or "ordinal:<n>".
std::optional<BinSpec> parse_bin_spec(std::string_view s);
std::string to_string(const BinSpec& spec);

inline constexpr std::string_view kUnlabeled = "unlabeled";

struct TimelineSeries {
  BinSpec spec;
  /// Epoch seconds for duration bins, first ordinal position for ordinal bins.
  std::vector<std::int64_t> bin_starts;
  std::vector<std::size_t> counts;
  /// Per coarse stance (plus "unlabeled") per-bin counts; empty when no message is labeled.
  std::map<std::string, std::vector<std::size_t>, std::less<>> group_splits;
  /// Bin index of each corpus message, in corpus order.
  std::vector<std::size_t> message_bins;

  std::size_t size() const { return counts.size(); }
  std::size_t total() const;
  std::vector<double> as_doubles() const;
};

/// Bins a normalized corpus. Empty bins inside the covered range are kept.
/// Throws DataError for duration bins on a corpus with missing timestamps.
TimelineSeries bin_counts(const Corpus& corpus, BinSpec spec);

/// Centered moving average; windows are truncated at the series edges.
std::vector<double> smooth(std::span<const double> values, std::size_t window);

/// Strict local maxima (plateaus resolve to their first bin) whose smoothed
/// value reaches min_prominence_fraction of the smoothed maximum.
std::vector<std::size_t> detect_peaks(std::span<const double> values, double min_prominence_fraction = 0.25,
                                      std::size_t smoothing_window = 1);
std::vector<std::size_t> detect_peaks(const TimelineSeries& series, double min_prominence_fraction = 0.25,
                                      std::size_t smoothing_window = 1);

enum class Span { s1, s2, s3, s4 };
std::string_view to_string(Span s);

struct PhaseSegmentation {
  std::vector<std::size_t> peaks;
  std::vector<Phase> phase3; // per bin
  std::vector<Span> span4;   // per bin
};

/// begin = [0..first peak], middle = (first..last peak], end = (last peak..];
/// when the last peak is the final bin, end = {final bin}. Spans split at the
/// first, second and last peak the same way.
PhaseSegmentation segment_phases(std::size_t n_bins, std::span<const std::size_t> peaks);

using KeywordSeries = std::vector<std::pair<std::string, std::vector<std::size_t>>>;

/// The top_k most frequent non-stopword tokens (ties broken lexicographically)
/// with their per-bin counts, ordered by global frequency.
KeywordSeries keyword_timeline(const Corpus& corpus, const TimelineSeries& series, std::size_t top_k,
                               const Lexicon& stopwords);

} // namespace stormscope
