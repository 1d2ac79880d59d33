#include "stormscope/timeline.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <unordered_map>

#include "stormscope/error.hpp"
#include "stormscope/text.hpp"
#include "stormscope/tokenize.hpp"

namespace stormscope {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

bool has_letter(std::string_view w) {
  for (const auto& cp : text::decode_utf8(w))
    if (text::is_word_char(cp.value) && !(cp.value >= '0' && cp.value <= '9') && cp.value != '_') return true;
  return false;
}

} // namespace

std::optional<BinSpec> parse_bin_spec(std::string_view s) {
  auto number = [](std::string_view digits) -> std::optional<std::int64_t> {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || v <= 0) return std::nullopt;
    return v;
  };
  constexpr std::string_view kOrdinal = "ordinal:";
  if (s.rfind(kOrdinal, 0) == 0) {
    auto n = number(s.substr(kOrdinal.size()));
    if (!n) return std::nullopt;
    return BinSpec::ordinal(*n);
  }
  if (s.size() < 2) return std::nullopt;
  auto n = number(s.substr(0, s.size() - 1));
  if (!n) return std::nullopt;
  switch (s.back()) {
  case 'd': return BinSpec::seconds(*n * 86400);
  case 'h': return BinSpec::seconds(*n * 3600);
  case 'm': return BinSpec::seconds(*n * 60);
  case 's': return BinSpec::seconds(*n);
  default: return std::nullopt;
  }
}

std::string to_string(const BinSpec& spec) {
  if (spec.kind == BinSpec::Kind::ordinal) return "ordinal:" + std::to_string(spec.width);
  if (spec.width % 86400 == 0) return std::to_string(spec.width / 86400) + "d";
  if (spec.width % 3600 == 0) return std::to_string(spec.width / 3600) + "h";
  return std::to_string(spec.width) + "s";
}

std::size_t TimelineSeries::total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }

std::vector<double> TimelineSeries::as_doubles() const { return {counts.begin(), counts.end()}; }

TimelineSeries bin_counts(const Corpus& corpus, BinSpec spec) {
  if (spec.width <= 0) throw ArgumentError("bin width must be positive");
  TimelineSeries series;
  series.spec = spec;
  if (corpus.empty()) return series;

  const auto n = corpus.size();
  series.message_bins.resize(n);
  if (spec.kind == BinSpec::Kind::duration) {
    if (!corpus.all_timestamped()) {
      throw DataError(corpus.any_timestamped()
                          ? "corpus mixes timestamped and timestamp-less messages; request ordinal bins explicitly"
                          : "corpus has no timestamps; use ordinal bins");
    }
    std::int64_t lo = *corpus.messages.front().timestamp;
    std::int64_t hi = lo;
    for (const auto& m : corpus.messages) {
      lo = std::min(lo, *m.timestamp);
      hi = std::max(hi, *m.timestamp);
    }
    const auto first = floor_div(lo, spec.width);
    const auto last = floor_div(hi, spec.width);
    const auto bins = static_cast<std::size_t>(last - first + 1);
    series.counts.assign(bins, 0);
    for (std::size_t b = 0; b < bins; ++b) series.bin_starts.push_back((first + static_cast<std::int64_t>(b)) * spec.width);
    for (std::size_t i = 0; i < n; ++i)
      series.message_bins[i] = static_cast<std::size_t>(floor_div(*corpus.messages[i].timestamp, spec.width) - first);
  } else {
    const auto width = static_cast<std::size_t>(spec.width);
    const auto bins = (n + width - 1) / width;
    series.counts.assign(bins, 0);
    for (std::size_t b = 0; b < bins; ++b) series.bin_starts.push_back(static_cast<std::int64_t>(b * width));
    for (std::size_t i = 0; i < n; ++i) series.message_bins[i] = i / width;
  }

  const bool labeled = std::any_of(corpus.messages.begin(), corpus.messages.end(),
                                   [](const Message& m) { return m.stance.has_value(); });
  if (labeled) {
    for (auto s : kAllStances) series.group_splits[std::string(to_string(s))].assign(series.size(), 0);
    series.group_splits[std::string(kUnlabeled)].assign(series.size(), 0);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto b = series.message_bins[i];
    ++series.counts[b];
    if (labeled) {
      const auto& m = corpus.messages[i];
      const auto key = m.stance ? to_string(m.stance->coarse) : kUnlabeled;
      ++series.group_splits.find(key)->second[b];
    }
  }
  return series;
}

std::vector<double> smooth(std::span<const double> values, std::size_t window) {
  if (window == 0 || window % 2 == 0) throw ArgumentError("smoothing window must be a positive odd integer");
  if (window == 1) return {values.begin(), values.end()};
  const auto half = window / 2;
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto lo = i >= half ? i - half : 0;
    const auto hi = std::min(values.size() - 1, i + half);
    double sum = 0.0;
    for (auto k = lo; k <= hi; ++k) sum += values[k];
    out[i] = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

std::vector<std::size_t> detect_peaks(std::span<const double> values, double min_prominence_fraction,
                                      std::size_t smoothing_window) {
  if (!(min_prominence_fraction > 0.0 && min_prominence_fraction <= 1.0))
    throw ArgumentError("min_prominence_fraction must lie in (0, 1]");
  if (values.empty() || std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; }))
    throw DataError("detect_peaks: series has no non-zero bin");
  const auto s = smooth(values, smoothing_window);
  const double threshold = min_prominence_fraction * *std::max_element(s.begin(), s.end());

  std::vector<std::size_t> peaks;
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t j = i;
    while (j + 1 < s.size() && s[j + 1] == s[i]) ++j;
    const bool left_ok = i > 0 && s[i - 1] < s[i];
    const bool right_ok = j + 1 < s.size() && s[j + 1] < s[i];
    const bool left_edge = i == 0;
    const bool right_edge = j + 1 == s.size();
    const bool is_peak = (left_ok && right_ok) || (left_edge && right_ok) || (right_edge && left_ok);
    if (is_peak && s[i] >= threshold) peaks.push_back(i);
    i = j + 1;
  }
  return peaks;
}

std::vector<std::size_t> detect_peaks(const TimelineSeries& series, double min_prominence_fraction,
                                      std::size_t smoothing_window) {
  const auto values = series.as_doubles();
  return detect_peaks(values, min_prominence_fraction, smoothing_window);
}

std::string_view to_string(Span s) {
  static constexpr std::string_view names[] = {"s1", "s2", "s3", "s4"};
  return names[static_cast<int>(s)];
}

PhaseSegmentation segment_phases(std::size_t n_bins, std::span<const std::size_t> peaks) {
  if (peaks.empty()) throw DataError("segment_phases: no peaks");
  if (!std::is_sorted(peaks.begin(), peaks.end()) ||
      std::adjacent_find(peaks.begin(), peaks.end()) != peaks.end() || peaks.back() >= n_bins)
    throw ArgumentError("segment_phases: peaks must be strictly increasing bin indices");

  PhaseSegmentation seg;
  seg.peaks.assign(peaks.begin(), peaks.end());
  const auto final_bin = n_bins - 1;
  const std::size_t first = peaks.front();
  const std::size_t last = peaks.back();
  // Final-bin rule: the last bin always forms the end phase when the storm has >= 2 bins.
  const bool pinned_end = last == final_bin && n_bins >= 2;
  const std::size_t end_start = pinned_end ? final_bin : last + 1;

  seg.phase3.resize(n_bins);
  for (std::size_t b = 0; b < n_bins; ++b) {
    if (b >= end_start)
      seg.phase3[b] = Phase::end;
    else if (b <= first)
      seg.phase3[b] = Phase::begin;
    else
      seg.phase3[b] = Phase::middle;
  }

  const std::size_t p1 = first;
  constexpr auto none = static_cast<std::size_t>(-1);
  const std::size_t p2 = peaks.size() >= 2 ? peaks[1] : none;
  const std::size_t p3 = peaks.size() >= 3 ? last : none;
  seg.span4.resize(n_bins);
  for (std::size_t b = 0; b < n_bins; ++b) {
    if (b >= end_start)
      seg.span4[b] = Span::s4;
    else if (b <= p1)
      seg.span4[b] = Span::s1;
    else if (p2 != none && b <= p2)
      seg.span4[b] = Span::s2;
    else if (p3 != none && b <= p3)
      seg.span4[b] = Span::s3;
    else
      seg.span4[b] = Span::s4;
  }
  return seg;
}

KeywordSeries keyword_timeline(const Corpus& corpus, const TimelineSeries& series, std::size_t top_k,
                               const Lexicon& stopwords) {
  if (top_k == 0 || corpus.empty()) return {};
  if (series.message_bins.size() != corpus.size())
    throw ArgumentError("keyword_timeline: series was not built from this corpus");

  std::unordered_map<std::string, std::vector<std::size_t>> per_bin;
  std::unordered_map<std::string, std::size_t> totals;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& m = corpus.messages[i];
    for (const auto& tok : tokenize(m.text, m.lang).tokens) {
      if (stopwords.contains(tok.lower) || !has_letter(tok.lower)) continue;
      auto& bins = per_bin[tok.lower];
      if (bins.empty()) bins.assign(series.size(), 0);
      ++bins[series.message_bins[i]];
      ++totals[tok.lower];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(totals.begin(), totals.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (ranked.size() > top_k) ranked.resize(top_k);
  KeywordSeries out;
  for (auto& [word, _] : ranked) out.emplace_back(word, std::move(per_bin[word]));
  return out;
}

} // namespace stormscope
