#include "doctest.h"

#include <algorithm>
#include <numeric>

#include "stormscope/error.hpp"
#include "stormscope/rng.hpp"
#include "stormscope/timeline.hpp"

using namespace stormscope;

namespace {

constexpr UnixSeconds kDay0 = 1667260800; // 2022-11-01T00:00:00Z

Message timed(std::string id, UnixSeconds t, std::string text = "hello") {
  Message m;
  m.id = std::move(id);
  m.thread_id = "t";
  m.is_root = true;
  m.timestamp = t;
  m.lang = "en";
  m.text = std::move(text);
  return m;
}

Message ordered(std::string id, std::uint64_t pos) {
  Message m;
  m.id = std::move(id);
  m.platform = Platform::reddit_like;
  m.thread_id = "t";
  m.relative_order = pos;
  m.lang = "en";
  m.text = "x";
  return m;
}

std::vector<Phase> phases(std::initializer_list<char> s) {
  std::vector<Phase> out;
  for (char c : s) out.push_back(c == 'b' ? Phase::begin : c == 'm' ? Phase::middle : Phase::end);
  return out;
}

// Naive oracle: every bin index is in exactly one contiguous block, blocks in order.
template <typename E>
void check_ordered_partition(const std::vector<E>& labels) {
  for (std::size_t i = 1; i < labels.size(); ++i) CHECK(static_cast<int>(labels[i - 1]) <= static_cast<int>(labels[i]));
}

} // namespace

TEST_CASE("parse_bin_spec") {
  CHECK(parse_bin_spec("1d") == BinSpec::days(1));
  CHECK(parse_bin_spec("6h") == BinSpec::seconds(6 * 3600));
  CHECK(parse_bin_spec("30m") == BinSpec::seconds(1800));
  CHECK(parse_bin_spec("3600s") == BinSpec::seconds(3600));
  CHECK(parse_bin_spec("ordinal:50") == BinSpec::ordinal(50));
  CHECK_FALSE(parse_bin_spec("0d"));
  CHECK_FALSE(parse_bin_spec("d"));
  CHECK_FALSE(parse_bin_spec("3w"));
  CHECK_FALSE(parse_bin_spec("ordinal:"));
  CHECK(to_string(BinSpec::days(2)) == "2d");
  CHECK(to_string(BinSpec::ordinal(5)) == "ordinal:5");
}

TEST_CASE("bin_counts examples") {
  Corpus c;
  for (int i = 0; i < 3; ++i) c.messages.push_back(timed("a" + std::to_string(i), kDay0 + 3600 * i));
  for (int i = 0; i < 2; ++i) c.messages.push_back(timed("c" + std::to_string(i), kDay0 + 2 * 86400 + 60 * i));
  const auto s = bin_counts(c, BinSpec::days(1));
  CHECK(s.counts == std::vector<std::size_t>{3, 0, 2});
  CHECK(s.bin_starts == std::vector<std::int64_t>{kDay0, kDay0 + 86400, kDay0 + 2 * 86400});
  CHECK(s.message_bins == std::vector<std::size_t>{0, 0, 0, 2, 2});
  CHECK(s.group_splits.empty());

  Corpus r;
  for (std::uint64_t i = 0; i < 10; ++i) r.messages.push_back(ordered("r" + std::to_string(i), i));
  CHECK(bin_counts(r, BinSpec::ordinal(5)).counts == std::vector<std::size_t>{5, 5});
  CHECK(bin_counts(r, BinSpec::ordinal(4)).counts == std::vector<std::size_t>{4, 4, 2});
  CHECK_THROWS_AS(bin_counts(r, BinSpec::days(1)), DataError);

  CHECK(bin_counts(Corpus{}, BinSpec::days(1)).size() == 0);
}

TEST_CASE("mixed timestamp presence demands ordinal mode") {
  Corpus c;
  c.messages.push_back(timed("a", kDay0));
  auto b = ordered("b", 1);
  c.messages.push_back(b);
  try {
    bin_counts(c, BinSpec::days(1));
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("ordinal") != std::string::npos);
  }
  c.messages[0].relative_order = 0;
  CHECK(bin_counts(c, BinSpec::ordinal(1)).counts == std::vector<std::size_t>{1, 1});
}

TEST_CASE("group splits sum to bin totals") {
  Corpus c;
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    auto m = timed("m" + std::to_string(i), kDay0 + static_cast<UnixSeconds>(rng.below(10 * 86400)));
    if (rng.bernoulli(0.8)) m.stance = StanceLabel{kAllStances[rng.below(6)], std::nullopt};
    c.messages.push_back(std::move(m));
  }
  normalize(c);
  const auto s = bin_counts(c, BinSpec::days(1));
  CHECK(s.total() == 200);
  REQUIRE(s.group_splits.size() == 7);
  for (std::size_t b = 0; b < s.size(); ++b) {
    std::size_t sum = 0;
    for (const auto& [name, counts] : s.group_splits) sum += counts[b];
    CHECK(sum == s.counts[b]);
  }
}

TEST_CASE("re-binning at w and 2w") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    Corpus c;
    const auto n = 1 + rng.below(300);
    for (std::uint64_t i = 0; i < n; ++i)
      c.messages.push_back(timed("m" + std::to_string(i), kDay0 + static_cast<UnixSeconds>(rng.below(20 * 86400))));
    normalize(c);
    const std::int64_t w = 3600 * static_cast<std::int64_t>(1 + rng.below(24));
    const auto fine = bin_counts(c, BinSpec::seconds(w));
    const auto coarse = bin_counts(c, BinSpec::seconds(2 * w));
    CHECK(fine.total() == n);
    CHECK(coarse.total() == n);
    for (std::size_t j = 0; j < coarse.size(); ++j) {
      std::size_t sum = 0;
      for (std::size_t i = 0; i < fine.size(); ++i)
        if (fine.bin_starts[i] >= coarse.bin_starts[j] && fine.bin_starts[i] < coarse.bin_starts[j] + 2 * w)
          sum += fine.counts[i];
      CHECK(sum == coarse.counts[j]);
    }
  }
}

TEST_CASE("smooth") {
  const std::vector<double> v{3, 0, 3, 6};
  CHECK(smooth(v, 1) == v);
  const auto s = smooth(v, 3);
  CHECK(s[0] == doctest::Approx(1.5));
  CHECK(s[1] == doctest::Approx(2.0));
  CHECK(s[2] == doctest::Approx(3.0));
  CHECK(s[3] == doctest::Approx(4.5));
  CHECK_THROWS_AS(smooth(v, 2), ArgumentError);
  CHECK_THROWS_AS(smooth(v, 0), ArgumentError);
}

TEST_CASE("detect_peaks examples") {
  using V = std::vector<double>;
  using P = std::vector<std::size_t>;
  CHECK(detect_peaks(V{9, 2, 5, 1, 4}) == P{0, 2, 4});
  CHECK(detect_peaks(V{1, 1, 1}).empty());
  CHECK(detect_peaks(V{150, 20, 350, 5}) == P{0, 2});
  CHECK(detect_peaks(V{5}).empty());
  CHECK(detect_peaks(V{1, 4, 4, 1}) == P{1});     // plateau -> first bin
  CHECK(detect_peaks(V{100, 1, 20, 1}) == P{0});  // 20 < 0.25 * 100
  CHECK(detect_peaks(V{100, 1, 25, 1}) == P{0, 2});
  CHECK_THROWS_AS(detect_peaks(V{0, 0, 0}), DataError);
  CHECK_THROWS_AS(detect_peaks(V{}), DataError);
  CHECK_THROWS_AS(detect_peaks(V{1, 2}, 0.0), ArgumentError);
  CHECK_THROWS_AS(detect_peaks(V{1, 2}, 1.5), ArgumentError);
}

TEST_CASE("detect_peaks is scale invariant") {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> v(2 + rng.below(30));
    for (auto& x : v) x = static_cast<double>(rng.below(50));
    v[rng.below(v.size())] += 1;
    const auto base = detect_peaks(v, 0.25, 3);
    for (double k : {2.0, 7.0, 1000.0}) {
      std::vector<double> scaled(v);
      for (auto& x : scaled) x *= k;
      CHECK(detect_peaks(scaled, 0.25, 3) == base);
    }
  }
}

TEST_CASE("segment_phases examples") {
  const std::vector<std::size_t> three{0, 2, 4};
  const auto s = segment_phases(5, three);
  CHECK(s.phase3 == phases({'b', 'm', 'm', 'm', 'e'}));
  CHECK(s.span4 == std::vector<Span>{Span::s1, Span::s2, Span::s2, Span::s3, Span::s4});

  const std::vector<std::size_t> one{0};
  const auto t = segment_phases(5, one);
  CHECK(t.phase3 == phases({'b', 'e', 'e', 'e', 'e'}));
  CHECK(t.span4 == std::vector<Span>{Span::s1, Span::s4, Span::s4, Span::s4, Span::s4});

  const std::vector<std::size_t> two{1, 3};
  const auto u = segment_phases(6, two);
  CHECK(u.phase3 == phases({'b', 'b', 'm', 'm', 'e', 'e'}));
  CHECK(u.span4 == std::vector<Span>{Span::s1, Span::s1, Span::s2, Span::s2, Span::s4, Span::s4});

  CHECK_THROWS_AS(segment_phases(5, std::vector<std::size_t>{}), DataError);
  CHECK_THROWS_AS(segment_phases(5, std::vector<std::size_t>{3, 1}), ArgumentError);
  CHECK_THROWS_AS(segment_phases(5, std::vector<std::size_t>{5}), ArgumentError);
}

TEST_CASE("segmentations partition every bin in order") {
  Rng rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.below(40);
    std::vector<std::size_t> peaks;
    for (std::size_t i = 0; i < n; ++i)
      if (rng.bernoulli(0.2)) peaks.push_back(i);
    if (peaks.empty()) peaks.push_back(rng.below(n));
    const auto s = segment_phases(n, peaks);
    REQUIRE(s.phase3.size() == n);
    REQUIRE(s.span4.size() == n);
    check_ordered_partition(s.phase3);
    check_ordered_partition(s.span4);
    CHECK(s.phase3.front() == Phase::begin);
    const bool last_is_final = peaks.back() + 1 == n && n >= 2;
    if (peaks.size() >= 2 || !last_is_final) CHECK(s.phase3[peaks.front()] == Phase::begin);
    if (n >= 2) CHECK(s.phase3.back() == Phase::end);
    if (peaks.size() >= 2) {
      CHECK(s.span4[peaks[1]] == (peaks.size() == 2 && last_is_final ? Span::s4 : Span::s2));
      CHECK(s.phase3[peaks.back()] == (last_is_final ? Phase::end : Phase::middle));
    }
  }
}

TEST_CASE("keyword_timeline") {
  Corpus c;
  c.messages.push_back(timed("a", kDay0, "russia russia peace"));
  const auto s = bin_counts(c, BinSpec::days(1));
  Lexicon stop("stopwords", "en");
  const auto k = keyword_timeline(c, s, 2, stop);
  REQUIRE(k.size() == 2);
  CHECK(k[0] == KeywordSeries::value_type{"russia", {2}});
  CHECK(k[1] == KeywordSeries::value_type{"peace", {1}});
  CHECK(keyword_timeline(c, s, 0, stop).empty());

  Corpus d;
  d.messages.push_back(timed("a", kDay0, "the war, the WAR! 2022 zebra apple"));
  d.messages.push_back(timed("b", kDay0 + 86400, "War again"));
  const std::vector<std::string> tag{"stop"};
  stop.add("the", tag);
  stop.add("again", tag);
  const auto ds = bin_counts(d, BinSpec::days(1));
  const auto kd = keyword_timeline(d, ds, 10, stop);
  REQUIRE(kd.size() == 3);
  CHECK(kd[0] == KeywordSeries::value_type{"war", {2, 1}});
  CHECK(kd[1].first == "apple"); // ties broken lexicographically
  CHECK(kd[2].first == "zebra");
}
