#include "doctest.h"

#include <cmath>

#include "helpers.hpp"
#include "stormscope/error.hpp"
#include "stormscope/groups.hpp"
#include "stormscope/rng.hpp"

using namespace stormscope;
using testing::day;
using testing::msg;

TEST_CASE("group distribution example and empty-bin marker") {
  Corpus c;
  c.messages = {msg("a", "x", Stance::support_target, day(0)), msg("b", "x", Stance::oppose_target, day(0, 10)),
                msg("c", "x", Stance::oppose_target, day(0, 20)), msg("d", "x", Stance::neutral, day(0, 30)),
                msg("e", "x", std::nullopt, day(1)), msg("f", "x", Stance::neutral, day(2))};
  normalize(c);
  const auto series = bin_counts(c, BinSpec::days(1));
  const auto d = group_distribution(c, series);
  REQUIRE(d.bins.size() == 3);
  REQUIRE(d.bins[0].fractions.has_value());
  CHECK(*d.bins[0].fractions ==
        std::map<std::string, double>{{"neutral", 0.25}, {"oppose_target", 0.5}, {"support_target", 0.25}});
  CHECK_FALSE(d.bins[1].fractions.has_value());
  CHECK(d.bins[1].n_labeled == 0);
  CHECK(d.n_excluded == 1);
  CHECK(d.n_labeled == 5);

  Corpus unlabeled;
  unlabeled.messages = {msg("a", "x", std::nullopt, day(0))};
  CHECK_THROWS_AS(group_distribution(unlabeled, bin_counts(unlabeled, BinSpec::days(1))), DataError);
}

TEST_CASE("group fractions sum to one on random corpora") {
  Rng rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    Corpus c;
    for (int i = 0; i < 200; ++i) {
      std::optional<Stance> s;
      if (rng.below(5)) s = static_cast<Stance>(rng.below(6));
      c.messages.push_back(msg("m" + std::to_string(i), "x", s, day(static_cast<int>(rng.below(10)), static_cast<int>(rng.below(86400)))));
    }
    normalize(c);
    const auto d = group_distribution(c, bin_counts(c, BinSpec::days(1)));
    for (const auto& b : d.bins) {
      if (!b.fractions) continue;
      double sum = 0;
      for (const auto& [_, f] : *b.fractions) sum += f;
      CHECK(std::abs(sum - 1.0) <= 1e-9);
    }
  }
}

namespace {

FeatureVector vec(std::uint32_t tokens, std::initializer_list<std::pair<Feature, std::uint32_t>> counts) {
  FeatureVector v;
  v.n_tokens = tokens;
  v.n_sentences = 1;
  v.avg_sentence_length = tokens;
  for (auto [f, n] : counts) v[f] = n;
  return v;
}

} // namespace

TEST_CASE("contrast: all-zero group against a nonzero group") {
  Corpus c;
  c.messages = {msg("a", "x", Stance::support_target), msg("b", "x", Stance::support_target),
                msg("c", "x", Stance::oppose_target), msg("d", "x", Stance::oppose_target)};
  const std::vector<FeatureVector> fv = {vec(10, {}), vec(10, {}), vec(10, {{Feature::anger, 2}}),
                                         vec(10, {{Feature::anger, 1}, {Feature::fear, 1}})};
  const auto rows = contrast_groups(c, fv, Stance::oppose_target, Stance::support_target);
  REQUIRE(rows.size() == kFeatureCount);
  for (const auto& r : rows) {
    if (r.feature == Feature::anger) {
      CHECK(r.diff > 0);
      CHECK(r.rate_a == doctest::Approx(0.15));
      CHECK(r.rate_b == 0.0);
      CHECK(std::isfinite(r.d));
      CHECK_FALSE(r.degenerate);
      CHECK(r.d > 0);
    }
    if (r.feature == Feature::n_adverbs) {
      CHECK(r.degenerate);
      CHECK(r.d == 0.0);
    }
  }
  CHECK(rows.front().feature == Feature::anger);
  CHECK_THROWS_AS(contrast_groups(c, fv, Stance::oppose_target, Stance::neutral), DataError);
}

TEST_CASE("contrast of identical groups is flat") {
  Corpus c;
  std::vector<FeatureVector> fv;
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    auto v = vec(20, {{Feature::anger, static_cast<std::uint32_t>(rng.below(4))}, {Feature::n_verbs, static_cast<std::uint32_t>(rng.below(6))}});
    for (Stance s : {Stance::support_target, Stance::oppose_target}) {
      c.messages.push_back(msg("m" + std::to_string(c.size()), "x", s));
      fv.push_back(v);
    }
  }
  for (const auto& r : contrast_groups(c, fv, Stance::oppose_target, Stance::support_target)) {
    CHECK(r.diff == 0.0);
    CHECK((r.d == 0.0 || r.degenerate));
  }
}

TEST_CASE("contrast is antisymmetric in sign with identical ranking") {
  Rng rng(8);
  Corpus c;
  std::vector<FeatureVector> fv;
  for (int i = 0; i < 120; ++i) {
    const auto s = rng.bernoulli(0.5) ? Stance::support_target : Stance::oppose_target;
    c.messages.push_back(msg("m" + std::to_string(i), "x", s));
    FeatureVector v;
    v.n_tokens = static_cast<std::uint32_t>(10 + rng.below(30));
    v.n_sentences = 1 + static_cast<std::uint32_t>(rng.below(3));
    v.avg_sentence_length = static_cast<double>(v.n_tokens) / v.n_sentences;
    for (auto& n : v.counts) n = static_cast<std::uint32_t>(rng.below(1 + v.n_tokens / 4 + (s == Stance::oppose_target ? 2 : 0)));
    fv.push_back(v);
  }
  const auto ab = contrast_groups(c, fv, Stance::oppose_target, Stance::support_target);
  const auto ba = contrast_groups(c, fv, Stance::support_target, Stance::oppose_target);
  REQUIRE(ab.size() == ba.size());
  for (std::size_t i = 0; i < ab.size(); ++i) {
    CHECK(ab[i].feature == ba[i].feature);
    CHECK(ab[i].diff == doctest::Approx(-ba[i].diff));
    CHECK(ab[i].d == doctest::Approx(-ba[i].d));
    CHECK(ab[i].rate_a == ba[i].rate_b);
  }
  for (std::size_t i = 1; i < ab.size(); ++i) CHECK(std::abs(ab[i - 1].d) >= std::abs(ab[i].d));
}

TEST_CASE("subgroup breakdown examples") {
  Corpus c;
  c.messages = {msg("a", "x", Stance::oppose_target, day(0)), msg("b", "x", Stance::oppose_target, day(1)),
                msg("c", "x", Stance::oppose_target, day(1, 100))};
  c.messages[0].stance->sub = "propaganda";
  c.messages[1].stance->sub = "propaganda";
  c.messages[2].stance->sub = "money";
  normalize(c);
  const auto series = bin_counts(c, BinSpec::days(1));
  const auto s = subgroup_breakdown(c, series);
  REQUIRE(s.size() == 2);
  CHECK(s.at("propaganda").count == 2);
  CHECK(s.at("propaganda").per_bin == std::vector<std::size_t>{1, 1});
  CHECK(s.at("money").count == 1);

  for (auto& m : c.messages) m.stance->sub.reset();
  CHECK(subgroup_breakdown(c, series).empty());
}
