#include "stormscope/groups.hpp"

#include <algorithm>
#include <cmath>

#include "stormscope/error.hpp"
#include "stormscope/kernels.hpp"

namespace stormscope {

namespace {

void require_series(const Corpus& corpus, const TimelineSeries& series) {
  if (series.message_bins.size() != corpus.size())
    throw ArgumentError("series was not built from this corpus");
}

} // namespace

GroupDistribution group_distribution(const Corpus& corpus, const TimelineSeries& series) {
  require_series(corpus, series);
  GroupDistribution out;
  std::vector<std::map<std::string, std::size_t>> counts(series.size());
  out.bins.resize(series.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& m = corpus.messages[i];
    if (!m.stance) {
      ++out.n_excluded;
      continue;
    }
    const auto b = series.message_bins[i];
    ++counts[b][std::string(to_string(m.stance->coarse))];
    ++out.bins[b].n_labeled;
    ++out.n_labeled;
  }
  if (out.n_labeled == 0) throw DataError("group_distribution: no labeled messages");
  for (std::size_t b = 0; b < counts.size(); ++b) {
    if (out.bins[b].n_labeled == 0) continue;
    auto& f = out.bins[b].fractions.emplace();
    for (const auto& [name, n] : counts[b]) f[name] = static_cast<double>(n) / out.bins[b].n_labeled;
  }
  return out;
}

std::vector<FeatureContrast> contrast_groups(const Corpus& corpus, std::span<const FeatureVector> features, Stance a,
                                             Stance b) {
  if (features.size() != corpus.size()) throw ArgumentError("contrast_groups: one feature vector per message");
  std::vector<const FeatureVector*> ga, gb;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& s = corpus.messages[i].stance;
    if (!s) continue;
    if (s->coarse == a) ga.push_back(&features[i]);
    if (s->coarse == b) gb.push_back(&features[i]);
  }
  if (ga.empty() || gb.empty())
    throw DataError("contrast_groups: group " + std::string(to_string(ga.empty() ? a : b)) + " is empty");

  auto collect = [](const std::vector<const FeatureVector*>& g) {
    std::vector<FeatureVector> v;
    v.reserve(g.size());
    for (const auto* p : g) v.push_back(*p);
    return v;
  };
  const auto va = collect(ga), vb = collect(gb);
  const auto agg_a = aggregate_features(va, Weighting::per_token);
  const auto agg_b = aggregate_features(vb, Weighting::per_token);

  auto moments = [](const std::vector<FeatureVector>& g, std::size_t k) {
    double mean = 0.0;
    for (const auto& v : g) mean += per_token_rates(v)[k];
    mean /= static_cast<double>(g.size());
    double ss = 0.0;
    for (const auto& v : g) {
      const double r = per_token_rates(v)[k] - mean;
      ss += r * r;
    }
    return std::pair{mean, ss};
  };

  std::vector<FeatureContrast> rows;
  for (std::size_t k = 0; k < kFeatureCount; ++k) {
    FeatureContrast c;
    c.feature = feature_at(k);
    c.n_a = va.size();
    c.n_b = vb.size();
    c.rate_a = agg_a.values[k];
    c.rate_b = agg_b.values[k];
    c.diff = c.rate_a - c.rate_b;
    const auto [ma, ssa] = moments(va, k);
    const auto [mb, ssb] = moments(vb, k);
    const double dof = static_cast<double>(va.size() + vb.size()) - 2.0;
    const double pooled = dof > 0 ? std::sqrt((ssa + ssb) / dof) : 0.0;
    if (pooled > 0.0) {
      c.d = (ma - mb) / pooled;
    } else {
      c.degenerate = true;
    }
    rows.push_back(c);
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const FeatureContrast& x, const FeatureContrast& y) { return std::abs(x.d) > std::abs(y.d); });
  return rows;
}

std::vector<FeatureContrast> contrast_groups(const Corpus& corpus, const LexiconSet& lexicons, Stance a, Stance b) {
  const auto features = kernels::omp::extract_features(corpus, lexicons);
  return contrast_groups(corpus, features, a, b);
}

std::map<std::string, SubgroupTrajectory> subgroup_breakdown(const Corpus& corpus, const TimelineSeries& series) {
  require_series(corpus, series);
  std::map<std::string, SubgroupTrajectory> out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& s = corpus.messages[i].stance;
    if (!s || !s->sub) continue;
    auto& t = out[*s->sub];
    if (t.per_bin.empty()) t.per_bin.assign(series.size(), 0);
    ++t.count;
    ++t.per_bin[series.message_bins[i]];
  }
  return out;
}

} // namespace stormscope
