#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stormscope/corpus.hpp"
#include "stormscope/features.hpp"
#include "stormscope/lexicon.hpp"
#include "stormscope/timeline.hpp"

namespace stormscope {

struct BinDistribution {
  /// nullopt marks a bin without labeled messages.
  std::optional<std::map<std::string, double>> fractions;
  std::size_t n_labeled = 0;
};

struct GroupDistribution {
  std::vector<BinDistribution> bins;
  std::size_t n_labeled = 0;
  std::size_t n_excluded = 0; // unlabeled messages
};

/// Per-bin coarse-stance fractions over labeled messages. Throws DataError when
/// nothing is labeled.
GroupDistribution group_distribution(const Corpus& corpus, const TimelineSeries& series);

struct FeatureContrast {
  Feature feature{};
  double rate_a = 0.0;
  double rate_b = 0.0;
  double diff = 0.0; // rate_a - rate_b
  double d = 0.0;    // Cohen's d over per-message rates, 0 when degenerate
  bool degenerate = false;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
};

/// One row per feature, sorted by |d| descending (ties in canonical feature order).
/// Throws DataError when either group is empty.
std::vector<FeatureContrast> contrast_groups(const Corpus& corpus, std::span<const FeatureVector> features, Stance a,
                                             Stance b);
std::vector<FeatureContrast> contrast_groups(const Corpus& corpus, const LexiconSet& lexicons, Stance a, Stance b);

struct SubgroupTrajectory {
  std::size_t count = 0;
  std::vector<std::size_t> per_bin;
};

std::map<std::string, SubgroupTrajectory> subgroup_breakdown(const Corpus& corpus, const TimelineSeries& series);

} // namespace stormscope
