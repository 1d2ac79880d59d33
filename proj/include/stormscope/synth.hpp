#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "stormscope/corpus.hpp"
#include "stormscope/features.hpp"
#include "stormscope/timeline.hpp"

namespace stormscope {

struct Wave {
  int day = 0;
  double amplitude = 0.0;
};

// Per-platform knobs. Unprefixed config keys set both platforms; "platform1."
// and "platform2." prefixes override one of them.
struct PlatformSpec {
  std::string name;
  Platform kind = Platform::twitter_like;
  double supporter_daily_rate = 12.0;
  double neutral_daily_rate = 4.0;
  double opponent_baseline_rate = 2.0;
  double spillover_influx = 1.0; // baseline multiplier from spillover_day on (origin platform)
  double wave_scale = 1.0;
  double toxicity_rate = 0.0;
  double frac_gt1 = 0.0;
  double frac_gt2 = 0.0;
  double reply_to_root_fraction = 1.0;
  std::size_t emoji_total = 0;
  std::vector<std::pair<std::string, std::size_t>> hashtags; // without '#', exact counts
  double keyword_rate = 0.0; // keyword occurrences per message
  std::map<Stance, double> stance_mix;
};

struct SynthConfig {
  std::uint64_t seed = 1;
  std::string storm = "synthetic";
  std::string lang = "en";
  UnixSeconds origin = 1664755200; // 2022-10-03T00:00:00Z, day 0
  int n_days = 20;
  int spillover_day = 2;
  int appeasement_day = 5;
  int consequence_day = 12;
  std::vector<Wave> waves;
  double decay_halflife_days = 0.7;
  double fade_halflife_days = 0.0; // 0 disables the post-consequence fade
  double count_noise_cv = 0.08;
  double late_support_both_share = 0.0;
  int min_tokens = 10;
  int max_tokens = 20;
  std::vector<std::pair<std::string, double>> keywords;
  std::map<Stance, std::vector<std::string>> subs;
  /// class key (stance, support/oppose/neutral, or phase name) -> feature -> weight multiplier
  std::map<std::string, std::map<Feature, double>> feature_skews;
  std::array<PlatformSpec, 2> platforms;

  SynthConfig();
};

/// Parses the key=value format; '#' starts a comment line. Throws DataError
/// naming the line for unknown keys or bad values, and validates the result.
SynthConfig parse_synth_config(std::istream& in);
SynthConfig load_synth_config(const std::string& path);
/// Applies one "key=value" assignment (used for command-line overrides).
void set_synth_option(SynthConfig& config, const std::string& key, const std::string& value);
/// Throws DataError when an invariant is violated.
void validate(const SynthConfig& config);

struct PlatformTruth {
  std::string name;
  Platform kind = Platform::twitter_like;
  int start_day = 0;
  std::size_t n_messages = 0;
  std::vector<int> peak_days;          // absolute day indices
  std::vector<std::size_t> peak_bins;  // relative to the platform's first day
  std::vector<Phase> phase3;           // per day from start_day
  std::vector<Span> span4;
  std::vector<std::size_t> daily_supporters, daily_opponents, daily_neutral;
  std::map<std::string, std::size_t> stance_counts;
  std::map<std::string, std::size_t> phase_counts;
  std::size_t toxic_messages = 0;
  std::size_t emoji_total = 0;
  std::map<std::string, std::size_t> hashtags; // lowercase with '#'
  std::map<std::string, std::size_t> keywords;
  std::size_t n_authors = 0;
  double frac_gt1 = 0.0;
  double frac_gt2 = 0.0;
  std::size_t replies_to_root = 0;
  std::size_t replies_to_replies = 0;
};

struct GroundTruth {
  std::uint64_t seed = 0;
  std::string storm;
  UnixSeconds origin = 0;
  int n_days = 0;
  int spillover_day = 0;
  int appeasement_day = 0;
  int consequence_day = 0;
  std::vector<PlatformTruth> platforms;
};

struct SynthOutput {
  std::vector<Corpus> corpora; // one per platform, normalized
  GroundTruth truth;
};

SynthOutput generate(const SynthConfig& config);
nlohmann::ordered_json to_json(const GroundTruth& truth);

struct ShapeReport {
  double supporter_cv = 0.0;
  double opponent_cv = 0.0;
  std::vector<std::size_t> planted_peaks;
  std::vector<std::size_t> detected_peaks;
  bool peaks_match = false;
  std::optional<double> post_event_spearman; // nullopt with fewer than 3 post-event days
  std::optional<int> platform2_onset_day;
};

/// Measures the origin platform (corpora[0]) against the planted structure.
ShapeReport shape_report(const std::vector<Corpus>& corpora, const GroundTruth& truth);

/// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

} // namespace stormscope
