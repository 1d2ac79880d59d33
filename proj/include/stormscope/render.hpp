#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stormscope/groups.hpp"
#include "stormscope/stats.hpp"
#include "stormscope/timeline.hpp"

namespace stormscope::render {

/// RFC 4180 quoting, only when the field needs it.
std::string csv_field(std::string_view s);
/// Shortest round-trip decimal form, so CSVs are stable across runs.
std::string number(double v);

/// Bin labels: ISO dates/times for duration bins, "#<first position>" for ordinal bins.
std::vector<std::string> bin_labels(const TimelineSeries& series);

// All SVG output is deterministic given its inputs. `stamp` (if any) ends up
// in a leading comment.
std::string timeline_svg(const TimelineSeries& series, std::span<const std::size_t> peaks,
                         const PhaseSegmentation* phases, std::string_view title,
                         const std::optional<std::string>& stamp);
std::string stacked_area_svg(const GroupDistribution& dist, const TimelineSeries& series, std::string_view title,
                             const std::optional<std::string>& stamp);
std::string toxicity_bars_svg(const ToxicityReport& report, const TimelineSeries& series, std::string_view title,
                              const std::optional<std::string>& stamp);

std::string timeline_csv(const TimelineSeries& series);
std::string distribution_csv(const GroupDistribution& dist, const TimelineSeries& series);
std::string toxicity_csv(const ToxicityReport& report, const TimelineSeries& series);
std::string frequency_csv(const FrequencyTable& table, std::string_view key_column);
std::string contrast_csv(const std::vector<FeatureContrast>& rows);

std::string html_escape(std::string_view s);

} // namespace stormscope::render
