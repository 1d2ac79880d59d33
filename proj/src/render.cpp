#include "stormscope/render.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace stormscope::render {

namespace {

constexpr double kWidth = 760, kHeight = 300;
constexpr double kLeft = 56, kRight = 16, kTop = 36, kBottom = 48;
constexpr double kPlotW = kWidth - kLeft - kRight, kPlotH = kHeight - kTop - kBottom;

// Stable color per stance group; unknown keys fall back to grey.
std::string_view color_for(std::string_view key) {
  if (key == "support_target") return "#1f77b4";
  if (key == "support_both") return "#9ecae1";
  if (key == "oppose_target") return "#d62728";
  if (key == "oppose_both") return "#ff9896";
  if (key == "neutral") return "#7f7f7f";
  if (key == "off_topic") return "#c7c7c7";
  if (key == "begin") return "#fdd0a2";
  if (key == "middle") return "#fdae6b";
  if (key == "end") return "#e6550d";
  return "#bbbbbb";
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

class Svg {
public:
  Svg(std::string_view title, const std::optional<std::string>& stamp) {
    out_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    if (stamp) out_ << "<!-- generated " << *stamp << " -->\n";
    out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
         << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    out_ << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out_ << "<text x=\"" << kLeft << "\" y=\"20\" font-size=\"14\">" << html_escape(title) << "</text>\n";
  }

  Svg& raw(std::string_view s) {
    out_ << s;
    return *this;
  }

  void axes(double y_max, std::string_view y_label, const std::vector<std::string>& x_labels) {
    const double x0 = kLeft, y0 = kTop + kPlotH;
    out_ << "<g stroke=\"black\" stroke-width=\"1\">"
         << "<line x1=\"" << x0 << "\" y1=\"" << kTop << "\" x2=\"" << x0 << "\" y2=\"" << y0 << "\"/>"
         << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 + kPlotW << "\" y2=\"" << y0 << "\"/></g>\n";
    for (int i = 0; i <= 4; ++i) {
      const double v = y_max * i / 4.0;
      const double y = y0 - kPlotH * i / 4.0;
      out_ << "<text x=\"" << x0 - 4 << "\" y=\"" << fmt(y + 4) << "\" text-anchor=\"end\">" << number(std::round(v * 100) / 100)
           << "</text>\n";
    }
    out_ << "<text x=\"12\" y=\"" << fmt(kTop + kPlotH / 2) << "\" transform=\"rotate(-90 12 " << fmt(kTop + kPlotH / 2)
         << ")\" text-anchor=\"middle\">" << html_escape(y_label) << "</text>\n";
    const std::size_t n = x_labels.size();
    const std::size_t every = std::max<std::size_t>(1, (n + 9) / 10);
    for (std::size_t i = 0; i < n; i += every)
      out_ << "<text x=\"" << fmt(x_center(i, n)) << "\" y=\"" << fmt(y0 + 16) << "\" text-anchor=\"middle\">"
           << html_escape(x_labels[i]) << "</text>\n";
  }

  static double x_center(std::size_t i, std::size_t n) { return kLeft + kPlotW * (static_cast<double>(i) + 0.5) / static_cast<double>(n); }
  static double y_of(double v, double y_max) { return kTop + kPlotH - (y_max > 0 ? kPlotH * v / y_max : 0.0); }

  std::string finish() {
    out_ << "</svg>\n";
    return out_.str();
  }

private:
  std::ostringstream out_;
};

void legend(Svg& svg, const std::vector<std::string>& keys) {
  std::ostringstream o;
  double x = kLeft;
  for (const auto& k : keys) {
    o << "<rect x=\"" << fmt(x) << "\" y=\"" << kHeight - 18 << "\" width=\"10\" height=\"10\" fill=\"" << color_for(k)
      << "\"/><text x=\"" << fmt(x + 14) << "\" y=\"" << kHeight - 9 << "\">" << html_escape(k) << "</text>\n";
    x += 24 + 7.0 * static_cast<double>(k.size());
  }
  svg.raw(o.str());
}

double nice_max(double v) {
  if (v <= 0) return 1.0;
  const double mag = std::pow(10.0, std::floor(std::log10(v)));
  for (double m : {1.0, 2.0, 2.5, 5.0, 10.0})
    if (m * mag >= v) return m * mag;
  return 10 * mag;
}

} // namespace

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string number(double v) {
  if (v == 0.0) return "0"; // also folds -0
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc{} ? std::string(buf, end) : std::string("nan");
}

std::vector<std::string> bin_labels(const TimelineSeries& series) {
  std::vector<std::string> out;
  for (auto start : series.bin_starts) {
    if (series.spec.kind == BinSpec::Kind::ordinal) {
      out.push_back("#" + std::to_string(start));
      continue;
    }
    auto iso = format_iso8601_utc(start);
    // Day-aligned bins read better as plain dates.
    if (series.spec.width % 86400 == 0) iso = iso.substr(0, 10);
    out.push_back(std::move(iso));
  }
  return out;
}

std::string timeline_svg(const TimelineSeries& series, std::span<const std::size_t> peaks,
                         const PhaseSegmentation* phases, std::string_view title,
                         const std::optional<std::string>& stamp) {
  Svg svg(title, stamp);
  const auto n = series.size();
  double top = 0;
  for (auto c : series.counts) top = std::max(top, static_cast<double>(c));
  top = nice_max(top);
  std::ostringstream o;
  if (phases && phases->phase3.size() == n) {
    // Phase bands behind the curve.
    const double w = kPlotW / static_cast<double>(std::max<std::size_t>(n, 1));
    for (std::size_t i = 0; i < n; ++i)
      o << "<rect x=\"" << fmt(kLeft + w * static_cast<double>(i)) << "\" y=\"" << kTop << "\" width=\"" << fmt(w)
        << "\" height=\"" << kPlotH << "\" fill=\"" << color_for(to_string(phases->phase3[i]))
        << "\" fill-opacity=\"0.35\"/>\n";
  }
  o << "<polyline fill=\"none\" stroke=\"#222\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < n; ++i)
    o << (i ? " " : "") << fmt(Svg::x_center(i, n)) << ',' << fmt(Svg::y_of(static_cast<double>(series.counts[i]), top));
  o << "\"/>\n";
  for (auto p : peaks) {
    if (p >= n) continue;
    o << "<circle class=\"peak\" cx=\"" << fmt(Svg::x_center(p, n)) << "\" cy=\""
      << fmt(Svg::y_of(static_cast<double>(series.counts[p]), top)) << "\" r=\"4\" fill=\"#d62728\"/>\n";
  }
  svg.raw(o.str());
  svg.axes(top, "messages per bin", bin_labels(series));
  if (phases && phases->phase3.size() == n) legend(svg, {"begin", "middle", "end"});
  return svg.finish();
}

std::string stacked_area_svg(const GroupDistribution& dist, const TimelineSeries& series, std::string_view title,
                             const std::optional<std::string>& stamp) {
  Svg svg(title, stamp);
  const auto n = dist.bins.size();
  std::vector<std::string> keys;
  for (const auto& b : dist.bins)
    if (b.fractions)
      for (const auto& [k, _] : *b.fractions)
        if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
  std::sort(keys.begin(), keys.end());

  std::ostringstream o;
  std::vector<double> lower(n, 0.0);
  for (const auto& key : keys) {
    std::vector<double> upper = lower;
    for (std::size_t i = 0; i < n; ++i)
      if (dist.bins[i].fractions)
        if (auto it = dist.bins[i].fractions->find(key); it != dist.bins[i].fractions->end()) upper[i] += it->second;
    // Upper edge left to right, then the lower edge back.
    o << "<polygon fill=\"" << color_for(key) << "\" points=\"";
    for (std::size_t i = 0; i < n; ++i) o << fmt(Svg::x_center(i, n)) << ',' << fmt(Svg::y_of(upper[i], 1.0)) << ' ';
    for (std::size_t i = n; i-- > 0;) o << fmt(Svg::x_center(i, n)) << ',' << fmt(Svg::y_of(lower[i], 1.0)) << (i ? " " : "");
    o << "\"><title>" << html_escape(key) << "</title></polygon>\n";
    lower = std::move(upper);
  }
  // Bins without labeled messages are hatched out rather than drawn as zero.
  for (std::size_t i = 0; i < n; ++i)
    if (!dist.bins[i].fractions) {
      const double w = kPlotW / static_cast<double>(n);
      o << "<rect class=\"empty\" x=\"" << fmt(kLeft + w * static_cast<double>(i)) << "\" y=\"" << kTop << "\" width=\""
        << fmt(w) << "\" height=\"" << kPlotH << "\" fill=\"#eeeeee\"/>\n";
    }
  svg.raw(o.str());
  svg.axes(1.0, "share of labeled messages", bin_labels(series));
  legend(svg, keys);
  return svg.finish();
}

std::string toxicity_bars_svg(const ToxicityReport& report, const TimelineSeries& series, std::string_view title,
                              const std::optional<std::string>& stamp) {
  Svg svg(title, stamp);
  const auto n = report.bin_share.size();
  double top = 0;
  for (double s : report.bin_share) top = std::max(top, s);
  top = nice_max(top);
  std::ostringstream o;
  const double w = kPlotW / static_cast<double>(std::max<std::size_t>(n, 1));
  for (std::size_t i = 0; i < n; ++i) {
    const double y = Svg::y_of(report.bin_share[i], top);
    o << "<rect x=\"" << fmt(kLeft + w * static_cast<double>(i) + w * 0.1) << "\" y=\"" << fmt(y) << "\" width=\""
      << fmt(w * 0.8) << "\" height=\"" << fmt(kTop + kPlotH - y) << "\" fill=\"#8c564b\"/>\n";
  }
  svg.raw(o.str());
  svg.axes(top, "toxic share", bin_labels(series));
  return svg.finish();
}

std::string timeline_csv(const TimelineSeries& series) {
  std::ostringstream o;
  o << "bin_start,total";
  for (const auto& [k, _] : series.group_splits) o << ',' << csv_field(k);
  o << '\n';
  const auto labels = bin_labels(series);
  for (std::size_t i = 0; i < series.size(); ++i) {
    o << csv_field(labels[i]) << ',' << series.counts[i];
    for (const auto& [_, v] : series.group_splits) o << ',' << v[i];
    o << '\n';
  }
  return o.str();
}

std::string distribution_csv(const GroupDistribution& dist, const TimelineSeries& series) {
  std::vector<std::string> keys;
  for (const auto& b : dist.bins)
    if (b.fractions)
      for (const auto& [k, _] : *b.fractions)
        if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  std::ostringstream o;
  o << "bin_start,n_labeled";
  for (const auto& k : keys) o << ',' << csv_field(k);
  o << '\n';
  const auto labels = bin_labels(series);
  for (std::size_t i = 0; i < dist.bins.size(); ++i) {
    const auto& b = dist.bins[i];
    o << csv_field(labels.at(i)) << ',' << b.n_labeled;
    for (const auto& k : keys) {
      o << ',';
      if (!b.fractions) {
        o << "empty";
        continue;
      }
      auto it = b.fractions->find(k);
      o << number(it == b.fractions->end() ? 0.0 : it->second);
    }
    o << '\n';
  }
  return o.str();
}

std::string toxicity_csv(const ToxicityReport& report, const TimelineSeries& series) {
  std::ostringstream o;
  o << "bin_start,total,flagged,share\n";
  const auto labels = bin_labels(series);
  for (std::size_t i = 0; i < report.bin_total.size(); ++i)
    o << csv_field(labels.at(i)) << ',' << report.bin_total[i] << ',' << report.bin_flagged[i] << ','
      << number(report.bin_share[i]) << '\n';
  return o.str();
}

std::string frequency_csv(const FrequencyTable& table, std::string_view key_column) {
  std::ostringstream o;
  o << key_column << ",count\n";
  for (const auto& [k, c] : table) o << csv_field(k) << ',' << c << '\n';
  return o.str();
}

std::string contrast_csv(const std::vector<FeatureContrast>& rows) {
  std::ostringstream o;
  o << "feature,rate_a,rate_b,diff,d,degenerate\n";
  for (const auto& r : rows)
    o << feature_name(r.feature) << ',' << number(r.rate_a) << ',' << number(r.rate_b) << ',' << number(r.diff) << ','
      << number(r.d) << ',' << (r.degenerate ? 1 : 0) << '\n';
  return o.str();
}

std::string html_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

} // namespace stormscope::render
