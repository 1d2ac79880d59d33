#include "doctest.h"

#include "helpers.hpp"
#include "stormscope/render.hpp"

using namespace stormscope;
using testing::day;
using testing::msg;

TEST_CASE("csv fields and numbers") {
  CHECK(render::csv_field("plain") == "plain");
  CHECK(render::csv_field("a,b") == "\"a,b\"");
  CHECK(render::csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(render::number(0.25) == "0.25");
  CHECK(render::number(-0.0) == "0");
  CHECK(render::number(0.1 + 0.2) == "0.30000000000000004");
}

TEST_CASE("timeline csv and svg") {
  Corpus c;
  c.messages = {msg("a", "x", Stance::support_target, day(0)), msg("b", "x", Stance::oppose_target, day(0, 50)),
                msg("c", "x", std::nullopt, day(2))};
  normalize(c);
  const auto s = bin_counts(c, BinSpec::days(1));
  CHECK(render::timeline_csv(s) ==
        "bin_start,total,neutral,off_topic,oppose_both,oppose_target,support_both,support_target,unlabeled\n"
        "2022-10-03,2,0,0,0,1,0,1,0\n2022-10-04,0,0,0,0,0,0,0,0\n2022-10-05,1,0,0,0,0,0,0,1\n");
  const std::vector<std::size_t> peaks = {0, 2};
  const auto seg = segment_phases(s.size(), peaks);
  const auto svg = render::timeline_svg(s, peaks, &seg, "T <1>", std::string("2000-01-01T00:00:00Z"));
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("T &lt;1&gt;") != std::string::npos);
  CHECK(svg.find("generated 2000-01-01T00:00:00Z") != std::string::npos);
  std::size_t circles = 0;
  for (auto p = svg.find("class=\"peak\""); p != std::string::npos; p = svg.find("class=\"peak\"", p + 1)) ++circles;
  CHECK(circles == 2);
  CHECK(render::timeline_svg(s, peaks, &seg, "T", std::nullopt).find("generated") == std::string::npos);
}

TEST_CASE("distribution csv marks empty bins") {
  Corpus c;
  c.messages = {msg("a", "x", Stance::support_target, day(0)), msg("c", "x", Stance::neutral, day(2))};
  normalize(c);
  const auto s = bin_counts(c, BinSpec::days(1));
  const auto d = group_distribution(c, s);
  CHECK(render::distribution_csv(d, s) ==
        "bin_start,n_labeled,neutral,support_target\n2022-10-03,1,0,1\n2022-10-04,0,empty,empty\n2022-10-05,1,1,0\n");
  const auto svg = render::stacked_area_svg(d, s, "groups", std::nullopt);
  CHECK(svg.find("class=\"empty\"") != std::string::npos);
}
