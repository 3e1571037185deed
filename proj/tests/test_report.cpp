#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "occamnet/report.hpp"

using namespace occamnet;

namespace {

GateTrace story_trace() {
  GateTrace t;
  t.units = {{"mary", 0.91}, {"went", 0.05}, {"to", 0.0}, {"the", 0.12}, {"kitchen", 1.0},
             {"john", 0.2},  {"moved", 0.3}, {"<home>", 0.5}};
  t.groups = {{0, 5, 0.97}, {5, 3, 0.03}};
  t.meta.task = "babi";
  t.meta.checkpoint = "run.ckpt";
  t.meta.example = "test#3";
  t.meta.notes = {"question: where is mary", "answer: kitchen | predicted: kitchen"};
  return t;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string alpha_of(const std::string& html, const std::string& word) {
  const auto end = html.find(">" + word + "</span>");
  const auto start = html.rfind("rgba(255, 230, 0, ", end);
  return html.substr(start + 18, 6);
}

}  // namespace

TEST(Heatmap, AlphaTracksTheGate) {
  EXPECT_EQ(highlight_alpha(0.0), 0.0);
  EXPECT_EQ(highlight_alpha(1.0), 1.0);
  EXPECT_LT(highlight_alpha(0.25), highlight_alpha(0.5));
  EXPECT_LT(highlight_alpha(0.5), highlight_alpha(0.75));
}

TEST(Heatmap, HtmlSpansCarryTheirGate) {
  const std::string html = render_heatmap(story_trace(), HeatmapFormat::kHtml);
  EXPECT_EQ(alpha_of(html, "to"), "0.0000");
  EXPECT_EQ(alpha_of(html, "kitchen"), "1.0000");
  EXPECT_EQ(alpha_of(html, "mary"), "0.9100");
  EXPECT_NE(html.find("&lt;home&gt;"), std::string::npos);
  EXPECT_NE(html.find("opacity: 0.9700"), std::string::npos);
  EXPECT_NE(html.find("opacity: 0.0300"), std::string::npos);
  EXPECT_NE(html.find("question: where is mary"), std::string::npos);
}

TEST(Heatmap, AnsiRampIsMonotone) {
  EXPECT_EQ(ansi_level(0.0), 0);
  EXPECT_EQ(ansi_level(1.0), 7);
  EXPECT_EQ(ansi_level(0.5), 4);
  int prev = -1;
  for (int i = 0; i <= 100; ++i) {
    const int level = ansi_level(i / 100.0);
    EXPECT_GE(level, prev);
    prev = level;
  }
  const std::string text = render_heatmap(story_trace(), HeatmapFormat::kAnsi);
  EXPECT_NE(text.find("kitchen\x1b[0m[1.0000]"), std::string::npos);
  EXPECT_NE(text.find("(0.9700) "), std::string::npos);
}

TEST(Heatmap, RenderingIsPure) {
  EXPECT_EQ(render_heatmap(story_trace(), HeatmapFormat::kHtml), render_heatmap(story_trace(), HeatmapFormat::kHtml));
}

TEST(Heatmap, UngroupedTraceRendersOneLine) {
  GateTrace t;
  t.units = {{"a", 0.1}, {"b", 0.9}};
  const std::string text = render_heatmap(t, HeatmapFormat::kAnsi);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
}

TEST(Heatmap, ValidationRejectsBadTraces) {
  GateTrace t = story_trace();
  t.units[1].gate = 1.5;
  EXPECT_THROW(render_heatmap(t, HeatmapFormat::kHtml), std::invalid_argument);
  t = story_trace();
  t.units[1].gate = std::nan("");
  EXPECT_THROW(t.validate(), std::invalid_argument);
  t = story_trace();
  t.groups[1].begin = 4;
  EXPECT_THROW(t.validate(), std::invalid_argument);
  t = story_trace();
  t.groups[1].count = 2;
  EXPECT_THROW(t.validate(), std::invalid_argument);
  t = story_trace();
  t.groups[0].gate = -0.1;
  EXPECT_THROW(t.validate(), std::invalid_argument);
  EXPECT_THROW(parse_heatmap_format("svg"), std::invalid_argument);
}

TEST(Heatmap, HtmlMatchesGolden) {
  const std::string path = std::string(OCCAMNET_GOLDEN) + "/heatmap.html";
  const std::string html = render_heatmap(story_trace(), HeatmapFormat::kHtml);
  if (std::getenv("OCCAMNET_UPDATE_GOLDEN")) {
    std::ofstream(path, std::ios::binary) << html;
  }
  EXPECT_EQ(html, read_file(path));
}
