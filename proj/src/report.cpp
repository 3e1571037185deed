#include "occamnet/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace occamnet {

namespace {

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string escape_html(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out += c;
    }
  }
  return out;
}

// Dark-to-bright yellow backgrounds from the xterm 256-colour cube.
constexpr int kAnsiRamp[8] = {236, 58, 100, 136, 142, 178, 184, 226};

std::string html_unit(const TraceUnit& u) {
  const std::string value = fixed4(u.gate);
  return "<span class=\"unit\" style=\"background-color: rgba(255, 230, 0, " + fixed4(highlight_alpha(u.gate)) +
         ")\" title=\"gate " + value + "\">" + escape_html(u.text) + "</span>";
}

std::string render_html(const GateTrace& trace) {
  std::string out;
  out += "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>gate trace</title>\n";
  out += "<style>\nbody { font-family: sans-serif; background: #ffffff; color: #000000; }\n"
         ".unit { padding: 0 2px; margin: 0 1px; border-radius: 2px; }\n"
         ".group { margin: 4px 0; }\n.meta { color: #555555; font-size: 90%; }\n</style>\n";
  out += "</head>\n<body>\n";
  out += "<div class=\"meta\">task: " + escape_html(trace.meta.task) +
         " | checkpoint: " + escape_html(trace.meta.checkpoint) + " | example: " + escape_html(trace.meta.example) +
         "</div>\n";
  auto units_html = [&](std::size_t begin, std::size_t end) {
    std::string s;
    for (std::size_t i = begin; i < end; ++i) {
      if (i > begin) s += ' ';
      s += html_unit(trace.units[i]);
    }
    return s;
  };
  if (trace.groups.empty()) {
    out += "<div class=\"group\">" + units_html(0, trace.units.size()) + "</div>\n";
  } else {
    for (const auto& g : trace.groups) {
      out += "<div class=\"group\"";
      if (g.gate) out += " style=\"opacity: " + fixed4(*g.gate) + "\" title=\"group gate " + fixed4(*g.gate) + "\"";
      out += ">" + units_html(g.begin, g.begin + g.count) + "</div>\n";
    }
  }
  for (const auto& note : trace.meta.notes) out += "<div class=\"meta\">" + escape_html(note) + "</div>\n";
  out += "</body>\n</html>\n";
  return out;
}

std::string ansi_unit(const TraceUnit& u) {
  return "\x1b[30;48;5;" + std::to_string(kAnsiRamp[ansi_level(u.gate)]) + "m" + u.text + "\x1b[0m[" +
         fixed4(u.gate) + "]";
}

std::string render_ansi(const GateTrace& trace) {
  std::string out = "task: " + trace.meta.task + " | checkpoint: " + trace.meta.checkpoint +
                    " | example: " + trace.meta.example + "\n";
  auto line = [&](std::size_t begin, std::size_t end) {
    std::string s;
    for (std::size_t i = begin; i < end; ++i) {
      if (i > begin) s += ' ';
      s += ansi_unit(trace.units[i]);
    }
    return s;
  };
  if (trace.groups.empty()) {
    out += line(0, trace.units.size()) + "\n";
  } else {
    for (const auto& g : trace.groups) {
      if (g.gate) out += "(" + fixed4(*g.gate) + ") ";
      out += line(g.begin, g.begin + g.count) + "\n";
    }
  }
  for (const auto& note : trace.meta.notes) out += note + "\n";
  return out;
}

}  // namespace

void GateTrace::validate() const {
  auto check = [](double v) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("gate trace: value outside [0,1]");
  };
  for (const auto& u : units) check(u.gate);
  std::size_t expected = 0;
  for (const auto& g : groups) {
    if (g.begin != expected) throw std::invalid_argument("gate trace: groups must tile the units in order");
    if (g.gate) check(*g.gate);
    expected += g.count;
  }
  if (!groups.empty() && expected != units.size()) {
    throw std::invalid_argument("gate trace: groups do not cover every unit");
  }
}

HeatmapFormat parse_heatmap_format(const std::string& text) {
  if (text == "html") return HeatmapFormat::kHtml;
  if (text == "ansi") return HeatmapFormat::kAnsi;
  throw std::invalid_argument("unknown report format '" + text + "' (expected html|ansi)");
}

double highlight_alpha(double gate) { return std::clamp(gate, 0.0, 1.0); }

int ansi_level(double gate) { return std::clamp(static_cast<int>(std::floor(gate * 8.0)), 0, 7); }

std::string render_heatmap(const GateTrace& trace, HeatmapFormat format) {
  trace.validate();
  return format == HeatmapFormat::kHtml ? render_html(trace) : render_ansi(trace);
}

}  // namespace occamnet
