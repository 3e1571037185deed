#pragma once

// Gate-activation traces and their heatmap rendering.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace occamnet {

struct TraceUnit {
  std::string text;
  double gate = 0.0;
};

/// A contiguous run of units (one fact, one sentence) with an optional gate
/// for the whole group.
struct TraceGroup {
  std::size_t begin = 0;
  std::size_t count = 0;
  std::optional<double> gate;
};

struct TraceMetadata {
  std::string task;
  std::string checkpoint;
  std::string example;
  /// Free-form lines shown under the trace (question, answer, prediction).
  std::vector<std::string> notes;
};

struct GateTrace {
  std::vector<TraceUnit> units;
  std::vector<TraceGroup> groups;
  TraceMetadata meta;

  /// Throws std::invalid_argument on gates outside [0,1] or groups that do
  /// not tile the units in order.
  void validate() const;
};

enum class HeatmapFormat { kHtml, kAnsi };

HeatmapFormat parse_heatmap_format(const std::string& text);

/// HTML: every unit is a span whose highlight alpha equals its gate; a group
/// with a gate renders at that opacity. ANSI: 8-step background ramp with the
/// value in brackets. Output is a pure function of the trace.
std::string render_heatmap(const GateTrace& trace, HeatmapFormat format);

/// Highlight alpha used for a gate value in HTML output.
double highlight_alpha(double gate);
/// ANSI ramp level in 0..7.
int ansi_level(double gate);

}  // namespace occamnet
