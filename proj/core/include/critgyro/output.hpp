#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace critgyro {

/// Writes `content` to a sibling temporary file, then renames it over `path`.
void atomic_write(const std::filesystem::path& path, const std::string& content);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct ChartOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  int width = 640;
  int height = 420;
};

/// Minimal standalone SVG line chart.
std::string svg_line_chart(const std::vector<Series>& series, const ChartOptions& options);

/// Record of one CLI invocation. `config` is a JSON document.
struct RunManifest {
  std::string command;
  std::string config = "{}";
  std::uint64_t seed = 0;
  std::string version;
  std::vector<std::string> outputs;
  double wall_seconds = 0.0;
};

std::string to_json(const RunManifest& manifest);

}  // namespace critgyro
