#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "critgyro/output.hpp"

using namespace critgyro;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t count(const std::string& s, const std::string& what) {
  std::size_t n = 0;
  for (auto at = s.find(what); at != std::string::npos; at = s.find(what, at + 1)) ++n;
  return n;
}

}  // namespace

TEST(AtomicWrite, ReplacesAndLeavesNoTemporary) {
  const auto dir = fs::temp_directory_path() / "critgyro_output_test";
  fs::create_directories(dir);
  const auto p = dir / "a.txt";
  atomic_write(p, "first");
  atomic_write(p, "second\n");
  EXPECT_EQ(slurp(p), "second\n");
  EXPECT_FALSE(fs::exists(dir / "a.txt.tmp"));
  EXPECT_ANY_THROW(atomic_write(dir / "missing" / "b.txt", "x"));
  fs::remove_all(dir);
}

TEST(Svg, StructureAndEscaping) {
  ChartOptions o;
  o.title = "P < 1 & more";
  o.log_x = true;
  const auto svg = svg_line_chart({{"a", {1, 10, 100}, {3, 2, 1}}, {"b", {0, 1, 10}, {1, 1, 1}}}, o);
  EXPECT_EQ(svg.rfind("<svg ", 0), 0u);
  EXPECT_EQ(svg.substr(svg.size() - 7), "</svg>\n");
  EXPECT_EQ(count(svg, "<polyline"), 2u);
  EXPECT_NE(svg.find("P &lt; 1 &amp; more"), std::string::npos);
  EXPECT_EQ(svg.find("nan"), std::string::npos);
  EXPECT_EQ(svg.find("inf"), std::string::npos);
  // Empty input still yields a valid frame.
  const auto empty = svg_line_chart({}, {});
  EXPECT_EQ(count(empty, "<polyline"), 0u);
  EXPECT_NE(empty.find("</svg>"), std::string::npos);
}

TEST(Manifest, Json) {
  RunManifest m;
  m.command = "estimate";
  m.config = R"({"seed": 3})";
  m.seed = 3;
  m.version = "0.1.0";
  m.outputs = {"sigma.csv", "sigma.svg"};
  m.wall_seconds = 1.5;
  const auto j = nlohmann::json::parse(to_json(m));
  EXPECT_EQ(j["command"], "estimate");
  EXPECT_EQ(j["config"]["seed"], 3);
  EXPECT_EQ(j["seed"], 3);
  EXPECT_EQ(j["outputs"].size(), 2u);
  EXPECT_EQ(j["wall_seconds"], 1.5);
  m.config = "not json";
  EXPECT_EQ(nlohmann::json::parse(to_json(m))["config"], "not json");
}
