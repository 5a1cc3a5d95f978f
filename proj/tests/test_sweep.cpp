#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "chiral/dark/analytics.hpp"
#include "chiral/sweep/acceptance.hpp"
#include "chiral/sweep/config.hpp"
#include "chiral/sweep/presets.hpp"
#include "chiral/sweep/runner.hpp"

using namespace chiral;
using namespace chiral::sweep;

namespace {

ConfigError parse_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e;
  }
  ADD_FAILURE() << "no ConfigError for: " << text;
  return ConfigError("", "");
}

std::size_t column(const Table& t, const std::string& name) {
  const auto it = std::find(t.columns.begin(), t.columns.end(), name);
  EXPECT_NE(it, t.columns.end()) << name;
  return static_cast<std::size_t>(it - t.columns.begin());
}

}  // namespace

TEST(Config, UnknownFieldReportsNameAndLine) {
  const ConfigError e = parse_error("{\n  \"mode\": \"steady\",\n  \"params\": {\"omgea\": 1}\n}");
  EXPECT_EQ(e.field, "params.omgea");
  EXPECT_EQ(e.line, 3);
}

TEST(Config, RejectsInvalidValues) {
  EXPECT_EQ(parse_error(R"({"mode": "steady", "params": {"gamma": 2}})").field, "params.gamma");
  EXPECT_EQ(parse_error(R"({"mode": "steady", "params": {"eta": 0.3}})").field, "params.eta");
  EXPECT_EQ(parse_error(R"({"mode": "warp"})").field, "mode");
  EXPECT_EQ(parse_error(R"({"mode": "steady", "grid": [{"name": "omega", "start": 0, "stop": 1, "points": 1}]})")
                .field.rfind("grid[0]", 0),
            0u);
  EXPECT_EQ(parse_error(R"({"mode": "steady", "grid": [{"name": "eta", "values": [0.9, 0.2]}]})").field,
            "grid[0]");
  EXPECT_EQ(parse_error(R"({"mode": "steady", "output": {"format": "xml"}})").field, "output.format");
  EXPECT_EQ(parse_error("{\"mode\": \"steady\",\n \"params\": {").line, 2);
}

TEST(Config, SweepRequiresGrid) {
  EXPECT_THROW(parse_config(R"({"mode": "sweep"})"), ConfigError);
}

TEST(Grid, RowMajorOrderFirstAxisSlowest) {
  const RunConfig cfg = parse_config(R"({"mode": "steady", "grid": [
      {"name": "omega", "values": [0.5, 1.0]},
      {"name": "dphi", "start": -1, "stop": 1, "points": 3}]})");
  const auto pts = grid_points(cfg);
  ASSERT_EQ(pts.size(), 6u);
  EXPECT_EQ(pts[0].omega, 0.5);
  EXPECT_EQ(pts[2].dphi, 1.0);
  EXPECT_EQ(pts[3].omega, 1.0);
  EXPECT_EQ(pts[3].dphi, -1.0);
}

TEST(Output, CsvHeaderAndJsonNull) {
  Table t{{"a", "b"}, {{1.5, std::nan("")}}};
  std::ostringstream csv, jsonl;
  write_csv(csv, t);
  write_jsonl(jsonl, t);
  EXPECT_EQ(csv.str(), "a,b\n1.5,nan\n");
  EXPECT_EQ(jsonl.str(), "{\"a\":1.5,\"b\":null}\n");
}

TEST(Runner, SteadyWithoutDriveIsGroundState) {
  const RunOutput out = execute(parse_config(R"({"mode": "steady", "params": {"omega": 0}})"));
  ASSERT_EQ(out.table.rows.size(), 1u);
  EXPECT_NEAR(out.table.rows[0][column(out.table, "purity")], 1.0, 1e-10);
  EXPECT_NEAR(out.table.rows[0][column(out.table, "pop_g")], 1.0, 1e-10);
}

TEST(Runner, DeterministicAcrossThreadCounts) {
  const RunConfig cfg = parse_config(R"({"mode": "sweep", "params": {"omega": 1.5},
      "grid": [{"name": "dphi", "start": -3, "stop": 3, "points": 7}]})");
  const RunOutput a = execute(cfg, 1);
  const RunOutput b = execute(cfg, 3);
  std::ostringstream sa, sb;
  write_csv(sa, a.table);
  write_csv(sb, b.table);
  EXPECT_EQ(sa.str(), sb.str());
}

TEST(Runner, DarkCurveMatchesClosedForm) {
  const RunOutput out =
      execute(parse_config(R"({"mode": "dark-curve", "solver": {"dark_points": 9}})"));
  const Table& t = out.table;
  ASSERT_EQ(t.rows.size(), 9u);
  for (const auto& row : t.rows) {
    const double x = row[column(t, "dphi")];
    const double omega = row[column(t, "omega_dark")];
    if (x == 0.0 || std::abs(x) >= kPi - 1e-12) {
      EXPECT_TRUE(std::isnan(omega));
      continue;
    }
    EXPECT_NEAR(omega, 1.0 / std::sqrt(1.0 + std::cos(x)), 1e-12);
    EXPECT_NEAR(row[column(t, "phase_shift_rate")], std::tan(0.5 * x), 1e-12);
  }
}

TEST(Runner, PurityMaximaSitOnDarkPhases) {
  const RunConfig cfg = parse_config(R"({"mode": "sweep", "params": {"omega": 2},
      "grid": [{"name": "dphi", "start": -3.141592653589793, "stop": 3.141592653589793, "points": 129}]})");
  const RunOutput out = execute(cfg);
  std::vector<double> pur;
  for (const auto& row : out.table.rows) pur.push_back(row[column(out.table, "purity")]);
  const double h = 2.0 * kPi / 128.0;
  std::vector<double> maxima;
  for (std::size_t i : mps::local_maxima(pur)) maxima.push_back(-kPi + h * i);
  const auto expected = dark::dark_phases(2.0, 0.0, 1.0);
  ASSERT_EQ(maxima.size(), expected.size());
  for (std::size_t k = 0; k < maxima.size(); ++k) EXPECT_NEAR(maxima[k], expected[k], h);
}

TEST(Presets, AllParse) {
  for (const auto& p : figure_recipes()) {
    EXPECT_NO_THROW(parse_config(p.json)) << p.name;
  }
  EXPECT_TRUE(find_preset("fig8").has_value());
  EXPECT_FALSE(find_preset("fig99").has_value());
}

TEST(Acceptance, DecoherenceCheckRejectsExtraLoss) {
  EXPECT_TRUE(criterion_decoherence(0.0).pass);
  EXPECT_FALSE(criterion_decoherence(0.05).pass);
}
