#include "fixtures.hpp"

#include "flexgauge/benders.hpp"
#include "flexgauge/case_io.hpp"
#include "flexgauge/errors.hpp"
#include "flexgauge/sweep.hpp"

#include <json.hpp>
#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace flexgauge;
using nlohmann::json;

namespace {

json desk_json() {
  std::ifstream in(fixtures::case_path("desk_2bus.json"));
  return json::parse(in);
}

std::string error_of(const std::string& text) {
  try {
    parse_case(text, "test.json");
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

// DC flows from a full-Laplacian pseudo-inverse for a unit injection at bus i
// withdrawn at the slack bus.
std::vector<std::vector<double>> flows_by_pseudo_inverse(int n, const std::vector<std::tuple<int, int, double>>& lines,
                                                         int slack) {
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [f, t, x] : lines) {
    l(f, f) += 1 / x;
    l(t, t) += 1 / x;
    l(f, t) -= 1 / x;
    l(t, f) -= 1 / x;
  }
  const Eigen::MatrixXd pinv = l.completeOrthogonalDecomposition().pseudoInverse();
  std::vector<std::vector<double>> out(lines.size(), std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd inj = Eigen::VectorXd::Zero(n);
    inj(i) += 1.0;
    inj(slack) -= 1.0;
    const Eigen::VectorXd theta = pinv * inj;
    for (std::size_t k = 0; k < lines.size(); ++k) {
      const auto& [f, t, x] = lines[k];
      out[k][i] = (theta(f) - theta(t)) / x;
    }
  }
  return out;
}

}  // namespace

TEST(LoadCase, BundledTwoBus) {
  const auto loaded = load_case(fixtures::case_path("desk_2bus.json"));
  const auto& c = loaded.system;
  EXPECT_EQ(c.n_buses(), 2u);
  EXPECT_EQ(c.n_generators(), 2u);
  EXPECT_EQ(c.n_lines(), 1u);
  EXPECT_EQ(c.n_sub_intervals(), 2u);
  EXPECT_TRUE(validate_case(c).empty());
  EXPECT_NEAR(c.buses[0].d_hat, 9.0, 1e-12);
  EXPECT_NEAR(c.buses[1].d_hat, 13.5, 1e-12);
  EXPECT_NEAR(c.budget, 1.5 * base_budget(c), 1e-9);
  EXPECT_EQ(c.generators[0].k_gain, c.agc.k_gain(0));
}

TEST(LoadCase, AllBundledCasesLoad) {
  for (const auto& name : fixtures::desk_cases()) EXPECT_NO_THROW(fixtures::load(name)) << name;
}

TEST(ParseCase, FractionOfNominal) {
  auto j = desk_json();
  j["buses"][0]["d_bar"] = 100;
  j["budget"] = 1e6;
  const auto c = parse_case(j.dump()).system;
  EXPECT_NEAR(c.buses[0].d_hat, 15.0, 1e-12);
  j["buses"][1]["d_hat"] = 7;
  EXPECT_EQ(parse_case(j.dump()).system.buses[1].d_hat, 7.0);
  j["buses"][1].erase("d_hat");
  j["buses"][1]["d_hat_fraction"] = 0.5;
  EXPECT_EQ(parse_case(j.dump()).system.buses[1].d_hat, 45.0);
}

TEST(ParseCase, MalformedShiftFactorNamesLine) {
  auto j = desk_json();
  j["lines"][0] = {{"id", "tie-7"}, {"capacity", 40}, {"shift_factors", {0.0, "x"}}};
  const auto msg = error_of(j.dump());
  EXPECT_NE(msg.find("tie-7"), std::string::npos) << msg;
  j["lines"][0]["shift_factors"] = {{"9", 0.5}};
  EXPECT_NE(error_of(j.dump()).find("tie-7"), std::string::npos);
}

TEST(ParseCase, ShiftFactorMapAndArray) {
  auto j = desk_json();
  j["lines"][0] = {{"id", "l1"}, {"capacity", 40}, {"shift_factors", {{"2", -1.0}}}};
  auto c = parse_case(j.dump()).system;
  EXPECT_EQ(c.lines[0].shift_factors, (std::vector<double>{0.0, -1.0}));
  j["lines"][0]["shift_factors"] = {0.25, -0.75};
  c = parse_case(j.dump()).system;
  EXPECT_EQ(c.lines[0].shift_factors, (std::vector<double>{0.25, -0.75}));
}

TEST(ParseCase, MalformedJsonReportsPosition) {
  const std::string text = "{\n  \"schema_version\": 1,\n  \"buses\": [,]\n}";
  const auto msg = error_of(text);
  EXPECT_NE(msg.find("test.json:3:"), std::string::npos) << msg;
  try {
    parse_case(text);
    FAIL();
  } catch (const ParseError&) {
  }
}

TEST(ParseCase, MissingFieldNamesPath) {
  auto j = desk_json();
  j["generators"][1].erase("p_max");
  const auto msg = error_of(j.dump());
  EXPECT_NE(msg.find("generators[1]"), std::string::npos) << msg;
  EXPECT_NE(msg.find("p_max"), std::string::npos) << msg;
}

TEST(ParseCase, SchemaVersionChecked) {
  auto j = desk_json();
  j["schema_version"] = 2;
  EXPECT_THROW(parse_case(j.dump()), ParseError);
}

TEST(ParseCase, ValidationFailuresForwarded) {
  auto j = desk_json();
  j["generators"][0]["p_min"] = 500;
  j["budget"] = 1e6;
  try {
    parse_case(j.dump());
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("g1"), std::string::npos);
  }
}

TEST(ParseCase, DiscreteAgcPassThrough) {
  const auto c4 = fixtures::load("desk_4bus_t2.json");
  EXPECT_NEAR(c4.agc.rho, -0.0159791, 1e-12);
  auto j = desk_json();
  j["agc"] = {{"model", "discrete"},
              {"alpha", {{0.5, 0.0}, {0.0, 0.5}}},
              {"beta", {{0.1, 0.0}, {0.0, 0.1}}},
              {"gamma", {0.0, 0.0}},
              {"zeta", {0.0, 0.0}},
              {"kappa", {0.01, 0.01}},
              {"tau_coef", {0.0, 0.0}},
              {"rho", 3.0},
              {"eta", -0.1},
              {"k_gain", {-1.0, -2.0}},
              {"freq_min", -0.1},
              {"freq_max", 0.1}};
  const auto loaded = parse_case(j.dump());
  EXPECT_EQ(loaded.system.agc.rho, 3.0);
  EXPECT_EQ(loaded.system.generators[1].k_gain, -2.0);
  ASSERT_EQ(loaded.warnings.size(), 1u);
  j["agc"]["alpha"] = {{0.5, 0.0, 0.0}};
  EXPECT_THROW(parse_case(j.dump()), ParseError);
}

TEST(ParseCase, PerIntervalSeries) {
  auto j = desk_json();
  j["uncertainty"]["delta_d_bar"] = {1.0, -1.0};
  j["agc"]["freq_max_t"] = {0.2, 0.3};
  const auto c = parse_case(j.dump()).system;
  EXPECT_EQ(c.delta_d_bar, (std::vector<double>{1.0, -1.0}));
  EXPECT_EQ(c.delta_d_hat, (std::vector<double>{3.0, 3.0}));
  EXPECT_EQ(c.agc.freq_upper(1), 0.3);
  EXPECT_EQ(c.agc.freq_lower(1), -0.1);
  j["uncertainty"]["delta_d_bar"] = {1.0, 2.0, 3.0};
  EXPECT_THROW(parse_case(j.dump()), ParseError);
}

TEST(LoadCase, MissingFile) { EXPECT_THROW(load_case("/nonexistent/case.json"), ParseError); }

TEST(Ptdf, TwoBus) {
  const auto p = compute_ptdf(2, {{0, 1, 0.1}}, 0);
  EXPECT_EQ(p[0][0], 0.0);
  EXPECT_NEAR(p[0][1], -1.0, 1e-12);
}

TEST(Ptdf, MatchesPseudoInverseFlows) {
  const std::vector<std::tuple<int, int, double>> mesh = {{0, 1, 0.1}, {1, 2, 0.2}, {0, 2, 0.25}, {2, 3, 0.05}};
  for (int slack : {0, 2}) {
    const auto p = compute_ptdf(4, mesh, slack);
    const auto ref = flows_by_pseudo_inverse(4, mesh, slack);
    for (std::size_t k = 0; k < mesh.size(); ++k)
      for (int i = 0; i < 4; ++i) EXPECT_NEAR(p[k][i], ref[k][i], 1e-12);
  }
  // Radial line carries the whole injection.
  const auto p = compute_ptdf(4, mesh, 0);
  EXPECT_NEAR(p[3][3], -1.0, 1e-12);
}

TEST(Ptdf, DisconnectedNetworkRejected) {
  EXPECT_THROW(compute_ptdf(3, {{0, 1, 0.1}}, 0), ValidationError);
}

TEST(CaseIo, CommentedExampleLoads) {
  const auto loaded = load_case(fixtures::case_path("example_commented.json"));
  const auto& c = loaded.system;
  EXPECT_EQ(c.name, "example-2bus");
  ASSERT_EQ(c.n_buses(), 2u);
  EXPECT_DOUBLE_EQ(c.buses[0].d_hat, 7.0);
  EXPECT_DOUBLE_EQ(c.buses[1].d_hat, 12.0);
  EXPECT_EQ(c.n_sub_intervals(), 3u);
  EXPECT_EQ(c.delta_d_hat, (std::vector<double>{2.0, 2.0, 2.0}));
  EXPECT_TRUE(validate_case(c).empty());
  EXPECT_NO_THROW(run_benders(c));
}
