#pragma once

// JSON case files. The schema is documented in docs/case_schema.md.

#include "flexgauge/model.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace flexgauge {

inline constexpr int kCaseSchemaVersion = 1;

struct LoadedCase {
  SystemCase system;
  std::vector<std::string> warnings;  // plausibility notes (e.g. AGC coefficients)
};

// Throws ParseError (with line/column or field path) on malformed input and
// ValidationError when the parsed case fails validate_case.
LoadedCase parse_case(std::string_view text, const std::string& source = "<input>");
LoadedCase load_case(const std::filesystem::path& path);

// DC power transfer distribution factors: flow on each line per MW injected
// at each bus and withdrawn at the slack bus. Lines are (from, to, reactance)
// by bus index. Returns lines x buses.
std::vector<std::vector<double>> compute_ptdf(std::size_t n_buses,
                                              const std::vector<std::tuple<int, int, double>>& lines,
                                              int slack_bus);

}  // namespace flexgauge
