#pragma once

// Scale-factor sweeps over budget, ramp limits or line capacities, and their
// CSV / plot-series output.

#include "flexgauge/benders.hpp"
#include "flexgauge/model.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace flexgauge {

// Minimum nominal dispatch cost: generation limits, reserve caps and
// requirements, balance and line limits at d = d_bar, no AGC. Throws
// BaseInfeasible when that dispatch problem has no solution.
double base_budget(const SystemCase& c);

enum class SweepTarget { budget, ramp, line };

std::string_view to_string(SweepTarget t);
// Throws ParseError on unknown names.
SweepTarget parse_sweep_target(std::string_view name);

struct SweepSpec {
  SweepTarget target = SweepTarget::budget;
  std::vector<double> scale_factors;
  // Budget sweeps scale this value; defaults to base_budget(case).
  std::optional<double> base_budget;
};

// Throws ValidationError unless every factor is > 0 and the list is sorted ascending.
void validate_sweep(const SweepSpec& spec);

// Case with the sweep target scaled by sf.
SystemCase scaled_case(const SystemCase& c, const SweepSpec& spec, double sf, double b0);

struct SweepRow {
  double sf = 0.0;
  std::optional<Indices> indices;  // empty when the scaled case is base-infeasible
  int iterations = 0;
  double base_eta = 0.0;  // eta at lambda = 0 for infeasible rows
};

struct SweepResult {
  SweepTarget target = SweepTarget::budget;
  double b0 = 0.0;
  std::vector<SweepRow> rows;
};

SweepResult run_sweep(const SystemCase& c, const SweepSpec& spec, const BendersOptions& opts = {});

inline constexpr const char* kResultsHeader = "SF,TF,EDF,AGCF,EDUPF,EDDNF,AGCUPF,AGCDNF";

std::string format_number(double v);
std::string results_csv(const std::vector<SweepRow>& rows);
// Inverse of results_csv; throws ParseError on malformed text.
std::vector<SweepRow> parse_results_csv(std::string_view text);

struct RunMetadata {
  std::string command;
  std::string case_name;
  double tol = 0.0;
  int max_iters = 0;
  std::string isa;
};

// Writes results.csv, one "<index>.dat" series per index and metadata.json.
// Throws Error on I/O failure or an empty table.
void emit_results(const SweepResult& result, const RunMetadata& meta, const std::filesystem::path& out_dir);

}  // namespace flexgauge
