#include "flexgauge/sweep.hpp"

#include "flexgauge/compact_form.hpp"
#include "flexgauge/errors.hpp"
#include "flexgauge/lp.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <future>
#include <sstream>

namespace flexgauge {

double base_budget(const SystemCase& c) {
  SystemCase probe = c;
  probe.budget = std::max(probe.budget, 0.0);
  const CompactForm cf = assemble(probe);
  LinearProgram lp;
  for (const auto& col : cf.x_columns) lp.add_variable(0.0, kInf, col.cost_auxiliary ? 1.0 : 0.0, col.name);
  auto add_block = [&](const SparseMatrix& m, Block blk, RowSense sense, const std::vector<double>& rhs) {
    std::vector<std::vector<std::pair<int, double>>> rows(m.rows);
    for (const auto& e : m.entries) rows[e.row].emplace_back(e.col, e.value);
    for (int i = 0; i < m.rows; ++i)
      lp.add_row(std::move(rows[i]), sense, rhs[i], cf.row_labels[static_cast<std::size_t>(blk)][i].name);
  };
  const auto u = c.uncertainty();
  add_block(cf.a1, Block::a1, RowSense::less_equal, cf.b1);
  add_block(cf.a2, Block::a2, RowSense::equal, cf.h2.multiply(u.d_bar));
  auto b3 = cf.h3.multiply(u.d_bar);
  for (std::size_t i = 0; i < b3.size(); ++i) b3[i] += cf.b3[i];
  add_block(cf.a3, Block::a3, RowSense::less_equal, b3);
  const auto r = solve_lp(lp);
  if (r.status == SolveStatus::infeasible) throw BaseInfeasible(kInf);
  if (!r.optimal()) throw SolverError(std::string("base dispatch LP ") + to_string(r.status));
  return r.objective;
}

std::string_view to_string(SweepTarget t) {
  switch (t) {
    case SweepTarget::budget: return "budget";
    case SweepTarget::ramp: return "ramp";
    case SweepTarget::line: return "line";
  }
  return "unknown";
}

SweepTarget parse_sweep_target(std::string_view name) {
  if (name == "budget") return SweepTarget::budget;
  if (name == "ramp") return SweepTarget::ramp;
  if (name == "line") return SweepTarget::line;
  throw ParseError("unknown sweep target '" + std::string(name) + "' (expected budget, ramp or line)");
}

void validate_sweep(const SweepSpec& spec) {
  if (spec.scale_factors.empty()) throw ValidationError("sweep needs at least one scale factor");
  for (std::size_t i = 0; i < spec.scale_factors.size(); ++i) {
    if (!(spec.scale_factors[i] > 0.0)) throw ValidationError("scale factors must be > 0");
    if (i > 0 && !(spec.scale_factors[i] > spec.scale_factors[i - 1]))
      throw ValidationError("scale factors must be sorted ascending");
  }
}

SystemCase scaled_case(const SystemCase& c, const SweepSpec& spec, double sf, double b0) {
  SystemCase s = c;
  switch (spec.target) {
    case SweepTarget::budget: s.budget = sf * b0; break;
    case SweepTarget::ramp:
      for (auto& g : s.generators) {
        g.rur *= sf;
        g.rdr *= sf;
      }
      break;
    case SweepTarget::line:
      for (auto& l : s.lines) l.capacity *= sf;
      break;
  }
  return s;
}

SweepResult run_sweep(const SystemCase& c, const SweepSpec& spec, const BendersOptions& opts) {
  validate_sweep(spec);
  SweepResult result;
  result.target = spec.target;
  if (spec.target == SweepTarget::budget) result.b0 = spec.base_budget ? *spec.base_budget : base_budget(c);

  std::vector<std::future<SweepRow>> jobs;
  for (double sf : spec.scale_factors) {
    jobs.push_back(std::async(std::launch::async, [&, sf] {
      SweepRow row;
      row.sf = sf;
      try {
        const auto report = run_benders(scaled_case(c, spec, sf, result.b0), opts);
        row.indices = report.indices;
        row.iterations = report.iterations;
      } catch (const BaseInfeasible& e) {
        row.base_eta = e.eta();
      }
      return row;
    }));
  }
  for (auto& j : jobs) result.rows.push_back(j.get());
  return result;
}

std::string format_number(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string results_csv(const std::vector<SweepRow>& rows) {
  std::string out = kResultsHeader;
  out += '\n';
  for (const auto& r : rows) {
    out += format_number(r.sf);
    if (r.indices) {
      const auto& ix = *r.indices;
      for (double v : {ix.tf, ix.edf, ix.agcf, ix.edupf, ix.eddnf, ix.agcupf, ix.agcdnf}) out += ',' + format_number(v);
    } else {
      for (int k = 0; k < 7; ++k) out += ",NA";
    }
    out += '\n';
  }
  return out;
}

std::vector<SweepRow> parse_results_csv(std::string_view text) {
  std::vector<SweepRow> rows;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line_no == 1) {
      if (line != kResultsHeader) throw ParseError("results CSV: unexpected header");
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      cells.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (cells.size() != 8) throw ParseError("results CSV line " + std::to_string(line_no) + ": expected 8 cells");
    auto num = [&](std::string_view s) {
      double v = 0.0;
      const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
      if (r.ec != std::errc() || r.ptr != s.data() + s.size())
        throw ParseError("results CSV line " + std::to_string(line_no) + ": bad number '" + std::string(s) + "'");
      return v;
    };
    SweepRow row;
    row.sf = num(cells[0]);
    if (cells[1] != "NA") {
      Indices ix;
      double* fields[] = {&ix.tf, &ix.edf, &ix.agcf, &ix.edupf, &ix.eddnf, &ix.agcupf, &ix.agcdnf};
      for (int k = 0; k < 7; ++k) *fields[k] = num(cells[k + 1]);
      row.indices = ix;
    } else {
      for (int k = 2; k < 8; ++k)
        if (cells[k] != "NA") throw ParseError("results CSV line " + std::to_string(line_no) + ": partial NA row");
    }
    rows.push_back(row);
  }
  return rows;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace

void emit_results(const SweepResult& result, const RunMetadata& meta, const std::filesystem::path& out_dir) {
  if (result.rows.empty()) throw Error("emit_results: empty table");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error("cannot create " + out_dir.string() + ": " + ec.message());

  write_file(out_dir / "results.csv", results_csv(result.rows));

  const char* names[] = {"TF", "EDF", "AGCF", "EDUPF", "EDDNF", "AGCUPF", "AGCDNF"};
  for (int k = 0; k < 7; ++k) {
    std::string series;
    for (const auto& r : result.rows) {
      if (!r.indices) continue;
      const auto& ix = *r.indices;
      const double v[] = {ix.tf, ix.edf, ix.agcf, ix.edupf, ix.eddnf, ix.agcupf, ix.agcdnf};
      series += format_number(r.sf) + ' ' + format_number(v[k]) + '\n';
    }
    write_file(out_dir / (std::string(names[k]) + ".dat"), series);
  }

  nlohmann::ordered_json m;
  m["command"] = meta.command;
  m["case"] = meta.case_name;
  m["target"] = std::string(to_string(result.target));
  if (result.target == SweepTarget::budget) m["b0"] = result.b0;
  m["tol"] = meta.tol;
  m["max_iters"] = meta.max_iters;
  m["kernels"] = meta.isa;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : result.rows) {
    nlohmann::ordered_json row;
    row["sf"] = r.sf;
    row["status"] = r.indices ? "ok" : "base_infeasible";
    row["iterations"] = r.iterations;
    if (!r.indices) row["base_eta"] = r.base_eta;
    rows.push_back(row);
  }
  m["runs"] = rows;
  write_file(out_dir / "metadata.json", m.dump(2) + "\n");
}

}  // namespace flexgauge
