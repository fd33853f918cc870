#include "flexgauge/compact_form.hpp"

#include "flexgauge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace flexgauge {

double SparseMatrix::at(int r, int c) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), std::pair{r, c}, [](const Triplet& t, const auto& key) {
    return std::pair{t.row, t.col} < key;
  });
  return (it != entries.end() && it->row == r && it->col == c) ? it->value : 0.0;
}

std::vector<double> SparseMatrix::multiply(std::span<const double> v) const {
  if (v.size() != static_cast<std::size_t>(cols)) throw DimensionError("sparse multiply: vector length mismatch");
  std::vector<double> out(rows, 0.0);
  for (const auto& t : entries) out[t.row] += t.value * v[t.col];
  return out;
}

Eigen::MatrixXd SparseMatrix::to_dense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
  for (const auto& t : entries) m(t.row, t.col) = t.value;
  return m;
}

int SparseBuilder::new_row() {
  if (rows_ > 0) flush();
  return rows_++;
}

void SparseBuilder::add(int col, double value) {
  if (rows_ == 0) throw Error("SparseBuilder::add before new_row");
  if (col < 0 || col >= cols_) throw Error("SparseBuilder::add: column out of range");
  current_[col] += value;
}

void SparseBuilder::flush() {
  for (const auto& [c, v] : current_)
    if (v != 0.0) entries_.push_back({rows_ - 1, c, v});
  current_.clear();
}

SparseMatrix SparseBuilder::finish() {
  if (rows_ > 0) flush();
  return SparseMatrix{rows_, cols_, std::move(entries_)};
}

std::size_t CompactForm::total_rows() const {
  std::size_t n = 0;
  for (const auto& rl : row_labels) n += rl.size();
  return n;
}

std::array<std::size_t, kBlockCount> expected_row_counts(const SystemCase& c) {
  const std::size_t g = c.n_generators();
  const std::size_t t = c.n_sub_intervals();
  std::size_t pieces = 0;
  for (const auto& gen : c.generators) pieces += std::max<std::size_t>(1, gen.cost_segments.size());
  return {5 * g + pieces + 3, 1, 2 * c.n_lines(), (g + 1) * t, g * t, 4 * g * t + 2 * t, 1 + 2 * g * t};
}

namespace {

std::string tag(const std::string& name, const std::string& gen) { return name + "[" + gen + "]"; }
std::string tag(const std::string& name, const std::string& gen, int t) {
  return name + "[" + gen + ",t" + std::to_string(t + 1) + "]";
}
std::string tag_t(const std::string& name, int t) { return name + "[t" + std::to_string(t + 1) + "]"; }

// Column layout helper for the y vector.
struct YLayout {
  int g;
  int t;
  int pm(int n, int k) const { return k * g + n; }
  int gv(int n, int k) const { return g * t + k * g + n; }
  int w(int k) const { return 2 * g * t + k; }
  int fp(int n, int k) const { return 2 * g * t + t + k * g + n; }
  int fm(int n, int k) const { return 3 * g * t + t + k * g + n; }
  int size() const { return 4 * g * t + t; }
};

}  // namespace

CompactForm assemble(const SystemCase& c) {
  if (auto v = validate_case(c); !v.empty()) throw ValidationError("assemble: invalid case: " + v.front().message);

  const int nb = static_cast<int>(c.n_buses());
  const int ng = static_cast<int>(c.n_generators());
  const int nl = static_cast<int>(c.n_lines());
  const int nt = static_cast<int>(c.n_sub_intervals());
  const auto gen_bus = c.generator_bus_index();
  const auto& agc = c.agc;

  CompactForm cf;
  cf.n_buses = c.n_buses();
  cf.n_sub = c.n_sub_intervals();
  cf.n_generators = c.n_generators();
  cf.a = objective_coefficients(c.uncertainty());

  // x columns
  auto p_col = [&](int n) { return n; };
  auto ru_col = [&](int n) { return ng + n; };
  auto rd_col = [&](int n) { return 2 * ng + n; };
  auto sr_col = [&](int n) { return 3 * ng + n; };
  auto cost_col = [&](int n) { return 4 * ng + n; };
  const char* x_names[] = {"p", "reg_up", "reg_dn", "sr", "cost"};
  for (int blk = 0; blk < 5; ++blk)
    for (int n = 0; n < ng; ++n) cf.x_columns.push_back({tag(x_names[blk], c.generators[n].id), blk == 4});
  const int nx = static_cast<int>(cf.x_columns.size());

  const YLayout y{ng, nt};
  cf.y_columns.resize(y.size());
  for (int k = 0; k < nt; ++k) {
    for (int n = 0; n < ng; ++n) {
      const auto& id = c.generators[n].id;
      cf.y_columns[y.pm(n, k)] = {tag("pm", id, k)};
      cf.y_columns[y.gv(n, k)] = {tag("gv", id, k)};
      cf.y_columns[y.fp(n, k)] = {tag("fgv+", id, k)};
      cf.y_columns[y.fm(n, k)] = {tag("fgv-", id, k)};
    }
    cf.y_columns[y.w(k)] = {tag_t("w", k)};
  }
  const int ny = y.size();
  for (int j = 0; j < nx; ++j) cf.x_index[cf.x_columns[j].name] = j;
  for (int j = 0; j < ny; ++j) cf.y_index[cf.y_columns[j].name] = j;

  auto& rows = cf.row_labels;
  auto label = [&](Block b, std::string name, int sign = 1) {
    rows[static_cast<std::size_t>(b)].push_back({std::move(name), sign});
  };

  // A1: generation limits, reserve caps, cost epigraph, system requirements.
  {
    SparseBuilder a1(nx);
    for (int n = 0; n < ng; ++n) {
      const auto& g = c.generators[n];
      a1.new_row();
      a1.add(p_col(n), 1.0);
      a1.add(ru_col(n), 1.0);
      a1.add(sr_col(n), 1.0);
      cf.b1.push_back(g.p_max);
      label(Block::a1, tag("gen_max", g.id));

      a1.new_row();
      a1.add(p_col(n), -1.0);
      a1.add(rd_col(n), 1.0);
      cf.b1.push_back(-g.p_min);
      label(Block::a1, tag("gen_min", g.id), -1);

      a1.new_row();
      a1.add(ru_col(n), 1.0);
      cf.b1.push_back(g.reg_up_cap);
      label(Block::a1, tag("reg_up_cap", g.id));

      a1.new_row();
      a1.add(rd_col(n), 1.0);
      cf.b1.push_back(g.reg_dn_cap);
      label(Block::a1, tag("reg_dn_cap", g.id));

      a1.new_row();
      a1.add(sr_col(n), 1.0);
      cf.b1.push_back(g.sr_cap);
      label(Block::a1, tag("sr_cap", g.id));

      const auto pieces = g.cost_pieces();
      for (std::size_t k = 0; k < pieces.size(); ++k) {
        // intercept + slope p <= cost
        a1.new_row();
        a1.add(p_col(n), pieces[k].second);
        a1.add(cost_col(n), -1.0);
        cf.b1.push_back(-pieces[k].first);
        label(Block::a1, "cost_piece[" + g.id + "," + std::to_string(k) + "]", -1);
      }
    }
    a1.new_row();
    for (int n = 0; n < ng; ++n) a1.add(sr_col(n), -1.0);
    cf.b1.push_back(-c.reserves.sr_min);
    label(Block::a1, "sr_req", -1);
    a1.new_row();
    for (int n = 0; n < ng; ++n) a1.add(ru_col(n), -1.0);
    cf.b1.push_back(-c.reserves.reg_min_up);
    label(Block::a1, "reg_up_req", -1);
    a1.new_row();
    for (int n = 0; n < ng; ++n) a1.add(rd_col(n), -1.0);
    cf.b1.push_back(-c.reserves.reg_min_dn);
    label(Block::a1, "reg_dn_req", -1);
    cf.a1 = a1.finish();
  }

  // A2/H2: single system-wide balance row.
  {
    SparseBuilder a2(nx), h2(nb);
    a2.new_row();
    h2.new_row();
    for (int n = 0; n < ng; ++n) a2.add(p_col(n), 1.0);
    for (int b = 0; b < nb; ++b) h2.add(b, 1.0);
    label(Block::a2, "balance");
    cf.a2 = a2.finish();
    cf.h2 = h2.finish();
  }

  // A3/H3/b3: both flow directions per line.
  {
    SparseBuilder a3(nx), h3(nb);
    for (int l = 0; l < nl; ++l) {
      const auto& line = c.lines[l];
      for (int dir : {1, -1}) {
        a3.new_row();
        h3.new_row();
        for (int n = 0; n < ng; ++n) a3.add(p_col(n), dir * line.shift_factors[gen_bus[n]]);
        for (int b = 0; b < nb; ++b) h3.add(b, dir * line.shift_factors[b]);
        cf.b3.push_back(line.capacity);
        label(Block::a3, tag(dir > 0 ? "flow_pos" : "flow_neg", line.id));
      }
    }
    cf.a3 = a3.finish();
    cf.h3 = h3.finish();
  }

  // A4/H4: AGC state recursion, zero initial state.
  {
    SparseBuilder a4(ny), h4(nt);
    for (int k = 0; k < nt; ++k) {
      for (int n = 0; n < ng; ++n) {
        a4.new_row();
        h4.new_row();
        a4.add(y.pm(n, k), 1.0);
        if (k > 0) {
          for (int i = 0; i < ng; ++i) {
            a4.add(y.pm(i, k - 1), -agc.alpha(i, n));
            a4.add(y.gv(i, k - 1), -agc.beta(i, n));
          }
          a4.add(y.w(k - 1), -agc.gamma(n));
        }
        h4.add(k, agc.zeta(n));
        label(Block::a4, tag("dyn_pm", c.generators[n].id, k));
      }
      a4.new_row();
      h4.new_row();
      a4.add(y.w(k), 1.0);
      if (k > 0) {
        for (int i = 0; i < ng; ++i) {
          a4.add(y.pm(i, k - 1), -agc.kappa(i));
          a4.add(y.gv(i, k - 1), -agc.tau_coef(i));
        }
        a4.add(y.w(k - 1), -agc.rho);
      }
      h4.add(k, agc.eta);
      label(Block::a4, tag_t("dyn_w", k));
    }
    cf.a4 = a4.finish();
    cf.h4 = h4.finish();
  }

  // A5/b5: governor rule with slack pair.
  {
    SparseBuilder a5(ny);
    for (int k = 0; k < nt; ++k) {
      for (int n = 0; n < ng; ++n) {
        a5.new_row();
        a5.add(y.gv(n, k), 1.0);
        if (k > 0) a5.add(y.gv(n, k - 1), -1.0);
        a5.add(y.fp(n, k), 1.0);
        a5.add(y.fm(n, k), -1.0);
        a5.add(y.w(k), -agc.k_gain(n));
        cf.b5.push_back(0.0);
        label(Block::a5, tag("governor", c.generators[n].id, k));
      }
    }
    cf.a5 = a5.finish();
  }

  // A6/b6: ramping, frequency bounds, slack nonnegativity.
  {
    SparseBuilder a6(ny);
    for (int k = 0; k < nt; ++k) {
      for (int n = 0; n < ng; ++n) {
        const auto& g = c.generators[n];
        a6.new_row();
        a6.add(y.pm(n, k), 1.0);
        if (k > 0) a6.add(y.pm(n, k - 1), -1.0);
        cf.b6.push_back(g.rur);
        label(Block::a6, tag("ramp_up", g.id, k));

        a6.new_row();
        a6.add(y.pm(n, k), -1.0);
        if (k > 0) a6.add(y.pm(n, k - 1), 1.0);
        cf.b6.push_back(g.rdr);
        label(Block::a6, tag("ramp_dn", g.id, k));
      }
      a6.new_row();
      a6.add(y.w(k), 1.0);
      cf.b6.push_back(agc.freq_upper(k));
      label(Block::a6, tag_t("freq_max", k));

      a6.new_row();
      a6.add(y.w(k), -1.0);
      cf.b6.push_back(-agc.freq_lower(k));
      label(Block::a6, tag_t("freq_min", k), -1);

      for (int n = 0; n < ng; ++n) {
        a6.new_row();
        a6.add(y.fp(n, k), -1.0);
        cf.b6.push_back(0.0);
        label(Block::a6, tag("fgv+_nonneg", c.generators[n].id, k), -1);
        a6.new_row();
        a6.add(y.fm(n, k), -1.0);
        cf.b6.push_back(0.0);
        label(Block::a6, tag("fgv-_nonneg", c.generators[n].id, k), -1);
      }
    }
    cf.a6 = a6.finish();
  }

  // A7/A8/b7: budget and regulation tracking.
  {
    SparseBuilder a7(nx), a8(ny);
    a7.new_row();
    a8.new_row();
    for (int n = 0; n < ng; ++n) {
      a7.add(cost_col(n), 1.0);
      for (int k = 0; k < nt; ++k) {
        a8.add(y.fp(n, k), c.generators[n].cp);
        a8.add(y.fm(n, k), c.generators[n].cp);
      }
    }
    cf.b7.push_back(c.budget);
    label(Block::a7, "budget");
    for (int k = 0; k < nt; ++k) {
      for (int n = 0; n < ng; ++n) {
        const auto& id = c.generators[n].id;
        a7.new_row();
        a8.new_row();
        a8.add(y.gv(n, k), 1.0);
        a7.add(ru_col(n), -1.0);
        cf.b7.push_back(0.0);
        label(Block::a7, tag("reg_track_up", id, k));

        a7.new_row();
        a8.new_row();
        a8.add(y.gv(n, k), -1.0);
        a7.add(rd_col(n), -1.0);
        cf.b7.push_back(0.0);
        label(Block::a7, tag("reg_track_dn", id, k));
      }
    }
    cf.a7 = a7.finish();
    cf.a8 = a8.finish();
  }

  const auto expected = expected_row_counts(c);
  for (std::size_t b = 0; b < kBlockCount; ++b)
    if (cf.row_labels[b].size() != expected[b])
      throw Error("assemble: block A" + std::to_string(b + 1) + " has " + std::to_string(cf.row_labels[b].size()) +
                  " rows, expected " + std::to_string(expected[b]));
  return cf;
}

double BlockViolations::max() const {
  double m = x_bounds;
  for (double v : block) m = std::max(m, v);
  return m;
}

BlockViolations evaluate_feasibility(const CompactForm& cf, std::span<const double> x, std::span<const double> y,
                                     std::span<const double> d, std::span<const double> delta_d) {
  if (x.size() != cf.n_x() || y.size() != cf.n_y() || d.size() != cf.n_buses || delta_d.size() != cf.n_sub)
    throw DimensionError("evaluate_feasibility: vector dimensions do not match the compact form");
  BlockViolations v;
  auto leq = [](const std::vector<double>& lhs, const std::vector<double>& rhs) {
    double m = 0.0;
    for (std::size_t i = 0; i < lhs.size(); ++i) m = std::max(m, lhs[i] - rhs[i]);
    return m;
  };
  auto eq = [](const std::vector<double>& lhs, const std::vector<double>& rhs) {
    double m = 0.0;
    for (std::size_t i = 0; i < lhs.size(); ++i) m = std::max(m, std::fabs(lhs[i] - rhs[i]));
    return m;
  };
  auto add = [](std::vector<double> a, const std::vector<double>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return a;
  };
  v.block[0] = leq(cf.a1.multiply(x), cf.b1);
  v.block[1] = eq(cf.a2.multiply(x), cf.h2.multiply(d));
  v.block[2] = leq(cf.a3.multiply(x), add(cf.b3, cf.h3.multiply(d)));
  v.block[3] = eq(cf.a4.multiply(y), cf.h4.multiply(delta_d));
  v.block[4] = eq(cf.a5.multiply(y), cf.b5);
  v.block[5] = leq(cf.a6.multiply(y), cf.b6);
  v.block[6] = leq(add(cf.a7.multiply(x), cf.a8.multiply(y)), cf.b7);
  for (double xi : x) v.x_bounds = std::max(v.x_bounds, -xi);
  return v;
}

void dump(const CompactForm& cf, std::ostream& os) {
  std::vector<std::string> bus_cols, t_cols;
  for (std::size_t b = 0; b < cf.n_buses; ++b) bus_cols.push_back("d[" + std::to_string(b + 1) + "]");
  for (std::size_t t = 0; t < cf.n_sub; ++t) t_cols.push_back("dd[t" + std::to_string(t + 1) + "]");
  std::vector<std::string> xs, ys;
  for (const auto& c : cf.x_columns) xs.push_back(c.name);
  for (const auto& c : cf.y_columns) ys.push_back(c.name);

  auto emit = [&](const char* name, const SparseMatrix& m, Block blk, const std::vector<std::string>& cols) {
    const auto& labels = cf.row_labels[static_cast<std::size_t>(blk)];
    for (const auto& t : m.entries) os << name << ' ' << labels[t.row].name << ' ' << cols[t.col] << ' ' << t.value << '\n';
  };
  auto emit_rhs = [&](const char* name, const std::vector<double>& b, Block blk) {
    const auto& labels = cf.row_labels[static_cast<std::size_t>(blk)];
    for (std::size_t i = 0; i < b.size(); ++i)
      if (b[i] != 0.0) os << name << ' ' << labels[i].name << " rhs " << b[i] << '\n';
  };
  const auto old_precision = os.precision(17);
  emit("A1", cf.a1, Block::a1, xs);
  emit_rhs("b1", cf.b1, Block::a1);
  emit("A2", cf.a2, Block::a2, xs);
  emit("H2", cf.h2, Block::a2, bus_cols);
  emit("A3", cf.a3, Block::a3, xs);
  emit("H3", cf.h3, Block::a3, bus_cols);
  emit_rhs("b3", cf.b3, Block::a3);
  emit("A4", cf.a4, Block::a4, ys);
  emit("H4", cf.h4, Block::a4, t_cols);
  emit("A5", cf.a5, Block::a5, ys);
  emit_rhs("b5", cf.b5, Block::a5);
  emit("A6", cf.a6, Block::a6, ys);
  emit_rhs("b6", cf.b6, Block::a6);
  emit("A7", cf.a7, Block::a7, xs);
  emit("A8", cf.a8, Block::a7, ys);
  emit_rhs("b7", cf.b7, Block::a7);
  os.precision(old_precision);
}

}  // namespace flexgauge
