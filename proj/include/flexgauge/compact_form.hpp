#pragma once

// Compact matrix form of the ED + AGC robust feasibility model:
//
//   A1 x        <= b1
//   A2 x         = H2 d
//   A3 x        <= b3 + H3 d
//   A4 y         = H4 dd
//   A5 y         = b5
//   A6 y        <= b6
//   A7 x + A8 y <= b7
//
// x = (p, reg_up, reg_dn, sr, cost) with x >= 0, where the cost columns are
// epigraph variables of the piecewise-linear generation cost. y = (pm, gv, w,
// f+, f-) is free; nonnegativity of the governor slacks f+/f- is carried by
// rows of A6 so that y has no variable bounds.

#include "flexgauge/model.hpp"

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace flexgauge {

struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

struct SparseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<Triplet> entries;  // row-major order, no duplicates

  double at(int r, int c) const;
  std::vector<double> multiply(std::span<const double> v) const;
  Eigen::MatrixXd to_dense() const;
};

// Builds a SparseMatrix row by row.
class SparseBuilder {
 public:
  explicit SparseBuilder(int cols) : cols_(cols) {}
  int new_row();
  void add(int col, double value);
  SparseMatrix finish();
  int rows() const { return rows_; }

 private:
  int cols_;
  int rows_ = 0;
  std::map<int, double> current_;
  std::vector<Triplet> entries_;
  void flush();
};

enum class Block { a1 = 0, a2, a3, a4, a5, a6, a7 };
inline constexpr std::size_t kBlockCount = 7;

struct RowLabel {
  std::string name;
  int sign = 1;  // -1 when a >= constraint was stored negated
};

struct ColumnLabel {
  std::string name;
  bool cost_auxiliary = false;
};

struct CompactForm {
  std::size_t n_buses = 0;
  std::size_t n_sub = 0;
  std::size_t n_generators = 0;

  std::vector<ColumnLabel> x_columns;
  std::vector<ColumnLabel> y_columns;

  SparseMatrix a1, a2, a3, a4, a5, a6, a7, a8;
  SparseMatrix h2, h3, h4;
  std::vector<double> b1, b3, b5, b6, b7;
  std::array<std::vector<RowLabel>, kBlockCount> row_labels;

  std::vector<double> a;  // objective over the canonical lambda order

  std::map<std::string, int> x_index;
  std::map<std::string, int> y_index;

  std::size_t n_x() const { return x_columns.size(); }
  std::size_t n_y() const { return y_columns.size(); }
  std::size_t row_count(Block b) const { return row_labels[static_cast<std::size_t>(b)].size(); }
  // Total row count of all blocks.
  std::size_t total_rows() const;
};

// Analytic row counts per block for a case:
//   A1: 5|G| + sum_n pieces_n + 3    A2: 1            A3: 2|L|
//   A4: (|G|+1)|T|                   A5: |G||T|       A6: 4|G||T| + 2|T|
//   A7: 1 + 2|G||T|
std::array<std::size_t, kBlockCount> expected_row_counts(const SystemCase& c);

// Requires validate_case(c) to be empty; throws ValidationError otherwise.
CompactForm assemble(const SystemCase& c);

struct BlockViolations {
  std::array<double, kBlockCount> block{};  // max violation per block
  double x_bounds = 0.0;                    // max violation of x >= 0

  double max() const;
};

BlockViolations evaluate_feasibility(const CompactForm& cf, std::span<const double> x, std::span<const double> y,
                                     std::span<const double> d, std::span<const double> delta_d);

// Plain-text dump, one line per nonzero: "<block> <row label> <column label> <coefficient>".
// Right-hand-side constants use the column label "rhs"; H-matrix columns are
// "d[<bus>]" and "dd[t<k>]".
void dump(const CompactForm& cf, std::ostream& os);

}  // namespace flexgauge
