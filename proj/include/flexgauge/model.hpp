#pragma once

// Domain data for the flexibility assessment: network, generators, reserve
// requirements, discrete AGC dynamics and the load-uncertainty description.

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace flexgauge {

struct Bus {
  std::string id;
  double d_bar = 0.0;  // nominal load (MW)
  double d_hat = 0.0;  // maximum deviation from nominal (MW)
};

// Slope `slope` ($/MW) applies from `breakpoint` (MW) up to the next breakpoint.
struct CostSegment {
  double breakpoint = 0.0;
  double slope = 0.0;
};

struct Generator {
  std::string id;
  std::string bus_id;
  double p_min = 0.0;
  double p_max = 0.0;
  double reg_up_cap = 0.0;
  double reg_dn_cap = 0.0;
  double sr_cap = 0.0;
  double rur = 0.0;  // ramp-up limit per AGC sub-interval (MW)
  double rdr = 0.0;  // ramp-down limit per AGC sub-interval (MW)
  double no_load_cost = 0.0;  // cost at p = first breakpoint ($)
  std::vector<CostSegment> cost_segments;
  double cp = 0.0;      // penalty per MW of governor-rule slack
  double k_gain = 0.0;  // governor response to frequency deviation

  // Generation cost at output p (convex piecewise linear).
  double cost(double p) const;
  // Affine pieces (intercept, slope) whose pointwise maximum is cost(p) for
  // p >= first breakpoint.
  std::vector<std::pair<double, double>> cost_pieces() const;
};

struct Line {
  std::string id;
  double capacity = 0.0;
  std::vector<double> shift_factors;  // one per bus, in bus order
};

struct ReserveRequirements {
  double sr_min = 0.0;
  double reg_min_up = 0.0;
  double reg_min_dn = 0.0;
};

// Discrete-time AGC recursion. For generator n and sub-interval t:
//   pm[n,t+1]  = sum_i alpha(i,n) pm[i,t] + beta(i,n) gv[i,t] + gamma[n] w[t] + zeta[n] dd[t]
//   w[t+1]     = sum_i kappa[i] pm[i,t] + tau_coef[i] gv[i,t] + rho w[t] + eta dd[t]
//   gv[n,t+1] - gv[n,t] + f+[n,t+1] - f-[n,t+1] = k_gain[n] w[t+1]
struct AgcDynamics {
  int n_sub_intervals = 1;
  double dt = 4.0;
  Eigen::MatrixXd alpha;  // |G| x |G|, alpha(i, n)
  Eigen::MatrixXd beta;   // |G| x |G|, beta(i, n)
  Eigen::VectorXd gamma;
  Eigen::VectorXd zeta;
  Eigen::VectorXd kappa;
  Eigen::VectorXd tau_coef;
  double rho = 1.0;
  double eta = 0.0;
  Eigen::VectorXd k_gain;
  double freq_min = 0.0;  // Hz, <= 0
  double freq_max = 0.0;  // Hz, >= 0
  // Optional per-sub-interval overrides of the uniform bounds.
  std::vector<double> freq_min_t;
  std::vector<double> freq_max_t;

  double freq_lower(int t) const { return freq_min_t.empty() ? freq_min : freq_min_t[t]; }
  double freq_upper(int t) const { return freq_max_t.empty() ? freq_max : freq_max_t[t]; }
};

struct UncertaintyModel {
  std::vector<double> d_bar;        // per bus
  std::vector<double> d_hat;        // per bus
  std::vector<double> delta_d_bar;  // per sub-interval
  std::vector<double> delta_d_hat;  // per sub-interval

  std::size_t n_buses() const { return d_bar.size(); }
  std::size_t n_sub_intervals() const { return delta_d_bar.size(); }
  // Length of the flattened scale vector: 2|B| + 2|T|.
  std::size_t dimension() const { return 2 * (n_buses() + n_sub_intervals()); }
};

// Canonical flat order: (up, dn) for each bus in bus order, then (up, dn)
// for each sub-interval.
inline std::size_t bus_flat_index(std::size_t b, bool up) { return 2 * b + (up ? 0 : 1); }
inline std::size_t sub_flat_index(std::size_t n_buses, std::size_t t, bool up) {
  return 2 * (n_buses + t) + (up ? 0 : 1);
}

struct ScaleVector {
  std::vector<double> lam_up_b;
  std::vector<double> lam_dn_b;
  std::vector<double> lam_up_t;
  std::vector<double> lam_dn_t;

  static ScaleVector zeros(std::size_t n_buses, std::size_t n_sub);
  static ScaleVector constant(std::size_t n_buses, std::size_t n_sub, double value);
  static ScaleVector from_flat(std::span<const double> flat, std::size_t n_buses, std::size_t n_sub);
  std::vector<double> flat() const;
  std::size_t dimension() const {
    return lam_up_b.size() + lam_dn_b.size() + lam_up_t.size() + lam_dn_t.size();
  }
};

struct SystemCase {
  std::string name;
  std::vector<Bus> buses;
  std::vector<Generator> generators;
  std::vector<Line> lines;
  ReserveRequirements reserves;
  AgcDynamics agc;
  std::vector<double> delta_d_bar;  // per sub-interval
  std::vector<double> delta_d_hat;  // per sub-interval
  double budget = 0.0;              // tau ($)

  std::size_t n_buses() const { return buses.size(); }
  std::size_t n_generators() const { return generators.size(); }
  std::size_t n_lines() const { return lines.size(); }
  std::size_t n_sub_intervals() const { return static_cast<std::size_t>(agc.n_sub_intervals); }

  UncertaintyModel uncertainty() const;
  // Bus index of each generator; -1 when the bus id is unknown.
  std::vector<int> generator_bus_index() const;
};

struct Indices {
  double tf = 0.0;
  double edf = 0.0;
  double agcf = 0.0;
  double edupf = 0.0;
  double eddnf = 0.0;
  double agcupf = 0.0;
  double agcdnf = 0.0;
};

// Feasibility cut eta(lambda) = coefficients . lambda + constant <= 0.
struct CutRecord {
  std::vector<double> coefficients;  // canonical flat order
  double constant = 0.0;
  int iteration = 0;
  double eta = 0.0;  // subproblem optimum at the generating lambda

  double evaluate(std::span<const double> lambda_flat) const;
};

struct IterationRecord {
  int iteration = 0;
  double master_objective = 0.0;
  double eta = 0.0;
  double cut_constant = 0.0;  // 0 when no cut was added
  double wall_seconds = 0.0;
};

struct FlexReport {
  Indices indices;
  ScaleVector lambda_star;
  int iterations = 0;
  std::vector<CutRecord> cuts;
  std::vector<IterationRecord> trace;
};

struct Violation {
  std::string message;
};

std::vector<Violation> validate_case(const SystemCase& c);

// The seven flexibility indices for a given scale vector.
Indices compute_indices(const ScaleVector& lambda, const UncertaintyModel& u);

// Objective vector a with a . lambda_flat = TF.
std::vector<double> objective_coefficients(const UncertaintyModel& u);

}  // namespace flexgauge
