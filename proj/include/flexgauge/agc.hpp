#pragma once

// Discrete AGC coefficients from a continuous single-area model
// (first-order governor, first-order turbine, swing equation with damping).
//
// Continuous states, in this order: pm_1..pm_G, gv_1..gv_G, w. Input: dd.
//   T_ch,n  d pm_n/dt = -pm_n + gv_n
//   T_g,n   d gv_n/dt = -gv_n - w / R_n
//   M       d w/dt    = sum_n pm_n - D w - dd

#include "flexgauge/model.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace flexgauge {

struct ContinuousAgcModel {
  std::vector<double> t_ch;   // turbine time constants (s)
  std::vector<double> t_g;    // governor time constants (s)
  std::vector<double> droop;  // R (Hz/MW)
  double inertia = 0.0;       // M (MW s/Hz)
  double damping = 0.0;       // D (MW/Hz)
  double dt = 4.0;            // sub-interval length (s)
};

struct DiscreteSystem {
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
};

// exp(m * t) by scaling and squaring around a truncated Taylor core.
Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& m, double t);

// Zero-order-hold discretization of dx/dt = a x + b u over dt.
DiscreteSystem zoh(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double dt);

// Continuous (A_c, B_c) of the governor/turbine/swing model.
DiscreteSystem continuous_matrices(const ContinuousAgcModel& cont);

// Governor gain convention for raw matrices: K_n = -dt / R_n.
double governor_gain(double dt, double droop);

// Builds AgcDynamics (n_sub_intervals and frequency bounds left at defaults;
// the caller fills them in).
AgcDynamics zoh_discretize(const ContinuousAgcModel& cont);

struct PassThroughResult {
  AgcDynamics dynamics;
  std::vector<std::string> warnings;
};

// |rho| above this is flagged as implausible for a sampled stable system.
inline constexpr double kRhoPlausibilityBound = 2.0;

// Accepts user-supplied coefficients unchanged after checking dimensions.
PassThroughResult pass_through(const AgcDynamics& raw, std::size_t n_generators);

}  // namespace flexgauge
