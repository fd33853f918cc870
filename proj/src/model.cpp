#include "flexgauge/model.hpp"

#include "flexgauge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace flexgauge {

double Generator::cost(double p) const {
  if (cost_segments.empty()) return no_load_cost;
  double total = no_load_cost;
  const double first = cost_segments.front().breakpoint;
  if (p <= first) return total + cost_segments.front().slope * (p - first);
  for (std::size_t k = 0; k < cost_segments.size(); ++k) {
    const double lo = cost_segments[k].breakpoint;
    const double hi = k + 1 < cost_segments.size() ? cost_segments[k + 1].breakpoint : p;
    if (p <= lo) break;
    total += cost_segments[k].slope * (std::min(p, hi) - lo);
  }
  return total;
}

std::vector<std::pair<double, double>> Generator::cost_pieces() const {
  if (cost_segments.empty()) return {{no_load_cost, 0.0}};
  std::vector<std::pair<double, double>> pieces;
  pieces.reserve(cost_segments.size());
  double intercept = no_load_cost - cost_segments[0].slope * cost_segments[0].breakpoint;
  pieces.emplace_back(intercept, cost_segments[0].slope);
  for (std::size_t k = 1; k < cost_segments.size(); ++k) {
    intercept += (cost_segments[k - 1].slope - cost_segments[k].slope) * cost_segments[k].breakpoint;
    pieces.emplace_back(intercept, cost_segments[k].slope);
  }
  return pieces;
}

ScaleVector ScaleVector::zeros(std::size_t n_buses, std::size_t n_sub) { return constant(n_buses, n_sub, 0.0); }

ScaleVector ScaleVector::constant(std::size_t n_buses, std::size_t n_sub, double value) {
  ScaleVector s;
  s.lam_up_b.assign(n_buses, value);
  s.lam_dn_b.assign(n_buses, value);
  s.lam_up_t.assign(n_sub, value);
  s.lam_dn_t.assign(n_sub, value);
  return s;
}

ScaleVector ScaleVector::from_flat(std::span<const double> flat, std::size_t n_buses, std::size_t n_sub) {
  if (flat.size() != 2 * (n_buses + n_sub))
    throw DimensionError("scale vector has " + std::to_string(flat.size()) + " entries, expected " +
                         std::to_string(2 * (n_buses + n_sub)));
  ScaleVector s = zeros(n_buses, n_sub);
  for (std::size_t b = 0; b < n_buses; ++b) {
    s.lam_up_b[b] = flat[bus_flat_index(b, true)];
    s.lam_dn_b[b] = flat[bus_flat_index(b, false)];
  }
  for (std::size_t t = 0; t < n_sub; ++t) {
    s.lam_up_t[t] = flat[sub_flat_index(n_buses, t, true)];
    s.lam_dn_t[t] = flat[sub_flat_index(n_buses, t, false)];
  }
  return s;
}

std::vector<double> ScaleVector::flat() const {
  const std::size_t nb = lam_up_b.size();
  std::vector<double> out;
  out.reserve(dimension());
  for (std::size_t b = 0; b < nb; ++b) {
    out.push_back(lam_up_b[b]);
    out.push_back(b < lam_dn_b.size() ? lam_dn_b[b] : 0.0);
  }
  for (std::size_t t = 0; t < lam_up_t.size(); ++t) {
    out.push_back(lam_up_t[t]);
    out.push_back(t < lam_dn_t.size() ? lam_dn_t[t] : 0.0);
  }
  return out;
}

UncertaintyModel SystemCase::uncertainty() const {
  UncertaintyModel u;
  for (const auto& b : buses) {
    u.d_bar.push_back(b.d_bar);
    u.d_hat.push_back(b.d_hat);
  }
  u.delta_d_bar = delta_d_bar;
  u.delta_d_hat = delta_d_hat;
  return u;
}

std::vector<int> SystemCase::generator_bus_index() const {
  std::vector<int> out;
  out.reserve(generators.size());
  for (const auto& g : generators) {
    auto it = std::find_if(buses.begin(), buses.end(), [&](const Bus& b) { return b.id == g.bus_id; });
    out.push_back(it == buses.end() ? -1 : static_cast<int>(it - buses.begin()));
  }
  return out;
}

double CutRecord::evaluate(std::span<const double> lambda_flat) const {
  if (lambda_flat.size() != coefficients.size()) throw DimensionError("cut evaluated at a lambda of wrong length");
  double v = constant;
  for (std::size_t k = 0; k < coefficients.size(); ++k) v += coefficients[k] * lambda_flat[k];
  return v;
}

namespace {

class Report {
 public:
  template <typename... Parts>
  void add(const Parts&... parts) {
    std::ostringstream os;
    (os << ... << parts);
    out_.push_back({os.str()});
  }
  std::vector<Violation> take() { return std::move(out_); }

 private:
  std::vector<Violation> out_;
};

bool finite(double v) { return std::isfinite(v); }

}  // namespace

std::vector<Violation> validate_case(const SystemCase& c) {
  Report r;
  const std::size_t nb = c.n_buses();
  const std::size_t ng = c.n_generators();
  const std::size_t nt = c.n_sub_intervals();

  if (nb == 0) r.add("case has no buses");
  if (ng == 0) r.add("case has no generators");

  std::set<std::string> bus_ids;
  for (const auto& b : c.buses) {
    if (!bus_ids.insert(b.id).second) r.add("bus '", b.id, "': duplicate id");
    if (!(b.d_bar >= 0.0) || !finite(b.d_bar)) r.add("bus '", b.id, "': d_bar must be >= 0");
    if (!(b.d_hat >= 0.0) || !finite(b.d_hat)) r.add("bus '", b.id, "': d_hat must be >= 0");
  }

  std::set<std::string> gen_ids;
  for (const auto& g : c.generators) {
    if (!gen_ids.insert(g.id).second) r.add("generator '", g.id, "': duplicate id");
    if (!bus_ids.count(g.bus_id)) r.add("generator '", g.id, "': unknown bus '", g.bus_id, "'");
    if (g.p_min > g.p_max) r.add("generator '", g.id, "': p_min > p_max");
    if (g.p_min < 0.0) r.add("generator '", g.id, "': p_min must be >= 0");
    const std::pair<const char*, double> caps[] = {{"reg_up_cap", g.reg_up_cap}, {"reg_dn_cap", g.reg_dn_cap},
                                                   {"sr_cap", g.sr_cap},         {"ramp_up", g.rur},
                                                   {"ramp_dn", g.rdr},           {"penalty_cost", g.cp},
                                                   {"no_load_cost", g.no_load_cost}};
    for (const auto& [name, value] : caps)
      if (!(value >= 0.0) || !finite(value)) r.add("generator '", g.id, "': ", name, " must be >= 0");
    for (std::size_t k = 0; k < g.cost_segments.size(); ++k) {
      const auto& s = g.cost_segments[k];
      if (s.slope < 0.0) r.add("generator '", g.id, "': cost segment ", k, " has a negative slope");
      if (k > 0 && s.breakpoint <= g.cost_segments[k - 1].breakpoint)
        r.add("generator '", g.id, "': cost breakpoints must increase");
      if (k > 0 && s.slope < g.cost_segments[k - 1].slope)
        r.add("generator '", g.id, "': cost slopes must be nondecreasing (convex cost)");
    }
    if (!g.cost_segments.empty() && g.cost_segments.front().breakpoint > g.p_min && g.p_min <= g.p_max)
      r.add("generator '", g.id, "': first cost breakpoint must not exceed p_min");
  }

  for (const auto& l : c.lines) {
    if (!(l.capacity > 0.0)) r.add("line '", l.id, "': capacity must be > 0");
    if (l.shift_factors.size() != nb)
      r.add("line '", l.id, "': has ", l.shift_factors.size(), " shift factors, expected ", nb);
  }

  if (c.reserves.sr_min < 0.0 || c.reserves.reg_min_up < 0.0 || c.reserves.reg_min_dn < 0.0)
    r.add("reserve requirements must be >= 0");

  const auto& a = c.agc;
  if (a.n_sub_intervals < 1) r.add("agc: n_sub_intervals must be >= 1");
  if (!(a.dt > 0.0)) r.add("agc: dt must be > 0");
  if (!(a.freq_min <= 0.0 && 0.0 <= a.freq_max)) r.add("agc: frequency bounds must satisfy freq_min <= 0 <= freq_max");
  const auto gi = static_cast<Eigen::Index>(ng);
  if (a.alpha.rows() != gi || a.alpha.cols() != gi) r.add("agc: alpha must be ", ng, "x", ng);
  if (a.beta.rows() != gi || a.beta.cols() != gi) r.add("agc: beta must be ", ng, "x", ng);
  const std::pair<const char*, const Eigen::VectorXd*> vecs[] = {
      {"gamma", &a.gamma}, {"zeta", &a.zeta}, {"kappa", &a.kappa}, {"tau_coef", &a.tau_coef}, {"k_gain", &a.k_gain}};
  for (const auto& [name, v] : vecs)
    if (v->size() != gi) r.add("agc: ", name, " must have ", ng, " entries");
  if (!a.freq_min_t.empty() && a.freq_min_t.size() != nt) r.add("agc: freq_min_t must have ", nt, " entries");
  if (!a.freq_max_t.empty() && a.freq_max_t.size() != nt) r.add("agc: freq_max_t must have ", nt, " entries");
  for (std::size_t t = 0; t < a.freq_min_t.size() && t < a.freq_max_t.size(); ++t)
    if (a.freq_min_t[t] > a.freq_max_t[t]) r.add("agc: per-interval frequency bounds inverted at t=", t);

  if (c.delta_d_bar.size() != nt) r.add("uncertainty: delta_d_bar must have ", nt, " entries");
  if (c.delta_d_hat.size() != nt) r.add("uncertainty: delta_d_hat must have ", nt, " entries");
  for (std::size_t t = 0; t < c.delta_d_hat.size(); ++t)
    if (!(c.delta_d_hat[t] >= 0.0)) r.add("uncertainty: delta_d_hat[", t, "] must be >= 0");

  if (!(c.budget >= 0.0)) r.add("budget must be >= 0");
  return r.take();
}

Indices compute_indices(const ScaleVector& lambda, const UncertaintyModel& u) {
  const std::size_t nb = u.n_buses();
  const std::size_t nt = u.n_sub_intervals();
  if (lambda.lam_up_b.size() != nb || lambda.lam_dn_b.size() != nb || lambda.lam_up_t.size() != nt ||
      lambda.lam_dn_t.size() != nt || u.d_hat.size() != nb || u.delta_d_hat.size() != nt)
    throw DimensionError("scale vector does not match the uncertainty model");
  Indices ix;
  for (std::size_t b = 0; b < nb; ++b) {
    ix.edupf += u.d_hat[b] * lambda.lam_up_b[b];
    ix.eddnf += u.d_hat[b] * lambda.lam_dn_b[b];
  }
  for (std::size_t t = 0; t < nt; ++t) {
    ix.agcupf += u.delta_d_hat[t] * lambda.lam_up_t[t];
    ix.agcdnf += u.delta_d_hat[t] * lambda.lam_dn_t[t];
  }
  ix.edf = ix.edupf + ix.eddnf;
  ix.agcf = ix.agcupf + ix.agcdnf;
  ix.tf = ix.edf + ix.agcf;
  return ix;
}

std::vector<double> objective_coefficients(const UncertaintyModel& u) {
  std::vector<double> a;
  a.reserve(u.dimension());
  for (double v : u.d_hat) a.insert(a.end(), {v, v});
  for (double v : u.delta_d_hat) a.insert(a.end(), {v, v});
  return a;
}

}  // namespace flexgauge
