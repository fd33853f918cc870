#pragma once

#include "flexgauge/agc.hpp"
#include "flexgauge/case_io.hpp"
#include "flexgauge/model.hpp"

#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace fixtures {

inline std::filesystem::path case_path(const std::string& name) {
  return std::filesystem::path(FLEXGAUGE_DATA_DIR) / "cases" / name;
}

inline flexgauge::SystemCase load(const std::string& name) { return flexgauge::load_case(case_path(name)).system; }

inline const std::vector<std::string>& desk_cases() {
  static const std::vector<std::string> names = {"desk_2bus.json", "desk_3bus.json", "desk_2bus_t10.json",
                                                 "desk_4bus_t2.json", "desk_3bus_mesh.json"};
  return names;
}

// One bus, one generator, no lines. Every limit is loose unless changed.
inline flexgauge::SystemCase single_bus(int n_sub = 1) {
  using namespace flexgauge;
  SystemCase c;
  c.name = "single";
  c.buses.push_back({"b1", 50.0, 10.0});
  Generator g;
  g.id = "g1";
  g.bus_id = "b1";
  g.p_min = 0.0;
  g.p_max = 200.0;
  g.reg_up_cap = 50.0;
  g.reg_dn_cap = 50.0;
  g.sr_cap = 50.0;
  g.rur = 100.0;
  g.rdr = 100.0;
  g.no_load_cost = 0.0;
  g.cost_segments = {{0.0, 10.0}};
  g.cp = 1.0;
  c.generators.push_back(g);
  ContinuousAgcModel cont;
  cont.t_ch = {0.3};
  cont.t_g = {0.08};
  cont.droop = {0.05};
  cont.inertia = 10.0;
  cont.damping = 1.0;
  cont.dt = 4.0;
  c.agc = zoh_discretize(cont);
  c.agc.n_sub_intervals = n_sub;
  c.agc.freq_min = -10.0;
  c.agc.freq_max = 10.0;
  c.generators[0].k_gain = c.agc.k_gain(0);
  c.delta_d_bar.assign(n_sub, 0.0);
  c.delta_d_hat.assign(n_sub, 1.0);
  c.budget = 1e9;
  return c;
}

inline flexgauge::ScaleVector random_scale(std::mt19937& rng, std::size_t nb, std::size_t nt) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto s = flexgauge::ScaleVector::zeros(nb, nt);
  for (auto* v : {&s.lam_up_b, &s.lam_dn_b, &s.lam_up_t, &s.lam_dn_t})
    for (auto& x : *v) x = u(rng);
  return s;
}

}  // namespace fixtures
