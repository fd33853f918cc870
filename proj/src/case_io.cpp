#include "flexgauge/case_io.hpp"

#include "flexgauge/agc.hpp"
#include "flexgauge/errors.hpp"
#include "flexgauge/sweep.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <fstream>
#include <map>
#include <sstream>

namespace flexgauge {
namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& source, const std::string& path, const std::string& what) {
  throw ParseError(source + ": field '" + path + "': " + what);
}

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  const json& need(const json& obj, const std::string& path, const char* key) const {
    if (!obj.is_object()) fail(source_, path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(source_, join(path, key), "is required");
    return *it;
  }
  const json* find(const json& obj, const std::string& path, const char* key) const {
    if (!obj.is_object()) fail(source_, path, "expected an object");
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
  }
  double number(const json& v, const std::string& path) const {
    if (!v.is_number()) fail(source_, path, "expected a number");
    return v.get<double>();
  }
  double number(const json& obj, const std::string& path, const char* key) const {
    return number(need(obj, path, key), join(path, key));
  }
  double number_or(const json& obj, const std::string& path, const char* key, double fallback) const {
    const json* v = find(obj, path, key);
    return v ? number(*v, join(path, key)) : fallback;
  }
  int integer(const json& obj, const std::string& path, const char* key, int fallback) const {
    const json* v = find(obj, path, key);
    if (!v) return fallback;
    if (!v->is_number_integer()) fail(source_, join(path, key), "expected an integer");
    return v->get<int>();
  }
  std::string id(const json& v, const std::string& path) const {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    fail(source_, path, "expected a string or integer id");
  }
  std::string id(const json& obj, const std::string& path, const char* key) const {
    return id(need(obj, path, key), join(path, key));
  }
  const json& array(const json& obj, const std::string& path, const char* key) const {
    const json& v = need(obj, path, key);
    if (!v.is_array()) fail(source_, join(path, key), "expected an array");
    return v;
  }
  std::vector<double> numbers(const json& v, const std::string& path) const {
    if (!v.is_array()) fail(source_, path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
  }
  // A number repeated n times, or an array of exactly n numbers.
  std::vector<double> per_interval(const json& v, const std::string& path, std::size_t n) const {
    if (v.is_number()) return std::vector<double>(n, v.get<double>());
    auto out = numbers(v, path);
    if (out.size() != n)
      fail(source_, path, "has " + std::to_string(out.size()) + " entries, expected " + std::to_string(n));
    return out;
  }
  Eigen::MatrixXd matrix(const json& v, const std::string& path) const {
    if (!v.is_array()) fail(source_, path, "expected an array of rows");
    const auto rows = static_cast<Eigen::Index>(v.size());
    Eigen::Index cols = 0;
    Eigen::MatrixXd m;
    for (Eigen::Index r = 0; r < rows; ++r) {
      const auto row = numbers(v[r], path + "[" + std::to_string(r) + "]");
      if (r == 0) {
        cols = static_cast<Eigen::Index>(row.size());
        m.resize(rows, cols);
      } else if (static_cast<Eigen::Index>(row.size()) != cols) {
        fail(source_, path, "rows have different lengths");
      }
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[c];
    }
    return m;
  }
  Eigen::VectorXd vector(const json& v, const std::string& path) const {
    const auto values = numbers(v, path);
    return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  }
  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }
  const std::string& source() const { return source_; }

 private:
  std::string source_;
};

std::string at_index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

}  // namespace

std::vector<std::vector<double>> compute_ptdf(std::size_t n_buses,
                                              const std::vector<std::tuple<int, int, double>>& lines,
                                              int slack_bus) {
  const auto n = static_cast<Eigen::Index>(n_buses);
  if (slack_bus < 0 || slack_bus >= n) throw ValidationError("PTDF slack bus index out of range");
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [from, to, x] : lines) {
    if (from < 0 || from >= n || to < 0 || to >= n || from == to || !(x > 0.0))
      throw ValidationError("PTDF line with invalid endpoints or reactance");
    b(from, from) += 1.0 / x;
    b(to, to) += 1.0 / x;
    b(from, to) -= 1.0 / x;
    b(to, from) -= 1.0 / x;
  }
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < n; ++i)
    if (i != slack_bus) keep.push_back(i);
  const auto k = static_cast<Eigen::Index>(keep.size());
  Eigen::MatrixXd reduced(k, k);
  for (Eigen::Index r = 0; r < k; ++r)
    for (Eigen::Index c = 0; c < k; ++c) reduced(r, c) = b(keep[r], keep[c]);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, n);
  if (k > 0) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(reduced);
    if (lu.rank() < k) throw ValidationError("PTDF: network is not connected");
    const Eigen::MatrixXd inv = lu.inverse();
    for (Eigen::Index r = 0; r < k; ++r)
      for (Eigen::Index c = 0; c < k; ++c) x(keep[r], keep[c]) = inv(r, c);
  }
  std::vector<std::vector<double>> out;
  for (const auto& [from, to, reactance] : lines) {
    std::vector<double> row(n_buses);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = (x(from, i) - x(to, i)) / reactance;
      row[i] = std::abs(v) < 1e-14 ? 0.0 : v;
    }
    out.push_back(std::move(row));
  }
  return out;
}

LoadedCase parse_case(std::string_view text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON");
  }
  const Reader rd(source);
  if (!doc.is_object()) fail(source, "", "document must be an object");

  const int version = rd.integer(doc, "", "schema_version", -1);
  if (version != kCaseSchemaVersion)
    fail(source, "schema_version", "unsupported value " + std::to_string(version) + " (expected " +
                                       std::to_string(kCaseSchemaVersion) + ")");

  LoadedCase out;
  SystemCase& c = out.system;
  if (const json* n = rd.find(doc, "", "name")) c.name = rd.id(*n, "name");

  // Uncertainty settings first: bus d_hat fractions and the sub-interval count live there.
  static const json empty_object = json::object();
  const json* unc_ptr = rd.find(doc, "", "uncertainty");
  const json& unc = unc_ptr ? *unc_ptr : empty_object;
  const double default_fraction = rd.number_or(unc, "uncertainty", "d_hat_fraction", 0.0);

  // Buses.
  const json& buses = rd.array(doc, "", "buses");
  std::map<std::string, int> bus_index;
  for (std::size_t i = 0; i < buses.size(); ++i) {
    const std::string path = at_index("buses", i);
    Bus b;
    b.id = rd.id(buses[i], path, "id");
    b.d_bar = rd.number(buses[i], path, "d_bar");
    if (rd.find(buses[i], path, "d_hat")) {
      b.d_hat = rd.number(buses[i], path, "d_hat");
    } else {
      b.d_hat = rd.number_or(buses[i], path, "d_hat_fraction", default_fraction) * b.d_bar;
    }
    bus_index[b.id] = static_cast<int>(i);
    c.buses.push_back(b);
  }

  const int n_sub = rd.integer(unc, "uncertainty", "sub_intervals", 10);
  if (n_sub < 1) fail(source, "uncertainty.sub_intervals", "must be >= 1");
  const double dt = rd.number_or(unc, "uncertainty", "dt", 4.0);
  const auto nt = static_cast<std::size_t>(n_sub);
  c.delta_d_bar.assign(nt, 0.0);
  if (const json* v = rd.find(unc, "uncertainty", "delta_d_bar")) c.delta_d_bar = rd.per_interval(*v, "uncertainty.delta_d_bar", nt);
  c.delta_d_hat.assign(nt, 0.0);
  if (const json* v = rd.find(unc, "uncertainty", "delta_d_hat")) {
    c.delta_d_hat = rd.per_interval(*v, "uncertainty.delta_d_hat", nt);
  } else if (const json* f = rd.find(unc, "uncertainty", "delta_d_hat_fraction")) {
    double total = 0.0;
    for (const auto& b : c.buses) total += b.d_bar;
    c.delta_d_hat.assign(nt, rd.number(*f, "uncertainty.delta_d_hat_fraction") * total);
  }

  // Generators.
  const json& gens = rd.array(doc, "", "generators");
  ContinuousAgcModel cont;
  cont.dt = dt;
  bool have_continuous = true;
  for (std::size_t i = 0; i < gens.size(); ++i) {
    const std::string path = at_index("generators", i);
    const json& gj = gens[i];
    Generator g;
    g.id = rd.id(gj, path, "id");
    g.bus_id = rd.id(gj, path, "bus");
    g.p_min = rd.number_or(gj, path, "p_min", 0.0);
    g.p_max = rd.number(gj, path, "p_max");
    g.reg_up_cap = rd.number_or(gj, path, "reg_up", 0.0);
    g.reg_dn_cap = rd.number_or(gj, path, "reg_dn", 0.0);
    g.sr_cap = rd.number_or(gj, path, "sr", 0.0);
    g.rur = rd.number(gj, path, "ramp_up");
    g.rdr = rd.number(gj, path, "ramp_dn");
    g.cp = rd.number(gj, path, "penalty_cost");
    if (const json* cost = rd.find(gj, path, "cost")) {
      const std::string cpath = Reader::join(path, "cost");
      g.no_load_cost = rd.number_or(*cost, cpath, "no_load", 0.0);
      if (const json* segs = rd.find(*cost, cpath, "segments")) {
        const std::string spath = Reader::join(cpath, "segments");
        if (!segs->is_array()) fail(source, spath, "expected an array of [breakpoint, slope] pairs");
        for (std::size_t k = 0; k < segs->size(); ++k) {
          const auto pair = rd.numbers((*segs)[k], at_index(spath, k));
          if (pair.size() != 2) fail(source, at_index(spath, k), "expected [breakpoint, slope]");
          g.cost_segments.push_back({pair[0], pair[1]});
        }
      }
    }
    if (const json* agc = rd.find(gj, path, "agc")) {
      const std::string apath = Reader::join(path, "agc");
      cont.t_ch.push_back(rd.number(*agc, apath, "t_ch"));
      cont.t_g.push_back(rd.number(*agc, apath, "t_g"));
      cont.droop.push_back(rd.number(*agc, apath, "droop"));
    } else {
      have_continuous = false;
    }
    c.generators.push_back(g);
  }

  // Lines.
  const json* lines_ptr = rd.find(doc, "", "lines");
  std::vector<std::tuple<int, int, double>> topology;
  std::vector<std::size_t> topo_lines;
  if (lines_ptr) {
    if (!lines_ptr->is_array()) fail(source, "lines", "expected an array");
    for (std::size_t i = 0; i < lines_ptr->size(); ++i) {
      const std::string path = at_index("lines", i);
      const json& lj = (*lines_ptr)[i];
      Line l;
      l.id = rd.id(lj, path, "id");
      l.capacity = rd.number(lj, path, "capacity");
      if (const json* sf = rd.find(lj, path, "shift_factors")) {
        const std::string spath = Reader::join(path, "shift_factors");
        if (sf->is_object()) {
          l.shift_factors.assign(c.buses.size(), 0.0);
          for (auto it = sf->begin(); it != sf->end(); ++it) {
            auto b = bus_index.find(it.key());
            if (b == bus_index.end())
              throw ParseError(source + ": line '" + l.id + "': shift factor for unknown bus '" + it.key() + "'");
            if (!it.value().is_number())
              throw ParseError(source + ": line '" + l.id + "': shift factor for bus '" + it.key() +
                               "' is not a number");
            l.shift_factors[b->second] = it.value().get<double>();
          }
        } else if (sf->is_array()) {
          for (const auto& v : *sf) {
            if (!v.is_number()) throw ParseError(source + ": line '" + l.id + "': shift factor row is not numeric");
            l.shift_factors.push_back(v.get<double>());
          }
        } else {
          throw ParseError(source + ": line '" + l.id + "': shift_factors must be an object or an array");
        }
      } else {
        const std::string from = rd.id(lj, path, "from");
        const std::string to = rd.id(lj, path, "to");
        const double x = rd.number(lj, path, "reactance");
        if (!bus_index.count(from) || !bus_index.count(to))
          throw ParseError(source + ": line '" + l.id + "': endpoint bus not found");
        if (!(x > 0.0)) throw ParseError(source + ": line '" + l.id + "': reactance must be > 0");
        topology.emplace_back(bus_index[from], bus_index[to], x);
        topo_lines.push_back(c.lines.size());
      }
      c.lines.push_back(l);
    }
  }
  if (!topology.empty()) {
    int slack = 0;
    if (const json* s = rd.find(doc, "", "ptdf_slack")) {
      const std::string id = rd.id(*s, "ptdf_slack");
      if (!bus_index.count(id)) fail(source, "ptdf_slack", "unknown bus '" + id + "'");
      slack = bus_index[id];
    }
    // Lines given with explicit shift factors are not part of the derived network.
    const auto ptdf = compute_ptdf(c.buses.size(), topology, slack);
    for (std::size_t k = 0; k < topo_lines.size(); ++k) c.lines[topo_lines[k]].shift_factors = ptdf[k];
  }

  // Reserve requirements.
  if (const json* r = rd.find(doc, "", "reserve_requirements")) {
    c.reserves.sr_min = rd.number_or(*r, "reserve_requirements", "sr_min", 0.0);
    c.reserves.reg_min_up = rd.number_or(*r, "reserve_requirements", "reg_min_up", 0.0);
    c.reserves.reg_min_dn = rd.number_or(*r, "reserve_requirements", "reg_min_dn", 0.0);
  }

  // AGC.
  const json& agc = rd.need(doc, "", "agc");
  std::string model = "continuous";
  if (const json* m = rd.find(agc, "agc", "model")) model = rd.id(*m, "agc.model");
  const std::size_t ng = c.generators.size();
  if (model == "continuous") {
    if (!have_continuous)
      fail(source, "generators", "continuous AGC model needs an 'agc' object (t_ch, t_g, droop) on every generator");
    cont.inertia = rd.number(agc, "agc", "inertia");
    cont.damping = rd.number_or(agc, "agc", "damping", 0.0);
    for (std::size_t n = 0; n < ng; ++n)
      if (!(cont.t_ch[n] > 0.0) || !(cont.t_g[n] > 0.0) || !(cont.droop[n] > 0.0))
        fail(source, at_index("generators", n) + ".agc", "t_ch, t_g and droop must be > 0");
    if (!(cont.inertia > 0.0) || cont.damping < 0.0) fail(source, "agc", "inertia must be > 0 and damping >= 0");
    if (!(dt > 0.0)) fail(source, "uncertainty.dt", "must be > 0");
    c.agc = zoh_discretize(cont);
  } else if (model == "discrete") {
    AgcDynamics raw;
    raw.dt = dt;
    raw.alpha = rd.matrix(rd.need(agc, "agc", "alpha"), "agc.alpha");
    raw.beta = rd.matrix(rd.need(agc, "agc", "beta"), "agc.beta");
    raw.gamma = rd.vector(rd.need(agc, "agc", "gamma"), "agc.gamma");
    raw.zeta = rd.vector(rd.need(agc, "agc", "zeta"), "agc.zeta");
    raw.kappa = rd.vector(rd.need(agc, "agc", "kappa"), "agc.kappa");
    raw.tau_coef = rd.vector(rd.need(agc, "agc", "tau_coef"), "agc.tau_coef");
    raw.rho = rd.number(agc, "agc", "rho");
    raw.eta = rd.number(agc, "agc", "eta");
    raw.k_gain = rd.vector(rd.need(agc, "agc", "k_gain"), "agc.k_gain");
    try {
      auto pt = pass_through(raw, ng);
      c.agc = std::move(pt.dynamics);
      out.warnings = std::move(pt.warnings);
    } catch (const DimensionError& e) {
      throw ParseError(source + ": " + e.what());
    }
  } else {
    fail(source, "agc.model", "expected 'continuous' or 'discrete'");
  }
  c.agc.n_sub_intervals = n_sub;
  c.agc.dt = dt;
  c.agc.freq_min = rd.number(agc, "agc", "freq_min");
  c.agc.freq_max = rd.number(agc, "agc", "freq_max");
  if (const json* v = rd.find(agc, "agc", "freq_min_t")) c.agc.freq_min_t = rd.per_interval(*v, "agc.freq_min_t", nt);
  if (const json* v = rd.find(agc, "agc", "freq_max_t")) c.agc.freq_max_t = rd.per_interval(*v, "agc.freq_max_t", nt);
  for (std::size_t n = 0; n < ng && static_cast<Eigen::Index>(n) < c.agc.k_gain.size(); ++n)
    c.generators[n].k_gain = c.agc.k_gain(static_cast<Eigen::Index>(n));

  // Budget: absolute, or a multiple of the nominal dispatch cost.
  const json& budget = rd.need(doc, "", "budget");
  double b0_multiple = -1.0;
  if (budget.is_number()) {
    c.budget = budget.get<double>();
  } else if (budget.is_object()) {
    b0_multiple = rd.number(budget, "budget", "b0_multiple");
  } else {
    fail(source, "budget", "expected a number or {\"b0_multiple\": x}");
  }

  auto violations = validate_case(c);
  if (violations.empty() && b0_multiple >= 0.0) {
    c.budget = b0_multiple * base_budget(c);
    violations = validate_case(c);
  }
  if (!violations.empty()) {
    std::string msg = source + ": invalid case:";
    for (const auto& v : violations) msg += " " + v.message + ";";
    msg.pop_back();
    throw ValidationError(msg);
  }
  return out;
}

LoadedCase load_case(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_case(ss.str(), path.string());
}

}  // namespace flexgauge
