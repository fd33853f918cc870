#include "flexgauge/agc.hpp"

#include "flexgauge/errors.hpp"

#include <cmath>

namespace flexgauge {

Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& m, double t) {
  if (m.rows() != m.cols()) throw DimensionError("matrix_exponential needs a square matrix");
  const Eigen::Index n = m.rows();
  if (!m.allFinite() || !std::isfinite(t)) throw Error("matrix_exponential: non-finite input");
  Eigen::MatrixXd a = m * t;
  const double norm = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    a /= std::ldexp(1.0, squarings);
  }
  // With ||a||_1 <= 0.5 the Taylor tail after k terms is below 0.5^k / k!.
  Eigen::MatrixXd result = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
  for (int k = 1; k <= 30; ++k) {
    term = term * a / static_cast<double>(k);
    result += term;
    if (term.cwiseAbs().maxCoeff() <= 1e-18 * result.cwiseAbs().maxCoeff()) break;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

DiscreteSystem zoh(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double dt) {
  if (a.rows() != a.cols()) throw DimensionError("zoh: state matrix must be square");
  if (b.rows() != a.rows()) throw DimensionError("zoh: input matrix row count must match the state dimension");
  if (!(dt > 0.0)) throw Error("zoh: dt must be > 0");
  DiscreteSystem out;
  out.a = matrix_exponential(a, dt);
  const Eigen::Index n = a.rows();

  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  const bool invertible = n > 0 && lu.isInvertible() && lu.rcond() > 1e-10;
  if (invertible) {
    out.b = lu.solve((out.a - Eigen::MatrixXd::Identity(n, n)) * b);
    return out;
  }
  // Singular state matrix: integral series sum_k a^k dt^(k+1) / (k+1)! b.
  Eigen::MatrixXd term = b * dt;
  out.b = term;
  for (int k = 1; k < 200; ++k) {
    term = a * term * (dt / static_cast<double>(k + 1));
    out.b += term;
    if (term.cwiseAbs().maxCoeff() <= 1e-14) break;
    if (k == 199) throw Error("zoh: integral series did not converge; A_c is too ill-conditioned for dt");
  }
  return out;
}

double governor_gain(double dt, double droop) { return -dt / droop; }

DiscreteSystem continuous_matrices(const ContinuousAgcModel& cont) {
  const std::size_t ng = cont.t_ch.size();
  if (cont.t_g.size() != ng || cont.droop.size() != ng)
    throw DimensionError("continuous AGC model: per-generator arrays differ in length");
  if (!(cont.inertia > 0.0) || !(cont.damping >= 0.0) || !(cont.dt > 0.0))
    throw Error("continuous AGC model: need inertia > 0, damping >= 0, dt > 0");
  for (std::size_t n = 0; n < ng; ++n)
    if (!(cont.t_ch[n] > 0.0) || !(cont.t_g[n] > 0.0) || !(cont.droop[n] > 0.0))
      throw Error("continuous AGC model: time constants and droop must be > 0");

  const auto g = static_cast<Eigen::Index>(ng);
  const Eigen::Index ns = 2 * g + 1;
  const Eigen::Index w = 2 * g;
  DiscreteSystem c;
  c.a = Eigen::MatrixXd::Zero(ns, ns);
  c.b = Eigen::MatrixXd::Zero(ns, 1);
  for (Eigen::Index n = 0; n < g; ++n) {
    const double tch = cont.t_ch[n];
    const double tg = cont.t_g[n];
    c.a(n, n) = -1.0 / tch;
    c.a(n, g + n) = 1.0 / tch;
    c.a(g + n, g + n) = -1.0 / tg;
    c.a(g + n, w) = -1.0 / (cont.droop[n] * tg);
    c.a(w, n) = 1.0 / cont.inertia;
  }
  c.a(w, w) = -cont.damping / cont.inertia;
  c.b(w, 0) = -1.0 / cont.inertia;
  return c;
}

AgcDynamics zoh_discretize(const ContinuousAgcModel& cont) {
  const DiscreteSystem c = continuous_matrices(cont);
  const DiscreteSystem d = zoh(c.a, c.b, cont.dt);
  const auto g = static_cast<Eigen::Index>(cont.t_ch.size());
  const Eigen::Index w = 2 * g;

  AgcDynamics out;
  out.dt = cont.dt;
  out.alpha.resize(g, g);
  out.beta.resize(g, g);
  out.gamma.resize(g);
  out.zeta.resize(g);
  out.kappa.resize(g);
  out.tau_coef.resize(g);
  out.k_gain.resize(g);
  for (Eigen::Index n = 0; n < g; ++n) {
    for (Eigen::Index i = 0; i < g; ++i) {
      out.alpha(i, n) = d.a(n, i);
      out.beta(i, n) = d.a(n, g + i);
    }
    out.gamma(n) = d.a(n, w);
    out.zeta(n) = d.b(n, 0);
    out.kappa(n) = d.a(w, n);
    out.tau_coef(n) = d.a(w, g + n);
    out.k_gain(n) = governor_gain(cont.dt, cont.droop[n]);
  }
  out.rho = d.a(w, w);
  out.eta = d.b(w, 0);
  return out;
}

PassThroughResult pass_through(const AgcDynamics& raw, std::size_t n_generators) {
  const auto g = static_cast<Eigen::Index>(n_generators);
  auto need_square = [&](const Eigen::MatrixXd& m, const char* name) {
    if (m.rows() != g || m.cols() != g)
      throw DimensionError(std::string("agc: ") + name + " is " + std::to_string(m.rows()) + "x" +
                           std::to_string(m.cols()) + ", expected " + std::to_string(g) + "x" + std::to_string(g));
  };
  auto need_vector = [&](const Eigen::VectorXd& v, const char* name) {
    if (v.size() != g)
      throw DimensionError(std::string("agc: ") + name + " has " + std::to_string(v.size()) + " entries, expected " +
                           std::to_string(g));
  };
  need_square(raw.alpha, "alpha");
  need_square(raw.beta, "beta");
  need_vector(raw.gamma, "gamma");
  need_vector(raw.zeta, "zeta");
  need_vector(raw.kappa, "kappa");
  need_vector(raw.tau_coef, "tau");
  need_vector(raw.k_gain, "k_gain");

  PassThroughResult out{raw, {}};
  if (std::fabs(raw.rho) > kRhoPlausibilityBound)
    out.warnings.push_back("agc: rho = " + std::to_string(raw.rho) + " lies outside [-2, 2]");
  return out;
}

}  // namespace flexgauge
