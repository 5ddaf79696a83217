#include "swarm/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace swarm {

namespace {
constexpr double kCoincidentDistance = 1e-9;
}

ForceField ForceField::from_config(std::vector<Neighbor> neighbors, double self_radius, const Config& cfg) {
  ForceField f;
  f.neighbors = std::move(neighbors);
  f.self_radius = self_radius;
  f.a_int = cfg.A_int;
  f.b_int = cfg.B_int;
  f.d_int_tol = cfg.d_int_tol;
  return f;
}

Vec2 pd_control(const AgentState& x, const Goal& g, const Config& cfg) {
  return cfg.K_p * (x.p - g.p) + cfg.K_v * x.v;
}

Vec2 pair_interaction(const AgentState& xi, const AgentState& xj, double ri, double rj, double a_int, double b_int,
                      InteractionDiagnostics* diag) {
  const Vec2 diff = xi.p - xj.p;
  const double d = diff.norm();
  const double r = ri + rj;
  if (d < kCoincidentDistance) {
    if (diag) ++diag->coincident_pairs;
    return Vec2(a_int * std::exp(r / b_int), 0.0);
  }
  return a_int * std::exp((r - d) / b_int) * (diff / d);
}

Vec2 pair_interaction(const AgentState& xi, const AgentState& xj, double ri, double rj, const Config& cfg,
                      InteractionDiagnostics* diag) {
  return pair_interaction(xi, xj, ri, rj, cfg.A_int, cfg.B_int, diag);
}

Vec2 total_interaction(const AgentState& xi, const ForceField& field, InteractionDiagnostics* diag) {
  Vec2 f = Vec2::Zero();
  for (const auto& n : field.neighbors) {
    if ((xi.p - n.state.p).norm() > field.d_int_tol) continue;
    f += pair_interaction(xi, n.state, field.self_radius, n.radius, field.a_int, field.b_int, diag);
  }
  return f;
}

Mat4 closed_loop_matrix(const Config& cfg) {
  Mat4 a = Mat4::Zero();
  a(0, 2) = 1.0;
  a(1, 3) = 1.0;
  a(2, 0) = cfg.K_p;
  a(3, 1) = cfg.K_p;
  a(2, 2) = cfg.K_v;
  a(3, 3) = cfg.K_v;
  return a;
}

Vec4 goal_offset(const Goal& g, const Config& cfg) {
  Vec4 off = Vec4::Zero();
  off.tail<2>() = -cfg.K_p * g.p;
  return off;
}

Vec4 closed_loop_deriv(const AgentState& x, const Goal& g, const ForceField& field, const Config& cfg) {
  Vec4 dx;
  dx << x.v, pd_control(x, g, cfg) + total_interaction(x, field);
  return dx;
}

AgentState step(const AgentState& x, const Goal& g, const ForceField& field, const Config& cfg, double dt) {
  if (!(dt > 0)) throw std::invalid_argument("step: dt must be positive");
  auto f = [&](const Vec4& s) { return closed_loop_deriv(AgentState::from_vector(s), g, field, cfg); };
  const Vec4 x0 = x.vector();
  const Vec4 k1 = f(x0);
  const Vec4 k2 = f(x0 + 0.5 * dt * k1);
  const Vec4 k3 = f(x0 + 0.5 * dt * k2);
  const Vec4 k4 = f(x0 + dt * k3);
  return AgentState::from_vector(x0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

}  // namespace swarm
