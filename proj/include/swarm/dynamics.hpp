#pragma once

// Closed-loop double-integrator agent dynamics: PD goal seeking plus
// exponential social repulsion, and a fixed-step RK4 discretization.

#include <vector>

#include "swarm/model.hpp"

namespace swarm {

struct Neighbor {
  AgentState state;
  double radius = 0.0;
};

// Neighbors are frozen for the duration of a step; only those within
// d_int_tol of the agent contribute.
struct ForceField {
  std::vector<Neighbor> neighbors;
  double self_radius = 0.25;
  double a_int = 5.0;
  double b_int = 0.5;
  double d_int_tol = 3.0;

  static ForceField from_config(std::vector<Neighbor> neighbors, double self_radius, const Config& cfg);
  static ForceField empty(const Config& cfg) { return from_config({}, cfg.radius_default, cfg); }
};

struct InteractionDiagnostics {
  int coincident_pairs = 0;
};

// K_p (p - p_g) + K_v v
Vec2 pd_control(const AgentState& x, const Goal& g, const Config& cfg);

// Repulsion on agent i from agent j: A exp((r_i + r_j - d) / B) along
// (p_i - p_j) / d. Coincident agents (d < 1e-9) are pushed along +x.
Vec2 pair_interaction(const AgentState& xi, const AgentState& xj, double ri, double rj, double a_int, double b_int,
                      InteractionDiagnostics* diag = nullptr);
Vec2 pair_interaction(const AgentState& xi, const AgentState& xj, double ri, double rj, const Config& cfg,
                      InteractionDiagnostics* diag = nullptr);

Vec2 total_interaction(const AgentState& xi, const ForceField& field, InteractionDiagnostics* diag = nullptr);

// State-space form of the closed loop without interaction: A_cl x + g.
Mat4 closed_loop_matrix(const Config& cfg);
Vec4 goal_offset(const Goal& g, const Config& cfg);

// [v; pd_control + total_interaction]
Vec4 closed_loop_deriv(const AgentState& x, const Goal& g, const ForceField& field, const Config& cfg);

// One classical RK4 step of closed_loop_deriv over dt.
AgentState step(const AgentState& x, const Goal& g, const ForceField& field, const Config& cfg, double dt);

}  // namespace swarm
