#pragma once

// Minimum-effort transfers of the double integrator and the cost-distance
// similarity built from them.
//
// For x(0) = [p0; v0], x(T) = [pf; vf] under p'' = u, the unique minimizer of
// the control effort is the affine input u*(t) = a + t b with
//
//   b = 12 (p0 - pf) / T^3 + 6 (v0 + vf) / T^2
//   a = (vf - v0) / T - b T / 2
//
// and the reported cost is V = 1/2 (T |a|^2 + T^2 a.b + T^3 |b|^2 / 3), i.e.
// one half of the integral of |u*|^2.

#include "swarm/model.hpp"

namespace swarm {

struct LinearControlLaw {
  Vec2 a = Vec2::Zero();  // m/s^2
  Vec2 b = Vec2::Zero();  // m/s^3
  double horizon = 0.0;   // s

  Vec2 at(double t) const { return a + t * b; }
};

LinearControlLaw solve_transfer(const AgentState& from, const AgentState& to, double horizon);

double cost_of_law(const LinearControlLaw& law);

// Effort for agent i to take over agent j's current state.
double transfer_cost(const AgentState& xi, const AgentState& xj, double horizon);

// Effort for an agent to reach its goal state.
double goal_cost(const AgentState& x, const Goal& g, double horizon);

// lambda1 * transfer_cost(xi, xj) + lambda2 * goal_cost(xi, gi) over T_f_cost.
// Not symmetric in (i, j).
double cost_distance(const AgentState& xi, const AgentState& xj, const Goal& gi, const Config& cfg);

}  // namespace swarm
