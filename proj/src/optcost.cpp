#include "swarm/optcost.hpp"

#include <stdexcept>

namespace swarm {

LinearControlLaw solve_transfer(const AgentState& from, const AgentState& to, double horizon) {
  if (!(horizon > 0)) throw std::invalid_argument("solve_transfer: horizon must be positive");
  const double t = horizon;
  LinearControlLaw law;
  law.horizon = t;
  law.b = 12.0 * (from.p - to.p) / (t * t * t) + 6.0 * (from.v + to.v) / (t * t);
  law.a = (to.v - from.v) / t - law.b * t / 2.0;
  return law;
}

double cost_of_law(const LinearControlLaw& law) {
  const double t = law.horizon;
  const double v = 0.5 * (t * law.a.squaredNorm() + t * t * law.a.dot(law.b) + t * t * t / 3.0 * law.b.squaredNorm());
  // The quadratic form is PSD; clamp roundoff below zero.
  return v < 0.0 ? 0.0 : v;
}

double transfer_cost(const AgentState& xi, const AgentState& xj, double horizon) {
  return cost_of_law(solve_transfer(xi, xj, horizon));
}

double goal_cost(const AgentState& x, const Goal& g, double horizon) {
  return cost_of_law(solve_transfer(x, g.as_state(), horizon));
}

double cost_distance(const AgentState& xi, const AgentState& xj, const Goal& gi, const Config& cfg) {
  double v = 0.0;
  if (cfg.lambda1 != 0.0) v += cfg.lambda1 * transfer_cost(xi, xj, cfg.T_f_cost);
  if (cfg.lambda2 != 0.0) v += cfg.lambda2 * goal_cost(xi, gi, cfg.T_f_cost);
  return v;
}

}  // namespace swarm
