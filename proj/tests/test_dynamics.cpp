#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "swarm/dynamics.hpp"

using namespace swarm;

namespace {

AgentState at(double px, double py, double vx = 0, double vy = 0) { return {Vec2(px, py), Vec2(vx, vy)}; }
Goal goal_at(double x, double y) { return {Vec2(x, y), Vec2::Zero()}; }

}  // namespace

TEST_CASE("pd_control substitution") {
  const Config cfg;
  CHECK(pd_control(at(0, 0), goal_at(0, 0), cfg) == Vec2(0, 0));
  CHECK(pd_control(at(1, 0), goal_at(0, 0), cfg) == Vec2(-1, 0));
  CHECK(pd_control(at(1, 0, 1, 0), goal_at(0, 0), cfg) == Vec2(-3, 0));
}

TEST_CASE("pair interaction magnitude and direction") {
  const Vec2 touching = pair_interaction(at(1, 0), at(0, 0), 0.5, 0.5, 5.0, 0.5);
  CHECK(touching.x() == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(touching.y() == 0.0);

  const Vec2 f = pair_interaction(at(2, 0), at(0, 0), 0.5, 0.5, 1.0, 1.0);
  CHECK(f.x() == doctest::Approx(0.36787944117144233).epsilon(1e-14));
  CHECK(f.y() == 0.0);

  InteractionDiagnostics diag;
  const Vec2 c = pair_interaction(at(3, 3), at(3, 3), 0.25, 0.25, 5.0, 0.5, &diag);
  CHECK(diag.coincident_pairs == 1);
  CHECK(c.x() == doctest::Approx(5.0 * std::exp(1.0)));
  CHECK(c.y() == 0.0);
}

TEST_CASE("total interaction") {
  const Config cfg;
  CHECK(total_interaction(at(0, 0), ForceField::empty(cfg)) == Vec2::Zero());

  auto sym = ForceField::from_config({{at(1, 0), 0.25}, {at(-1, 0), 0.25}}, 0.25, cfg);
  CHECK(total_interaction(at(0, 0), sym).norm() < 1e-15);

  auto one = ForceField::from_config({{at(1, 0.5), 0.3}}, 0.25, cfg);
  CHECK(total_interaction(at(0, 0), one) == pair_interaction(at(0, 0), at(1, 0.5), 0.25, 0.3, cfg));

  auto far = ForceField::from_config({{at(cfg.d_int_tol + 0.1, 0), 0.25}}, 0.25, cfg);
  CHECK(total_interaction(at(0, 0), far) == Vec2::Zero());
}

TEST_CASE("closed-loop derivative") {
  const Config cfg;
  const auto none = ForceField::empty(cfg);
  CHECK(closed_loop_deriv(at(2, 3), goal_at(2, 3), none, cfg) == Vec4::Zero());
  CHECK(closed_loop_deriv(at(1, 0), goal_at(0, 0), none, cfg) == Vec4(0, 0, -1, 0));

  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 3.0);
  for (int k = 0; k < 100; ++k) {
    const AgentState x = at(n(rng), n(rng), n(rng), n(rng));
    const Goal g = goal_at(n(rng), n(rng));
    const Vec4 matrix_form = closed_loop_matrix(cfg) * x.vector() + goal_offset(g, cfg);
    CHECK((closed_loop_deriv(x, g, none, cfg) - matrix_form).norm() < 1e-12);
  }
}

TEST_CASE("step integrates constant velocity exactly") {
  Config cfg;
  cfg.K_p = 0.0;
  cfg.K_v = 0.0;
  const AgentState x = step(at(0, 0, 1, 0), goal_at(0, 0), ForceField::empty(cfg), cfg, 0.1);
  CHECK(x.p.x() == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(x.p.y() == 0.0);
  CHECK(x.v == Vec2(1, 0));
}

TEST_CASE("step matches the matrix exponential on linear dynamics") {
  const Config cfg;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 2.0);
  for (int k = 0; k < 50; ++k) {
    const AgentState x = at(n(rng), n(rng), n(rng), n(rng));
    const Goal g = goal_at(n(rng), n(rng));
    const auto f = oracle::closed_loop_step(cfg.K_p, cfg.K_v, g.p, 0.1);
    const Vec4 expect = f.phi * x.vector() + f.c;
    const Vec4 got = step(x, g, ForceField::empty(cfg), cfg, 0.1).vector();
    // Fourth-order truncation error grows with the distance from equilibrium.
    const double scale = 1.0 + (x.vector() - Vec4(g.p.x(), g.p.y(), 0, 0)).norm();
    CHECK((got - expect).cwiseAbs().maxCoeff() < 1e-6 * scale);

    // On a linear system one classical RK4 step is the degree-4 Taylor
    // polynomial of the flow, applied to the offset from equilibrium.
    const Mat4 a = closed_loop_matrix(cfg) * 0.1;
    Mat4 term = Mat4::Identity(), taylor = Mat4::Identity();
    for (int p = 1; p <= 4; ++p) {
      term = term * a / p;
      taylor += term;
    }
    const Vec4 eq(g.p.x(), g.p.y(), 0, 0);
    CHECK((got - (eq + taylor * (x.vector() - eq))).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("goal seeking settles within 10 s") {
  const Config cfg;
  AgentState x = at(1, 0);
  for (int k = 0; k < 100; ++k) x = step(x, goal_at(0, 0), ForceField::empty(cfg), cfg, 0.1);
  CHECK(x.p.norm() < 0.01);
  const auto f = oracle::closed_loop_step(cfg.K_p, cfg.K_v, Vec2::Zero(), 10.0);
  CHECK((f.phi * at(1, 0).vector() - x.vector()).norm() < 1e-5);
}

TEST_CASE("step rejects a non-positive step size") {
  const Config cfg;
  CHECK_THROWS(step(at(0, 0), goal_at(0, 0), ForceField::empty(cfg), cfg, 0.0));
}
