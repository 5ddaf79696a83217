// Acceptance suite: one PASS/FAIL line per criterion.
// Usage: acceptance [criterion-number ...]   (no arguments runs all)
#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "swarm/eval.hpp"
#include "swarm/filter.hpp"
#include "swarm/io.hpp"
#include "swarm/optcost.hpp"
#include "swarm/pipeline.hpp"
#include "swarm/scenarios.hpp"

using namespace swarm;
namespace fs = std::filesystem;

namespace {

// Tolerances and limits.
constexpr double kOracleRelTol = 1e-3;
constexpr double kOracleSeconds = 10.0;
constexpr double kAnalyticTol = 1e-9;
constexpr double kKfTol = 1e-6;
constexpr int kNeesRuns = 200;
constexpr int kNeesSteps = 50;
constexpr double kNeesSeconds = 60.0;
constexpr int kPropertyCases = 1000;
constexpr int kFdeScenes = 20;
constexpr int kFdeNeeded = 18;
constexpr double kWeightTol = 1e-12;
constexpr double kMinMass = 0.98;
constexpr int kMassSamples = 16384;

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

AgentState at(double px, double py, double vx = 0, double vy = 0) { return {Vec2(px, py), Vec2(vx, vy)}; }
Goal goal_at(double x, double y) { return {Vec2(x, y), Vec2::Zero()}; }

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Verdict oracle_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  std::normal_distribution<double> n(0.0, 2.0);
  std::uniform_real_distribution<double> hz(0.5, 4.0);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const AgentState a = at(n(rng), n(rng), n(rng), n(rng));
    const AgentState b = at(n(rng), n(rng), n(rng), n(rng));
    const Goal g = goal_at(n(rng), n(rng));
    const double t = hz(rng);
    const double r1 = oracle::discrete_min_effort(a.p, a.v, b.p, b.v, t);
    const double r2 = oracle::discrete_min_effort(a.p, a.v, g.p, g.v, t);
    worst = std::max({worst, std::abs(transfer_cost(a, b, t) - r1) / r1, std::abs(goal_cost(a, g, t) - r2) / r2});
  }
  const double secs = seconds_since(t0);
  return {worst <= kOracleRelTol && secs < kOracleSeconds, fmt("max rel err %.2e, %.2f s", worst, secs)};
}

Verdict analytic_values() {
  const double v1 = transfer_cost(at(0, 0), at(1, 0), 1.0);
  const double v2 = goal_cost(at(0, 0), goal_at(2, 0), 2.0);
  const bool ok = std::abs(v1 - 6.0) <= kAnalyticTol && std::abs(v2 - 3.0) <= kAnalyticTol;
  return {ok, fmt("V1 = %.12f, V2 = %.12f", v1, v2)};
}

Verdict kalman_equivalence() {
  Config cfg;
  cfg.dt = 0.01;
  const Goal g = goal_at(3, -2);
  const double frame = 0.1;
  const int substeps = 10;
  const auto f = oracle::closed_loop_step(cfg.K_p, cfg.K_v, g.p, frame);
  const Mat4 q = process_noise(cfg);
  const auto mm = MeasurementModel::from_config(cfg);
  oracle::LinearKf kf{at(0, 0, 1, 0).vector(), singleton_covariance(cfg)};
  Vec4 x = kf.x;
  Mat4 p = kf.p;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, cfg.meas_noise_std);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const auto pred = predict(sigma_points_singleton(AgentState::from_vector(x), p, cfg), g, ForceField::empty(cfg),
                              cfg, frame / substeps, substeps);
    kf.predict(f, q);
    const Vec2 z = kf.x.head<2>() + Vec2(n(rng), n(rng));
    const auto post = update(pred, z, mm);
    kf.update(z, mm.noise_cov);
    x = post.mean;
    p = post.cov;
    worst = std::max({worst, (x - kf.x).cwiseAbs().maxCoeff(), (p - kf.p).cwiseAbs().maxCoeff()});
  }
  return {worst < kKfTol, fmt("max component diff %.2e over 50 steps", worst)};
}

// Truth is drawn from the filter's own model: x0 ~ N(xhat0, P0), additive
// process noise per frame, noisy position fixes, a static neighbour pushing
// the walker sideways.
Verdict nees_consistency() {
  const auto t0 = Clock::now();
  const Config cfg;
  const Goal g = goal_at(8, 0.3);
  const ForceField field = ForceField::from_config({{at(3.0, 0.5), cfg.radius_default}}, cfg.radius_default, cfg);
  const Mat4 q = process_noise(cfg);
  const Mat4 lq = q.llt().matrixL();
  const Mat4 p0 = singleton_covariance(cfg);
  const Mat4 lp0 = p0.llt().matrixL();
  const auto mm = MeasurementModel::from_config(cfg);
  const double dt = 0.1;

  std::vector<double> sum(kNeesSteps, 0.0);
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> n(0.0, 1.0);
  auto draw = [&] { return Vec4(n(rng), n(rng), n(rng), n(rng)); };
  for (int r = 0; r < kNeesRuns; ++r) {
    const Vec4 xhat0 = at(0, 0, 1, 0).vector();
    Vec4 truth = xhat0 + lp0 * draw();
    Vec4 x = xhat0;
    Mat4 p = p0;
    for (int k = 0; k < kNeesSteps; ++k) {
      truth = step(AgentState::from_vector(truth), g, field, cfg, dt).vector() + lq * draw();
      const Vec2 z = truth.head<2>() + cfg.meas_noise_std * Vec2(n(rng), n(rng));
      const auto pred = predict(sigma_points_singleton(AgentState::from_vector(x), p, cfg), g, field, cfg, dt, 1);
      const auto post = update(pred, z, mm);
      x = post.mean;
      p = post.cov;
      const Vec4 e = truth - x;
      sum[static_cast<std::size_t>(k)] += e.dot(p.ldlt().solve(e));
    }
  }
  const boost::math::chi_squared chi(4.0 * kNeesRuns);
  const double lo = boost::math::quantile(chi, 0.025) / kNeesRuns;
  const double hi = boost::math::quantile(chi, 0.975) / kNeesRuns;
  double mean = 0.0;
  int inside = 0;
  for (double s : sum) {
    const double a = s / kNeesRuns;
    mean += a / kNeesSteps;
    inside += (a >= lo && a <= hi) ? 1 : 0;
  }
  const double secs = seconds_since(t0);
  return {mean >= lo && mean <= hi && secs < kNeesSeconds,
          fmt("mean ANEES %.3f in [%.3f, %.3f], %d/%d steps inside, %.2f s", mean, lo, hi, inside, kNeesSteps, secs)};
}

Verdict clustering_invariants() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  std::uniform_int_distribution<int> count(1, 8), small(1, 5);
  int cases = 0, failures = 0;
  auto expect = [&](bool ok) {
    ++cases;
    failures += ok ? 0 : 1;
  };
  const Config cfg;
  for (int trial = 0; trial < kPropertyCases / 4; ++trial) {
    StateMap s;
    GoalMap g;
    const int agents = count(rng);
    for (int i = 1; i <= agents; ++i) {
      s[i] = at(u(rng), u(rng), u(rng) / 2, u(rng) / 2);
      g[i] = goal_at(u(rng), u(rng));
    }
    // Partition of exactly the live agents.
    const auto r = cluster_agents(s, g, cfg);
    std::set<AgentId> seen;
    std::size_t total = 0;
    for (const auto& c : r.clusters.clusters) {
      seen.insert(c.members.begin(), c.members.end());
      total += c.members.size();
    }
    expect(r.clusters.is_partition() && total == s.size() && seen.size() == s.size());

    // Determinism.
    expect(cluster_agents(s, g, cfg).clusters.partition() == r.clusters.partition());

    // Degenerate thresholds.
    Config zero = cfg;
    zero.d_tol = 0.0;
    Config no_cost = cfg;
    no_cost.c_tol = 0.0;
    expect(cluster_agents(s, g, zero).clusters.clusters.size() == s.size() &&
           cluster_agents(s, g, no_cost).clusters.clusters.size() == s.size());

    // Hausdorff axioms and the exhaustive oracle on small sets.
    auto make = [&] {
      std::vector<Vec2> v(static_cast<std::size_t>(small(rng)));
      for (auto& p : v) p = Vec2(u(rng), u(rng));
      return v;
    };
    const auto a = make(), b = make(), c = make();
    const double ab = hausdorff(a, b), ba = hausdorff(b, a);
    const double ac = hausdorff(a, c), bc = hausdorff(b, c);
    std::vector<Vec2> shuffled = a;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    expect(std::abs(ab - oracle::hausdorff_bruteforce(a, b)) < 1e-12 && ab == ba && hausdorff(a, a) == 0.0 &&
           hausdorff(a, shuffled) == 0.0 && ab >= 0.0 && ac <= ab + bc + 1e-12);
  }
  return {failures == 0 && cases >= kPropertyCases, fmt("%d cases, %d failures", cases, failures)};
}

bool same_members(std::vector<AgentId> a, std::vector<AgentId> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

Verdict overtaking_reclustering() {
  const Config cfg;
  const Scene sc = synth_scene(overtaking_spec(), cfg);
  const auto pr = run(sc, cfg, {});
  const bool paired_first = pr.snapshots.front().cluster_of(1) == pr.snapshots.front().cluster_of(2);
  int split_step = -1, join_step = -1;
  for (const auto& log : pr.logs)
    for (const auto& e : log.events) {
      if (split_step < 0 && e.kind == EventKind::Split && same_members(e.first, {1, 2})) split_step = log.step;
      if (split_step >= 0 && join_step < 0 && (e.kind == EventKind::Pair || e.kind == EventKind::Merge)) {
        std::vector<AgentId> joined = e.first;
        joined.insert(joined.end(), e.second.begin(), e.second.end());
        if (same_members(joined, {1, 3})) join_step = log.step;
      }
    }
  return {paired_first && split_step >= 0 && join_step >= split_step,
          fmt("{1,2} at start: %s, {1,2} split at step %d, {1,3} formed at step %d", paired_first ? "yes" : "no",
              split_step, join_step)};
}

Verdict cd_vs_ed() {
  const Config cfg;
  std::vector<Scene> scenes;
  for (std::uint64_t s = 1; s <= 3; ++s) scenes.push_back(synth_scene(opposing_flow_spec(s), cfg));
  CompareOptions co;
  co.repeats = 5;
  const auto rows = compare_cd_ed(scenes, cfg, co);
  bool accurate = true, faster = true;
  std::string detail;
  for (std::size_t k = 0; k + 1 < rows.size(); k += 2) {
    const auto& ed = rows[k];
    const auto& cd = rows[k + 1];
    accurate = accurate && cd.ade < ed.ade && cd.fde < ed.fde;
    faster = faster && cd.time_s <= ed.time_s;
    detail += fmt("%s ADE %.3f/%.3f FDE %.3f/%.3f t %.2f/%.2f ms; ", ed.scene.c_str(), cd.ade, ed.ade, cd.fde,
                  ed.fde, cd.time_s * 1e3, ed.time_s * 1e3);
  }
  detail += fmt("(CD/ED) accuracy %s, timing %s", accurate ? "ok" : "not met", faster ? "ok" : "not met");
  return {accurate && faster, detail};
}

Verdict fde_over_ade() {
  const Config cfg;
  RunOptions ro;
  ro.observation_stride = 5;
  int hits = 0;
  for (int s = 1; s <= kFdeScenes; ++s) {
    const Scene sc = synth_scene(random_scene_spec(static_cast<std::uint64_t>(s)), cfg);
    const auto m = evaluate_run(run(sc, cfg, ro), sc);
    hits += m.fde_sum >= m.ade_sum ? 1 : 0;
  }
  return {hits >= kFdeNeeded, fmt("%d/%d scenes with FDE sum >= ADE sum", hits, kFdeScenes)};
}

// With the fixture at rest, V1 = 0.1875 and V2 = 6.75, so the pair cost is
// 6.75 - 6.5625 lambda1: below c_tol = 3 exactly when lambda1 > 0.5714.
Verdict lambda_flip() {
  const Config cfg = lambda_fixture_config();
  const Scene sc = synth_scene(lambda_fixture_spec(), cfg);
  const std::vector<double> grid{0.0, 0.5, 0.7, 1.0};
  const auto tl = lambda_sweep(sc, grid, cfg);
  bool ok = tl.size() == grid.size();
  std::string detail = fmt("c_tol %.1f: ", cfg.c_tol);
  for (std::size_t k = 0; ok && k < grid.size(); ++k) {
    const double cost = 0.1875 * grid[k] + 6.75 * (1.0 - grid[k]);
    const std::size_t want = cost < cfg.c_tol ? 1 : 2;
    const std::size_t got = tl[k].partitions.front().size();
    ok = ok && got == want;
    detail += fmt("lambda1 %.1f -> %zu cluster(s) (want %zu); ", grid[k], got, want);
  }
  return {ok, detail};
}

// Quasi Monte Carlo: Halton points spread over each component's 6-sigma box,
// weighted by the resulting mixture-of-uniforms proposal.
double position_mass(const MixtureDensity& d) {
  std::vector<Vec2> lo, hi;
  for (const auto& c : d.components) {
    const Vec2 sd(std::sqrt(c.cov(0, 0)), std::sqrt(c.cov(1, 1)));
    lo.push_back(c.mean.head<2>() - 6.0 * sd);
    hi.push_back(c.mean.head<2>() + 6.0 * sd);
  }
  const double share = 1.0 / static_cast<double>(lo.size());
  double mass = 0.0;
  for (std::size_t c = 0; c < lo.size(); ++c) {
    double acc = 0.0;
    for (int s = 1; s <= kMassSamples; ++s) {
      const auto idx = static_cast<std::size_t>(s);
      const Vec2 x = lo[c] + (hi[c] - lo[c]).cwiseProduct(Vec2(oracle::halton(idx, 2), oracle::halton(idx, 3)));
      double q = 0.0;
      for (std::size_t j = 0; j < lo.size(); ++j)
        if ((x.array() >= lo[j].array()).all() && (x.array() <= hi[j].array()).all())
          q += share / (hi[j] - lo[j]).prod();
      acc += eval_position_density(d, x) / q;
    }
    mass += share * acc / kMassSamples;
  }
  return mass;
}

Verdict mixture_validity() {
  const Config cfg;
  std::vector<Scene> scenes{synth_scene(overtaking_spec(), cfg)};
  for (std::uint64_t s = 1; s <= 3; ++s) scenes.push_back(synth_scene(opposing_flow_spec(s), cfg));
  for (std::uint64_t s = 1; s <= 5; ++s) scenes.push_back(synth_scene(random_scene_spec(s), cfg));
  long densities = 0, bad_weight = 0, bad_cov = 0, low_mass = 0;
  double worst_mass = 1.0;
  for (const auto& sc : scenes)
    for (std::optional<int> stride : {std::optional<int>(1), std::optional<int>(5)}) {
      RunOptions ro;
      ro.observation_stride = stride;
      const auto pr = run(sc, cfg, ro);
      for (const auto& d : pr.densities) {
        ++densities;
        double w = 0.0;
        bool cov_ok = true;
        for (const auto& c : d.components) {
          w += c.weight;
          cov_ok = cov_ok && is_symmetric(c.cov, 1e-12) && is_psd(c.cov, 1e-12);
        }
        bad_weight += std::abs(w - 1.0) <= kWeightTol ? 0 : 1;
        bad_cov += cov_ok ? 0 : 1;
        const double m = position_mass(d);
        worst_mass = std::min(worst_mass, m);
        low_mass += m >= kMinMass ? 0 : 1;
      }
    }
  return {bad_weight == 0 && bad_cov == 0 && low_mass == 0,
          fmt("%ld densities: %ld bad weight sums, %ld bad covariances, min mass %.4f", densities, bad_weight, bad_cov,
              worst_mass)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Verdict end_to_end_determinism() {
  Config cfg;
  cfg.seed = 42;
  const Scene sc = synth_scene(overtaking_spec(), cfg);
  const fs::path root = fs::temp_directory_path() / fmt("swarm_acceptance_%lld", static_cast<long long>(Clock::now().time_since_epoch().count()));
  fs::remove_all(root);
  RunOptions ro;
  ro.observation_stride = 5;
  for (const char* name : {"a", "b"}) write_run_artifacts(root / name, run(sc, cfg, ro), cfg, ArtifactOptions{24});
  std::set<std::string> names_a, names_b;
  for (const auto& e : fs::directory_iterator(root / "a")) names_a.insert(e.path().filename().string());
  for (const auto& e : fs::directory_iterator(root / "b")) names_b.insert(e.path().filename().string());
  bool same = names_a == names_b && !names_a.empty();
  for (const auto& n : names_a) same = same && slurp(root / "a" / n) == slurp(root / "b" / n);
  fs::remove_all(root);
  return {same, fmt("%zu artifact files compared", names_a.size())};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"optimal-cost oracle equivalence", oracle_equivalence},
      {"analytic cost values", analytic_values},
      {"UKF linear equivalence", kalman_equivalence},
      {"filter consistency (NEES)", nees_consistency},
      {"clustering invariants", clustering_invariants},
      {"overtaking re-clustering", overtaking_reclustering},
      {"CD vs ED on opposing flows", cd_vs_ed},
      {"FDE >= ADE across scenes", fde_over_ade},
      {"lambda sweep membership", lambda_flip},
      {"mixture validity", mixture_validity},
      {"end-to-end determinism", end_to_end_determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::stoi(argv[i]));
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Verdict v;
    try {
      v = criteria[k].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s AC%d %s: %s\n", v.pass ? "PASS" : "FAIL", id, criteria[k].first, v.detail.c_str());
    failed += v.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
