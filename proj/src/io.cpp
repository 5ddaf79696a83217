#include "swarm/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "swarm/dynamics.hpp"

namespace swarm {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return {buf, ptr};
}

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view s, const char* column, std::size_t line) {
  double v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ParseError(std::string("malformed ") + column + " value '" + std::string(s) + "'", line);
  if (!std::isfinite(v)) throw ParseError(std::string("non-finite ") + column + " value", line);
  return v;
}

long long parse_integer(std::string_view s, const char* column, std::size_t line) {
  long long v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ParseError(std::string("malformed ") + column + " value '" + std::string(s) + "'", line);
  return v;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

constexpr std::string_view kSceneHeader = "scene_id,frame,agent_id,x,y,vx,vy";
constexpr std::string_view kSceneHeaderNoVel = "scene_id,frame,agent_id,x,y";

}  // namespace

Scene read_scene_csv(std::istream& in, double frame_dt) {
  if (!(frame_dt > 0)) throw std::invalid_argument("frame dt must be positive");
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing header", 1);
  const auto header = trim_cr(line);
  const bool with_velocity = header == kSceneHeader;
  if (!with_velocity && header != kSceneHeaderNoVel)
    throw ParseError("expected header '" + std::string(kSceneHeader) + "'", 1);
  const std::size_t ncols = with_velocity ? 7 : 5;

  struct Row {
    long long frame;
    AgentId agent;
    Observation obs;
  };
  std::vector<Row> rows;
  std::string scene_id;
  std::set<std::pair<long long, AgentId>> seen;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto text = trim_cr(line);
    if (text.empty()) continue;
    const auto cols = split(text, ',');
    if (cols.size() != ncols)
      throw ParseError("expected " + std::to_string(ncols) + " columns, got " + std::to_string(cols.size()), lineno);
    if (scene_id.empty())
      scene_id = std::string(cols[0]);
    else if (cols[0] != scene_id)
      throw ParseError("multiple scene ids in one file ('" + scene_id + "', '" + std::string(cols[0]) + "')", lineno);
    Row r;
    r.frame = parse_integer(cols[1], "frame", lineno);
    r.agent = static_cast<AgentId>(parse_integer(cols[2], "agent_id", lineno));
    r.obs.p = Vec2(parse_number(cols[3], "x", lineno), parse_number(cols[4], "y", lineno));
    if (with_velocity) {
      const bool vx_empty = cols[5].empty();
      const bool vy_empty = cols[6].empty();
      if (vx_empty != vy_empty) throw ParseError("vx and vy must both be present or both empty", lineno);
      if (!vx_empty) r.obs.v = Vec2(parse_number(cols[5], "vx", lineno), parse_number(cols[6], "vy", lineno));
    }
    if (!seen.insert({r.frame, r.agent}).second)
      throw ParseError("duplicate row for frame " + std::to_string(r.frame) + ", agent " + std::to_string(r.agent),
                       lineno);
    rows.push_back(std::move(r));
  }

  Scene scene;
  scene.scene_id = scene_id;
  scene.dt = frame_dt;
  if (rows.empty()) return scene;

  std::set<long long> frame_numbers;
  for (const auto& r : rows) frame_numbers.insert(r.frame);
  const long long first = *frame_numbers.begin();
  long long spacing = 1;
  if (frame_numbers.size() > 1) {
    spacing = *std::next(frame_numbers.begin()) - first;
    long long prev = first;
    for (auto it = std::next(frame_numbers.begin()); it != frame_numbers.end(); ++it) {
      if (*it - prev != spacing) throw ParseError("non-uniform frame spacing at frame " + std::to_string(*it));
      prev = *it;
    }
  }
  scene.frames.resize(frame_numbers.size());
  for (auto& r : rows) scene.frames[static_cast<std::size_t>((r.frame - first) / spacing)][r.agent] = r.obs;
  fill_velocities(scene);
  return scene;
}

Scene read_scene_csv(const std::filesystem::path& path, double frame_dt) {
  auto in = open_in(path);
  return read_scene_csv(in, frame_dt);
}

void write_scene_csv(std::ostream& out, const Scene& scene) {
  out << kSceneHeader << '\n';
  for (std::size_t k = 0; k < scene.frames.size(); ++k) {
    for (const auto& [id, o] : scene.frames[k]) {
      out << scene.scene_id << ',' << k << ',' << id << ',' << format_double(o.p.x()) << ','
          << format_double(o.p.y()) << ',';
      if (o.v) out << format_double(o.v->x()) << ',' << format_double(o.v->y());
      else out << ',';
      out << '\n';
    }
  }
}

void write_scene_csv(const std::filesystem::path& path, const Scene& scene) {
  auto out = open_out(path);
  write_scene_csv(out, scene);
}

GoalMap read_goals_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim_cr(line) != "agent_id,gx,gy") throw ParseError("expected header 'agent_id,gx,gy'", 1);
  GoalMap goals;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto text = trim_cr(line);
    if (text.empty()) continue;
    const auto cols = split(text, ',');
    if (cols.size() != 3) throw ParseError("expected 3 columns", lineno);
    const auto id = static_cast<AgentId>(parse_integer(cols[0], "agent_id", lineno));
    if (goals.count(id)) throw ParseError("duplicate goal for agent " + std::to_string(id), lineno);
    goals[id] = Goal{Vec2(parse_number(cols[1], "gx", lineno), parse_number(cols[2], "gy", lineno)), Vec2::Zero()};
  }
  return goals;
}

GoalMap read_goals_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_goals_csv(in);
}

void write_goals_csv(std::ostream& out, const GoalMap& goals) {
  out << "agent_id,gx,gy\n";
  for (const auto& [id, g] : goals) out << id << ',' << format_double(g.p.x()) << ',' << format_double(g.p.y()) << '\n';
}

void write_goals_csv(const std::filesystem::path& path, const GoalMap& goals) {
  auto out = open_out(path);
  write_goals_csv(out, goals);
}

// ---- Trajnet++ ----

std::vector<Scene> convert_trajnet(std::istream& in, double frame_dt, ConvertStats* stats) {
  struct SceneRec {
    std::string id;
    long long start, end;
  };
  struct TrackRec {
    long long frame;
    AgentId ped;
    Vec2 p;
  };
  std::vector<SceneRec> scenes;
  std::vector<TrackRec> tracks;
  ConvertStats local;
  ConvertStats& st = stats ? *stats : local;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto text = trim_cr(line);
    if (text.find_first_not_of(" \t") == std::string_view::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), lineno);
    }
    try {
      if (j.contains("scene")) {
        const auto& s = j.at("scene");
        const auto& id = s.at("id");
        scenes.push_back({id.is_string() ? id.get<std::string>() : id.dump(), s.at("s").get<long long>(),
                          s.at("e").get<long long>()});
      } else if (j.contains("track")) {
        const auto& t = j.at("track");
        const Vec2 p(t.at("x").get<double>(), t.at("y").get<double>());
        if (!p.allFinite()) throw ParseError("non-finite track coordinate", lineno);
        tracks.push_back({t.at("f").get<long long>(), t.at("p").get<AgentId>(), p});
        ++st.tracks;
      } else {
        ++st.skipped_records;
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("malformed record: ") + e.what(), lineno);
    }
  }

  std::sort(tracks.begin(), tracks.end(),
            [](const TrackRec& a, const TrackRec& b) { return std::tie(a.frame, a.ped) < std::tie(b.frame, b.ped); });

  std::vector<Scene> out;
  for (const auto& sr : scenes) {
    if (sr.end < sr.start) throw ParseError("scene " + sr.id + " ends before it starts");
    long long spacing = 0;
    for (const auto& t : tracks)
      if (t.frame >= sr.start && t.frame <= sr.end) spacing = std::gcd(spacing, t.frame - sr.start);
    spacing = std::gcd(spacing, sr.end - sr.start);
    if (spacing == 0) spacing = 1;
    Scene scene;
    scene.scene_id = sr.id;
    scene.dt = frame_dt;
    scene.frames.resize(static_cast<std::size_t>((sr.end - sr.start) / spacing + 1));
    for (const auto& t : tracks)
      if (t.frame >= sr.start && t.frame <= sr.end)
        scene.frames[static_cast<std::size_t>((t.frame - sr.start) / spacing)][t.ped] = Observation{t.p, std::nullopt};
    fill_velocities(scene);
    out.push_back(std::move(scene));
  }
  st.scenes = out.size();
  return out;
}

std::vector<Scene> convert_trajnet(const std::filesystem::path& path, double frame_dt, ConvertStats* stats) {
  auto in = open_in(path);
  return convert_trajnet(in, frame_dt, stats);
}

// ---- synthetic scenes ----

namespace {

Vec2 json_vec2(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("expected [x, y]");
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

nlohmann::json vec2_json(const Vec2& v) { return nlohmann::json::array({v.x(), v.y()}); }

}  // namespace

SynthSpec synth_spec_from_json(const nlohmann::json& j) {
  SynthSpec s;
  s.scene_id = j.value("scene_id", s.scene_id);
  s.seed = j.value("seed", s.seed);
  s.duration = j.value("duration", s.duration);
  s.dt = j.value("dt", s.dt);
  if (j.contains("groups")) {
    for (const auto& g : j.at("groups")) {
      SynthGroup grp;
      grp.count = g.at("count").get<int>();
      const auto& box = g.at("box");
      if (!box.is_array() || box.size() != 4) throw std::invalid_argument("group box must be [xmin, ymin, xmax, ymax]");
      grp.box_min = Vec2(box.at(0).get<double>(), box.at(1).get<double>());
      grp.box_max = Vec2(box.at(2).get<double>(), box.at(3).get<double>());
      grp.goal = json_vec2(g.at("goal"));
      grp.speed = g.value("speed", 0.0);
      s.groups.push_back(grp);
    }
  }
  if (j.contains("agents")) {
    for (const auto& a : j.at("agents")) {
      SynthAgent ag;
      ag.id = a.at("id").get<AgentId>();
      ag.state.p = json_vec2(a.at("p"));
      ag.state.v = a.contains("v") ? json_vec2(a.at("v")) : Vec2::Zero();
      ag.goal = json_vec2(a.at("goal"));
      s.agents.push_back(ag);
    }
  }
  return s;
}

nlohmann::json synth_spec_to_json(const SynthSpec& s) {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : s.groups)
    groups.push_back({{"count", g.count},
                      {"box", {g.box_min.x(), g.box_min.y(), g.box_max.x(), g.box_max.y()}},
                      {"goal", vec2_json(g.goal)},
                      {"speed", g.speed}});
  nlohmann::json agents = nlohmann::json::array();
  for (const auto& a : s.agents)
    agents.push_back({{"id", a.id}, {"p", vec2_json(a.state.p)}, {"v", vec2_json(a.state.v)}, {"goal", vec2_json(a.goal)}});
  return {{"scene_id", s.scene_id}, {"groups", groups}, {"agents", agents},
          {"seed", s.seed},         {"duration", s.duration}, {"dt", s.dt}};
}

Scene synth_scene(const SynthSpec& spec, const Config& cfg) {
  if (!(spec.dt > 0) || !(spec.duration >= 0)) throw std::invalid_argument("synth: dt must be positive");
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  StateMap states;
  GoalMap goals;
  AgentId next = 1;
  for (const auto& g : spec.groups) {
    if (g.count < 1) throw std::invalid_argument("synth: group count must be >= 1");
    const Vec2 centre = 0.5 * (g.box_min + g.box_max);
    for (int k = 0; k < g.count; ++k) {
      const double u = unit(rng);
      const double w = unit(rng);
      const Vec2 p = g.box_min + Vec2(u * (g.box_max.x() - g.box_min.x()), w * (g.box_max.y() - g.box_min.y()));
      const Vec2 goal = g.goal + (p - centre);
      const Vec2 dir = goal - p;
      const Vec2 v = dir.norm() > 0 ? Vec2(g.speed * dir / dir.norm()) : Vec2::Zero();
      states[next] = AgentState{p, v};
      goals[next] = Goal{goal, Vec2::Zero()};
      ++next;
    }
  }
  for (const auto& a : spec.agents) {
    if (states.count(a.id)) throw std::invalid_argument("synth: duplicate agent id " + std::to_string(a.id));
    states[a.id] = a.state;
    goals[a.id] = Goal{a.goal, Vec2::Zero()};
  }

  Scene scene;
  scene.scene_id = spec.scene_id;
  scene.dt = spec.dt;
  scene.goals = goals;
  const auto nframes = static_cast<std::size_t>(std::llround(spec.duration / spec.dt)) + 1;
  const int substeps = std::max(1, static_cast<int>(std::lround(spec.dt / cfg.dt)));
  const double h = spec.dt / substeps;

  auto record = [&]() {
    Frame f;
    for (const auto& [id, s] : states) f[id] = Observation{s.p, s.v};
    scene.frames.push_back(std::move(f));
  };
  record();
  for (std::size_t k = 1; k < nframes; ++k) {
    for (int sub = 0; sub < substeps; ++sub) {
      StateMap nextstates;
      for (const auto& [id, s] : states) {
        std::vector<Neighbor> nb;
        for (const auto& [oid, os] : states)
          if (oid != id) nb.push_back({os, cfg.radius_default});
        nextstates[id] = step(s, goals.at(id), ForceField::from_config(std::move(nb), cfg.radius_default, cfg), cfg, h);
      }
      states = std::move(nextstates);
    }
    record();
  }
  return scene;
}

// ---- run artifacts ----

void write_run_artifacts(const std::filesystem::path& dir, const PredictionRun& run, const Config& cfg,
                         const ArtifactOptions& opts) {
  std::filesystem::create_directories(dir);

  {
    auto out = open_out(dir / "snapshots.jsonl");
    for (std::size_t k = 0; k < run.snapshots.size(); ++k) {
      nlohmann::json j = run.snapshots[k];
      j["step"] = k;
      j["time"] = static_cast<double>(k) * run.dt;
      out << j.dump() << '\n';
    }
  }
  {
    auto out = open_out(dir / "trajectories.csv");
    out << "step,agent_id,px,py,vx,vy,cluster_id\n";
    for (std::size_t k = 0; k < run.snapshots.size(); ++k) {
      const auto& cs = run.snapshots[k];
      for (const auto& [id, s] : cs.agent_states) {
        const Cluster* c = cs.cluster_of(id);
        out << k << ',' << id << ',' << format_double(s.p.x()) << ',' << format_double(s.p.y()) << ','
            << format_double(s.v.x()) << ',' << format_double(s.v.y()) << ',' << (c ? c->id : -1) << '\n';
      }
    }
  }
  {
    auto out = open_out(dir / "events.jsonl");
    write_log_jsonl(out, run.logs);
  }
  {
    nlohmann::json goals = nlohmann::json::array();
    for (const auto& [id, g] : run.goals)
      goals.push_back({{"agent_id", id}, {"goal", g}, {"source", to_string(run.goal_sources.at(id))}});
    nlohmann::json meta = {{"scene_id", run.scene_id},
                           {"dt", run.dt},
                           {"stride", run.observation_stride ? nlohmann::json(*run.observation_stride) : nlohmann::json("none")},
                           {"steps", run.snapshots.size()},
                           {"config", config_to_json(cfg)},
                           {"goals", goals}};
    auto out = open_out(dir / "run.json");
    out << meta.dump(2) << '\n';
  }
  if (opts.density_grid > 0) {
    auto out = open_out(dir / "density_grid.csv");
    out << "step,x,y,density\n";
    const int n = opts.density_grid;
    for (std::size_t k = 0; k < run.densities.size(); ++k) {
      const auto& d = run.densities[k];
      if (d.components.empty()) continue;
      Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity());
      Vec2 hi = -lo;
      for (const auto& c : d.components) {
        const Vec2 sd(std::sqrt(c.cov(0, 0)), std::sqrt(c.cov(1, 1)));
        lo = lo.cwiseMin(Vec2(c.mean.head<2>() - 3.0 * sd));
        hi = hi.cwiseMax(Vec2(c.mean.head<2>() + 3.0 * sd));
      }
      for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
          const Vec2 p(lo.x() + (ix + 0.5) * (hi.x() - lo.x()) / n, lo.y() + (iy + 0.5) * (hi.y() - lo.y()) / n);
          out << k << ',' << format_double(p.x()) << ',' << format_double(p.y()) << ','
              << format_double(eval_position_density(d, p)) << '\n';
        }
      }
    }
  }
}

}  // namespace swarm
