#pragma once

// Scene files, the Trajnet++ converter, the synthetic scenario generator and
// prediction-run artifact writers.
//
// Canonical scene CSV header: scene_id,frame,agent_id,x,y,vx,vy (velocity
// columns optional or empty). Goals CSV header: agent_id,gx,gy.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarm/pipeline.hpp"
#include "swarm/scene.hpp"

namespace swarm {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

Scene read_scene_csv(std::istream& in, double frame_dt = 0.1);
Scene read_scene_csv(const std::filesystem::path& path, double frame_dt = 0.1);
void write_scene_csv(std::ostream& out, const Scene& scene);
void write_scene_csv(const std::filesystem::path& path, const Scene& scene);

GoalMap read_goals_csv(std::istream& in);
GoalMap read_goals_csv(const std::filesystem::path& path);
void write_goals_csv(std::ostream& out, const GoalMap& goals);
void write_goals_csv(const std::filesystem::path& path, const GoalMap& goals);

struct ConvertStats {
  std::size_t scenes = 0;
  std::size_t tracks = 0;
  std::size_t skipped_records = 0;
};

// Newline-delimited {"scene": {...}} / {"track": {"f","p","x","y"}} records.
// Frame numbers inside a scene are mapped to indices using their common
// spacing; frame_dt is the time between consecutive indices.
std::vector<Scene> convert_trajnet(std::istream& in, double frame_dt = 0.4, ConvertStats* stats = nullptr);
std::vector<Scene> convert_trajnet(const std::filesystem::path& path, double frame_dt = 0.4,
                                   ConvertStats* stats = nullptr);

struct SynthGroup {
  int count = 1;
  Vec2 box_min = Vec2::Zero();
  Vec2 box_max = Vec2::Zero();
  Vec2 goal = Vec2::Zero();  // goal of the box centre; members keep their offsets
  double speed = 0.0;        // initial speed toward the goal, m/s
};

struct SynthAgent {
  AgentId id = 0;
  AgentState state;
  Vec2 goal = Vec2::Zero();
};

struct SynthSpec {
  std::string scene_id = "synthetic";
  std::vector<SynthGroup> groups;
  std::vector<SynthAgent> agents;  // explicit agents, appended after the groups
  std::uint64_t seed = 0;
  double duration = 10.0;  // s
  double dt = 0.1;         // s, frame interval
};

SynthSpec synth_spec_from_json(const nlohmann::json& j);
nlohmann::json synth_spec_to_json(const SynthSpec& s);

// Simulates the closed-loop social-force dynamics of every agent from its
// start state. Group agents get ids 1.. in order; explicit agents keep theirs.
Scene synth_scene(const SynthSpec& spec, const Config& cfg);

struct ArtifactOptions {
  int density_grid = 0;  // cells per axis of density_grid.csv; 0 disables it
};

// Writes snapshots.jsonl, trajectories.csv, events.jsonl, run.json and, when
// requested, density_grid.csv into dir (created if needed).
void write_run_artifacts(const std::filesystem::path& dir, const PredictionRun& run, const Config& cfg,
                         const ArtifactOptions& opts = {});

}  // namespace swarm
