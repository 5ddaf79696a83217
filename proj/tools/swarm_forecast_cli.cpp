// swarm-forecast: convert, synth, predict, eval, compare and sweep subcommands.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "swarm/eval.hpp"
#include "swarm/io.hpp"
#include "swarm/scenarios.hpp"

namespace fs = std::filesystem;
using namespace swarm;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int default_threads() {
  if (const char* env = std::getenv("SWARM_FORECAST_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
    throw UsageError(std::string("SWARM_FORECAST_THREADS must be a positive integer, got '") + env + "'");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Config assembled from an optional JSON file plus per-field flags.
struct ConfigArgs {
  std::string config_path;
  std::map<std::string, std::string> overrides;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Config JSON file (flat object of field names)");
    for (const auto& f : config_fields()) {
      const std::string name(f.name);
      std::string help(f.help);
      if (!f.unit.empty()) help += " [" + std::string(f.unit) + "]";
      cmd->add_option_function<std::string>(
          "--" + name, [this, name](const std::string& v) { overrides[name] = v; }, help);
    }
  }

  Config build() const {
    Config cfg;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw UsageError("cannot open config " + config_path);
      nlohmann::json j;
      try {
        in >> j;
      } catch (const nlohmann::json::exception& e) {
        throw UsageError("config " + config_path + ": " + e.what());
      }
      cfg = config_from_json(j);
    }
    for (const auto& [k, v] : overrides) set_config_field(cfg, k, v);
    return validate_config(cfg);
  }
};

std::optional<int> parse_stride(const std::string& s) {
  if (s == "none") return std::nullopt;
  int n = 0;
  try {
    std::size_t used = 0;
    n = std::stoi(s, &used);
    if (used != s.size()) n = 0;
  } catch (const std::exception&) {
    n = 0;
  }
  if (n < 1) throw UsageError("stride must be ≥ 1 or 'none'");
  return n;
}

// Goals: explicit file, else a sibling <stem>.goals.csv next to the scene.
void attach_goals(Scene& scene, const fs::path& scene_path, const std::string& goals_path) {
  fs::path g = goals_path;
  if (g.empty()) {
    fs::path sibling = scene_path;
    sibling.replace_extension(".goals.csv");
    if (fs::exists(sibling)) g = sibling;
  }
  if (!g.empty()) scene.goals = read_goals_csv(g);
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << s;
}

// Reads trajectories.csv back into per-agent state maps.
std::map<AgentId, std::map<int, AgentState>> read_trajectories(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw ParseError("cannot open " + p.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("step,agent_id,px,py,vx,vy", 0) != 0) throw ParseError("unexpected trajectories header", 1);
  std::map<AgentId, std::map<int, AgentState>> out;
  std::size_t ln = 1;
  while (std::getline(in, line)) {
    ++ln;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
    if (cols.size() < 6) throw ParseError("expected at least 6 columns", ln);
    try {
      AgentState s{Vec2(std::stod(cols[2]), std::stod(cols[3])), Vec2(std::stod(cols[4]), std::stod(cols[5]))};
      out[std::stoi(cols[1])][std::stoi(cols[0])] = s;
    } catch (const std::exception&) {
      throw ParseError("malformed number", ln);
    }
  }
  return out;
}

void print_summary(std::ostream& os, const MetricsReport& m) {
  if (m.per_agent.empty()) return;
  os << "agents: " << m.per_agent.size() << "\nADE: " << format_double(m.ade_mean)
     << "\nFDE: " << format_double(m.fde_mean) << "\nADE sum: " << format_double(m.ade_sum)
     << "\nFDE sum: " << format_double(m.fde_sum) << '\n';
}

void write_metrics_csv(std::ostream& out, const MetricsReport& m) {
  out << "agent_id,ade,fde\n";
  for (const auto& [id, r] : m.per_agent) out << id << ',' << format_double(r.ade) << ',' << format_double(r.fde) << '\n';
}

std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  for (std::string tok; std::getline(ss, tok, ',');) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw UsageError("bad --lambda-grid value '" + tok + "'");
    }
  }
  if (out.empty()) throw UsageError("--lambda-grid is empty");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cluster-based multi-agent motion prediction"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads for compare/sweep (default: $SWARM_FORECAST_THREADS or all cores)")
      ->check(CLI::PositiveNumber);

  // convert
  auto* convert = app.add_subcommand("convert", "Convert Trajnet++ ndjson into scene CSV files");
  std::string conv_in, conv_out = ".";
  double conv_dt = 0.4;
  convert->add_option("input", conv_in, "Trajnet++ ndjson file")->required();
  convert->add_option("--out", conv_out, "Output directory")->capture_default_str();
  convert->add_option("--frame-dt", conv_dt, "Time between consecutive frames [s]")->capture_default_str();

  // synth
  auto* synth = app.add_subcommand("synth", "Simulate a synthetic scene");
  std::string synth_spec_path, synth_preset, synth_out = ".";
  std::uint64_t synth_seed = 0;
  ConfigArgs synth_cfg;
  auto* spec_opt = synth->add_option("--spec", synth_spec_path, "Scenario JSON (groups and/or agents)");
  std::string preset_help = "Named scenario:";
  for (auto n : preset_names()) preset_help += " " + std::string(n);
  synth->add_option("--preset", synth_preset, preset_help)->excludes(spec_opt);
  synth->add_option("--scenario-seed", synth_seed, "Seed for randomized presets")->capture_default_str();
  synth->add_option("--out", synth_out, "Output directory")->capture_default_str();
  synth_cfg.attach(synth);

  // predict
  auto* predict = app.add_subcommand("predict", "Run cluster motion prediction on a scene");
  std::string pred_scene, pred_goals, pred_stride = "1", pred_out = "run";
  double pred_dt = 0.1;
  int pred_grid = 0;
  bool pred_no_oracle = false;
  ConfigArgs pred_cfg;
  predict->add_option("scene", pred_scene, "Scene CSV")->required();
  predict->add_option("--goals", pred_goals, "Goals CSV (default: <scene>.goals.csv when present)");
  predict->add_option("--stride", pred_stride, "Observe every N-th frame, or 'none'")->capture_default_str();
  predict->add_option("--frame-dt", pred_dt, "Time between consecutive frames [s]")->capture_default_str();
  predict->add_option("--grid", pred_grid, "Cells per axis of density_grid.csv (0 = off)")->capture_default_str();
  predict->add_flag("--no-oracle-goals", pred_no_oracle, "Do not use final truth positions as goals");
  predict->add_option("--out", pred_out, "Output directory")->capture_default_str();
  pred_cfg.attach(predict);

  // eval
  auto* evalc = app.add_subcommand("eval", "ADE/FDE of a prediction run against a scene");
  std::string ev_scene, ev_run, ev_out;
  double ev_dt = 0.1;
  evalc->add_option("scene", ev_scene, "Scene CSV with truth")->required();
  evalc->add_option("run", ev_run, "Run directory written by predict")->required();
  evalc->add_option("--frame-dt", ev_dt, "Time between consecutive frames [s]")->capture_default_str();
  evalc->add_option("--out", ev_out, "Directory for metrics.csv (default: print only)");

  // compare
  auto* compare = app.add_subcommand("compare", "Cost-distance vs Euclidean clustering on scenes");
  std::vector<std::string> cmp_scenes;
  std::string cmp_stride = "1", cmp_out = ".";
  double cmp_dt = 0.1;
  int cmp_repeats = 3;
  bool cmp_no_oracle = false;
  ConfigArgs cmp_cfg;
  compare->add_option("scenes", cmp_scenes, "Scene CSV files")->required();
  compare->add_option("--stride", cmp_stride, "Observe every N-th frame, or 'none'")->capture_default_str();
  compare->add_option("--frame-dt", cmp_dt, "Time between consecutive frames [s]")->capture_default_str();
  compare->add_option("--repeats", cmp_repeats, "Timed runs per arm; the fastest is reported")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  compare->add_flag("--no-oracle-goals", cmp_no_oracle, "Do not use final truth positions as goals");
  compare->add_option("--out", cmp_out, "Output directory")->capture_default_str();
  cmp_cfg.attach(compare);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Clustering timelines over a lambda1 grid (lambda2 = 1 - lambda1)");
  std::string sw_scene, sw_goals, sw_grid = "0,0.5,0.7,1", sw_stride = "1", sw_out = ".";
  double sw_dt = 0.1;
  bool sw_no_oracle = false;
  ConfigArgs sw_cfg;
  sweep->add_option("scene", sw_scene, "Scene CSV")->required();
  sweep->add_option("--goals", sw_goals, "Goals CSV (default: <scene>.goals.csv when present)");
  sweep->add_option("--lambda-grid", sw_grid, "Comma-separated lambda1 values in [0, 1]")->capture_default_str();
  sweep->add_option("--stride", sw_stride, "Observe every N-th frame, or 'none'")->capture_default_str();
  sweep->add_option("--frame-dt", sw_dt, "Time between consecutive frames [s]")->capture_default_str();
  sweep->add_flag("--no-oracle-goals", sw_no_oracle, "Do not use final truth positions as goals");
  sweep->add_option("--out", sw_out, "Output directory")->capture_default_str();
  sw_cfg.attach(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const int nthreads = threads > 0 ? threads : default_threads();

    if (convert->parsed()) {
      ConvertStats st;
      const auto scenes = convert_trajnet(fs::path(conv_in), conv_dt, &st);
      fs::create_directories(conv_out);
      for (const auto& s : scenes) write_scene_csv(fs::path(conv_out) / (s.scene_id + ".csv"), s);
      std::cout << "scenes: " << st.scenes << '\n';
      if (st.skipped_records) std::cout << "skipped records: " << st.skipped_records << '\n';
      return 0;
    }

    if (synth->parsed()) {
      SynthSpec spec;
      if (!synth_spec_path.empty()) {
        std::ifstream in(synth_spec_path);
        if (!in) throw UsageError("cannot open spec " + synth_spec_path);
        nlohmann::json j;
        in >> j;
        spec = synth_spec_from_json(j);
      } else if (!synth_preset.empty()) {
        try {
          spec = preset_spec(synth_preset, synth_seed);
        } catch (const std::invalid_argument& e) {
          throw UsageError(e.what());
        }
      } else {
        throw UsageError("synth needs --spec or --preset");
      }
      const Config cfg = synth_cfg.build();
      const Scene scene = synth_scene(spec, cfg);
      fs::create_directories(synth_out);
      write_scene_csv(fs::path(synth_out) / (scene.scene_id + ".csv"), scene);
      write_goals_csv(fs::path(synth_out) / (scene.scene_id + ".goals.csv"), scene.goals);
      std::cout << "scene: " << scene.scene_id << "\nframes: " << scene.frames.size()
                << "\nagents: " << scene.agent_ids().size() << '\n';
      return 0;
    }

    if (predict->parsed()) {
      const auto stride = parse_stride(pred_stride);
      const Config cfg = pred_cfg.build();
      Scene scene = read_scene_csv(fs::path(pred_scene), pred_dt);
      attach_goals(scene, pred_scene, pred_goals);
      RunOptions ro;
      ro.observation_stride = stride;
      ro.oracle_goals = !pred_no_oracle;
      const PredictionRun pr = run(scene, cfg, ro);
      write_run_artifacts(pred_out, pr, cfg, ArtifactOptions{pred_grid});
      std::cout << "steps: " << pr.snapshots.size() << '\n';
      print_summary(std::cout, evaluate_run(pr, scene));
      return 0;
    }

    if (evalc->parsed()) {
      const Scene scene = read_scene_csv(fs::path(ev_scene), ev_dt);
      PredictionRun pr;
      pr.trajectories = read_trajectories(fs::path(ev_run) / "trajectories.csv");
      const auto m = evaluate_run(pr, scene);
      print_summary(std::cout, m);
      if (!ev_out.empty()) {
        fs::create_directories(ev_out);
        std::ostringstream os;
        write_metrics_csv(os, m);
        write_text(fs::path(ev_out) / "metrics.csv", os.str());
      }
      return 0;
    }

    if (compare->parsed()) {
      CompareOptions co;
      co.observation_stride = parse_stride(cmp_stride);
      co.repeats = cmp_repeats;
      co.oracle_goals = !cmp_no_oracle;
      co.threads = nthreads;
      const Config cfg = cmp_cfg.build();
      std::vector<Scene> scenes;
      for (const auto& p : cmp_scenes) {
        scenes.push_back(read_scene_csv(fs::path(p), cmp_dt));
        attach_goals(scenes.back(), p, "");
      }
      const auto rows = compare_cd_ed(scenes, cfg, co);
      fs::create_directories(cmp_out);
      std::ostringstream csv, txt;
      write_comparison_csv(csv, rows);
      write_comparison_text(txt, rows);
      write_text(fs::path(cmp_out) / "comparison.csv", csv.str());
      write_text(fs::path(cmp_out) / "comparison.txt", txt.str());
      std::cout << txt.str();
      return 0;
    }

    if (sweep->parsed()) {
      const auto grid = parse_grid(sw_grid);
      RunOptions ro;
      ro.observation_stride = parse_stride(sw_stride);
      ro.oracle_goals = !sw_no_oracle;
      const Config cfg = sw_cfg.build();
      Scene scene = read_scene_csv(fs::path(sw_scene), sw_dt);
      attach_goals(scene, sw_scene, sw_goals);
      const auto timelines = lambda_sweep(scene, grid, cfg, ro, nthreads);
      fs::create_directories(sw_out);
      for (const auto& t : timelines) {
        std::ostringstream os;
        write_timeline_csv(os, t);
        const std::string name = "timeline_lambda1_" + format_double(t.lambda1) + ".csv";
        write_text(fs::path(sw_out) / name, os.str());
        std::cout << name << ": ADE " << format_double(t.metrics.ade_mean) << " FDE "
                  << format_double(t.metrics.fde_mean) << '\n';
      }
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
