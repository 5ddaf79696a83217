#pragma once

// Core domain types shared by every module: agent and goal states, clusters,
// cluster sets and the run configuration.

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace swarm {

using Vec2 = Eigen::Vector2d;
using Vec4 = Eigen::Matrix<double, 4, 1>;
using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;

using AgentId = int;
using ClusterId = int;

struct AgentState {
  Vec2 p = Vec2::Zero();
  Vec2 v = Vec2::Zero();

  AgentState() = default;
  AgentState(Vec2 position, Vec2 velocity) : p(std::move(position)), v(std::move(velocity)) {}

  static AgentState from_vector(const Vec4& x) { return {x.head<2>(), x.tail<2>()}; }
  Vec4 vector() const {
    Vec4 x;
    x << p, v;
    return x;
  }
  bool finite() const { return p.allFinite() && v.allFinite(); }

  friend bool operator==(const AgentState& a, const AgentState& b) { return a.p == b.p && a.v == b.v; }
};

// Terminal state an agent steers toward. Zero goal velocity is a soft landing.
struct Goal {
  Vec2 p = Vec2::Zero();
  Vec2 v = Vec2::Zero();

  AgentState as_state() const { return {p, v}; }
  bool finite() const { return p.allFinite() && v.allFinite(); }

  friend bool operator==(const Goal& a, const Goal& b) { return a.p == b.p && a.v == b.v; }
};

using StateMap = std::map<AgentId, AgentState>;
using GoalMap = std::map<AgentId, Goal>;

struct Cluster {
  ClusterId id = -1;
  std::vector<AgentId> members;  // ascending
  AgentState mean;
  Mat4 cov = Mat4::Zero();
  Goal goal;

  std::size_t size() const { return members.size(); }
  bool is_singleton() const { return members.size() == 1; }
  bool contains(AgentId a) const;
};

// A partition of the live agents into clusters plus per-agent bookkeeping.
struct ClusterSet {
  std::vector<Cluster> clusters;
  StateMap agent_states;
  // Consecutive observation steps at which a live agent had no measurement.
  std::map<AgentId, int> missed;
  ClusterId next_id = 0;

  const Cluster* cluster_of(AgentId a) const;
  // Member lists of every cluster, each sorted, ordered by smallest member.
  std::vector<std::vector<AgentId>> partition() const;
  bool is_partition() const;
  std::size_t agent_count() const { return agent_states.size(); }
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Config {
  double K_p = -1.0;            // 1/s^2
  double K_v = -2.0;            // 1/s
  double A_int = 5.0;           // m/s^2
  double B_int = 0.5;           // m
  double d_tol = 2.0;           // m
  double c_tol = 10.0;          // cost units
  double d_int_tol = 3.0;       // m
  double lambda1 = 0.5;
  double lambda2 = 0.5;
  double T_f_cost = 2.0;        // s
  double dt = 0.1;              // s
  double sigma_p = 0.01;        // m^2
  double sigma_v = 0.01;        // (m/s)^2
  double ukf_alpha = 1.0;
  double ukf_beta = 2.0;
  double ukf_kappa = 0.0;
  double meas_noise_std = 0.05;   // m
  double proc_noise_std = 0.05;   // m, per filter step
  double proc_noise_std_v = 0.1;  // m/s, per filter step
  double radius_default = 0.25;   // m
  int deletion_grace = 2;         // observation steps
  std::uint64_t seed = 0;
  bool linkage_positions_only = false;
  bool scale_cluster_meas_noise = false;
};

// Describes one Config field for serialization and CLI flag generation.
struct ConfigField {
  std::string_view name;
  std::string_view unit;
  std::string_view help;
  std::variant<double Config::*, int Config::*, std::uint64_t Config::*, bool Config::*> member;
};

const std::vector<ConfigField>& config_fields();

// Returns cfg unchanged when every invariant holds; throws ConfigError naming
// the first offending field otherwise.
Config validate_config(const Config& cfg);

// Flat JSON object keyed by Config field names. Unknown keys are rejected.
Config config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const Config& cfg);
// Applies "name=value" to cfg; throws ConfigError on unknown name or bad value.
void set_config_field(Config& cfg, std::string_view name, std::string_view value);

Mat4 singleton_covariance(const Config& cfg);
AgentState mean_state(const std::vector<AgentId>& members, const StateMap& states);
// Unbiased sample covariance of member states about `mean`.
Mat4 sample_covariance(const std::vector<AgentId>& members, const StateMap& states, const AgentState& mean);
Goal centroid_goal(const std::vector<AgentId>& members, const GoalMap& goals);

// Builds a cluster from member states: arithmetic mean, the singleton diagonal
// covariance for one member, otherwise the sample covariance floored by the
// singleton diagonal so the cluster density stays non-degenerate.
Cluster make_cluster(ClusterId id, std::vector<AgentId> members, const StateMap& states, const GoalMap& goals,
                     const Config& cfg);

bool is_symmetric(const Eigen::MatrixXd& m, double tol = 1e-9);
bool is_psd(const Eigen::MatrixXd& m, double tol = 1e-9);

void to_json(nlohmann::json& j, const AgentState& s);
void from_json(const nlohmann::json& j, AgentState& s);
void to_json(nlohmann::json& j, const Goal& g);
void from_json(const nlohmann::json& j, Goal& g);
void to_json(nlohmann::json& j, const Cluster& c);
void from_json(const nlohmann::json& j, Cluster& c);
void to_json(nlohmann::json& j, const ClusterSet& cs);
void from_json(const nlohmann::json& j, ClusterSet& cs);

}  // namespace swarm
