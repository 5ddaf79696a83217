#include "swarm/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

namespace swarm {

bool Cluster::contains(AgentId a) const { return std::binary_search(members.begin(), members.end(), a); }

const Cluster* ClusterSet::cluster_of(AgentId a) const {
  for (const auto& c : clusters)
    if (c.contains(a)) return &c;
  return nullptr;
}

std::vector<std::vector<AgentId>> ClusterSet::partition() const {
  std::vector<std::vector<AgentId>> out;
  out.reserve(clusters.size());
  for (const auto& c : clusters) {
    auto m = c.members;
    std::sort(m.begin(), m.end());
    out.push_back(std::move(m));
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool ClusterSet::is_partition() const {
  std::set<AgentId> seen;
  for (const auto& c : clusters) {
    if (c.members.empty()) return false;
    for (AgentId a : c.members) {
      if (!agent_states.count(a)) return false;
      if (!seen.insert(a).second) return false;
    }
  }
  return seen.size() == agent_states.size();
}

const std::vector<ConfigField>& config_fields() {
  static const std::vector<ConfigField> fields = {
      {"K_p", "1/s^2", "position gain of the goal-seeking controller (negative)", &Config::K_p},
      {"K_v", "1/s", "velocity gain of the goal-seeking controller (negative)", &Config::K_v},
      {"A_int", "m/s^2", "social repulsion strength", &Config::A_int},
      {"B_int", "m", "social repulsion length scale", &Config::B_int},
      {"d_tol", "m", "clustering distance threshold", &Config::d_tol},
      {"c_tol", "cost", "clustering cost threshold", &Config::c_tol},
      {"d_int_tol", "m", "interaction-zone radius", &Config::d_int_tol},
      {"lambda1", "-", "weight of the agent-to-agent transfer cost", &Config::lambda1},
      {"lambda2", "-", "weight of the agent-to-goal cost", &Config::lambda2},
      {"T_f_cost", "s", "horizon of the cost metric", &Config::T_f_cost},
      {"dt", "s", "dynamics integration step", &Config::dt},
      {"sigma_p", "m^2", "singleton position variance", &Config::sigma_p},
      {"sigma_v", "(m/s)^2", "singleton velocity variance", &Config::sigma_v},
      {"ukf_alpha", "-", "sigma point spread", &Config::ukf_alpha},
      {"ukf_beta", "-", "sigma point prior-distribution parameter", &Config::ukf_beta},
      {"ukf_kappa", "-", "secondary sigma point scaling", &Config::ukf_kappa},
      {"meas_noise_std", "m", "position measurement noise standard deviation", &Config::meas_noise_std},
      {"proc_noise_std", "m", "position process noise standard deviation per filter step", &Config::proc_noise_std},
      {"proc_noise_std_v", "m/s", "velocity process noise standard deviation per filter step",
       &Config::proc_noise_std_v},
      {"radius_default", "m", "agent radius", &Config::radius_default},
      {"deletion_grace", "steps", "observation steps an agent may be missed before deletion",
       &Config::deletion_grace},
      {"seed", "-", "measurement-noise RNG seed", &Config::seed},
      {"linkage_positions_only", "bool", "farthest-pair linkage on positions instead of full states",
       &Config::linkage_positions_only},
      {"scale_cluster_meas_noise", "bool", "divide cluster measurement noise by observed member count",
       &Config::scale_cluster_meas_noise},
  };
  return fields;
}

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

Config validate_config(const Config& cfg) {
  for (const auto& f : config_fields()) {
    if (auto* d = std::get_if<double Config::*>(&f.member)) {
      // c_tol and d_tol may legitimately be +inf (gate disabled).
      require(!std::isnan(cfg.*(*d)), std::string(f.name) + " must not be NaN");
    }
  }
  require(cfg.dt > 0, "dt must be positive");
  require(std::isfinite(cfg.dt), "dt must be finite");
  require(cfg.T_f_cost > 0 && std::isfinite(cfg.T_f_cost), "T_f_cost must be positive");
  require(cfg.d_tol > 0, "d_tol must be positive");
  require(cfg.c_tol > 0, "c_tol must be positive");
  require(cfg.sigma_p > 0, "sigma_p must be positive");
  require(cfg.sigma_v > 0, "sigma_v must be positive");
  require(cfg.lambda1 >= 0, "lambda1 must be non-negative");
  require(cfg.lambda2 >= 0, "lambda2 must be non-negative");
  require(cfg.lambda1 + cfg.lambda2 > 0, "lambda1 + lambda2 must be positive");
  require(cfg.K_p < 0, "K_p must be negative for stable goal seeking");
  require(cfg.K_v < 0, "K_v must be negative for stable goal seeking");
  require(cfg.A_int >= 0, "A_int must be non-negative");
  require(cfg.B_int > 0, "B_int must be positive");
  require(cfg.d_int_tol >= 0, "d_int_tol must be non-negative");
  require(cfg.ukf_alpha > 0, "ukf_alpha must be positive");
  require(4.0 + cfg.ukf_kappa > 0, "ukf_kappa must exceed -4");
  require(cfg.meas_noise_std > 0, "meas_noise_std must be positive");
  require(cfg.proc_noise_std >= 0, "proc_noise_std must be non-negative");
  require(cfg.proc_noise_std_v >= 0, "proc_noise_std_v must be non-negative");
  require(cfg.radius_default > 0, "radius_default must be positive");
  require(cfg.deletion_grace >= 0, "deletion_grace must be non-negative");
  return cfg;
}

Config config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  Config cfg;
  for (const auto& [key, value] : j.items()) {
    const auto& fields = config_fields();
    auto it = std::find_if(fields.begin(), fields.end(), [&](const ConfigField& f) { return f.name == key; });
    if (it == fields.end()) throw ConfigError("unknown config key: " + key);
    try {
      std::visit(
          [&](auto member) {
            using T = std::remove_reference_t<decltype(cfg.*member)>;
            if constexpr (std::is_same_v<T, bool>) {
              if (!value.is_boolean()) throw ConfigError(key + " must be a boolean");
            } else if constexpr (std::is_integral_v<T>) {
              if (!value.is_number_integer()) throw ConfigError(key + " must be an integer");
            } else {
              if (!value.is_number()) throw ConfigError(key + " must be a number");
            }
            cfg.*member = value.get<T>();
          },
          it->member);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(key + ": " + e.what());
    }
  }
  return cfg;
}

nlohmann::json config_to_json(const Config& cfg) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& f : config_fields())
    std::visit([&](auto member) { j[std::string(f.name)] = cfg.*member; }, f.member);
  return j;
}

void set_config_field(Config& cfg, std::string_view name, std::string_view value) {
  const auto& fields = config_fields();
  auto it = std::find_if(fields.begin(), fields.end(), [&](const ConfigField& f) { return f.name == name; });
  if (it == fields.end()) throw ConfigError("unknown config key: " + std::string(name));
  const std::string err = "invalid value for " + std::string(name) + ": " + std::string(value);
  std::visit(
      [&](auto member) {
        using T = std::remove_reference_t<decltype(cfg.*member)>;
        if constexpr (std::is_same_v<T, bool>) {
          if (value == "true" || value == "1")
            cfg.*member = true;
          else if (value == "false" || value == "0")
            cfg.*member = false;
          else
            throw ConfigError(err);
        } else {
          T parsed{};
          auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), parsed);
          if (ec != std::errc() || ptr != value.data() + value.size()) throw ConfigError(err);
          cfg.*member = parsed;
        }
      },
      it->member);
}

Mat4 singleton_covariance(const Config& cfg) {
  return Vec4(cfg.sigma_p, cfg.sigma_p, cfg.sigma_v, cfg.sigma_v).asDiagonal();
}

AgentState mean_state(const std::vector<AgentId>& members, const StateMap& states) {
  if (members.empty()) throw std::invalid_argument("mean of an empty member set");
  Vec4 acc = Vec4::Zero();
  for (AgentId a : members) acc += states.at(a).vector();
  return AgentState::from_vector(acc / static_cast<double>(members.size()));
}

Mat4 sample_covariance(const std::vector<AgentId>& members, const StateMap& states, const AgentState& mean) {
  if (members.size() < 2) return Mat4::Zero();
  Mat4 acc = Mat4::Zero();
  const Vec4 mu = mean.vector();
  for (AgentId a : members) {
    const Vec4 d = states.at(a).vector() - mu;
    acc += d * d.transpose();
  }
  acc /= static_cast<double>(members.size() - 1);
  return 0.5 * (acc + acc.transpose());
}

Goal centroid_goal(const std::vector<AgentId>& members, const GoalMap& goals) {
  if (members.empty()) throw std::invalid_argument("goal centroid of an empty member set");
  Goal g;
  for (AgentId a : members) {
    const Goal& m = goals.at(a);
    g.p += m.p;
    g.v += m.v;
  }
  g.p /= static_cast<double>(members.size());
  g.v /= static_cast<double>(members.size());
  return g;
}

Cluster make_cluster(ClusterId id, std::vector<AgentId> members, const StateMap& states, const GoalMap& goals,
                     const Config& cfg) {
  std::sort(members.begin(), members.end());
  Cluster c;
  c.id = id;
  c.members = std::move(members);
  c.mean = mean_state(c.members, states);
  c.cov = singleton_covariance(cfg);
  if (c.members.size() > 1) c.cov += sample_covariance(c.members, states, c.mean);
  c.goal = centroid_goal(c.members, goals);
  return c;
}

bool is_symmetric(const Eigen::MatrixXd& m, double tol) {
  return m.rows() == m.cols() && (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

bool is_psd(const Eigen::MatrixXd& m, double tol) {
  if (!is_symmetric(m, std::max(tol, 1e-9))) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.info() == Eigen::Success && es.eigenvalues().minCoeff() >= -tol;
}

// ---- JSON ----

namespace {

template <int N>
nlohmann::json vec_json(const Eigen::Matrix<double, N, 1>& v) {
  nlohmann::json a = nlohmann::json::array();
  for (int i = 0; i < N; ++i) a.push_back(v[i]);
  return a;
}

template <int N>
Eigen::Matrix<double, N, 1> json_vec(const nlohmann::json& a) {
  if (!a.is_array() || a.size() != static_cast<std::size_t>(N))
    throw std::invalid_argument("expected array of " + std::to_string(N) + " numbers");
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) v[i] = a.at(i).get<double>();
  return v;
}

}  // namespace

void to_json(nlohmann::json& j, const AgentState& s) { j = {{"p", vec_json<2>(s.p)}, {"v", vec_json<2>(s.v)}}; }

void from_json(const nlohmann::json& j, AgentState& s) {
  s.p = json_vec<2>(j.at("p"));
  s.v = json_vec<2>(j.at("v"));
}

void to_json(nlohmann::json& j, const Goal& g) { j = {{"p", vec_json<2>(g.p)}, {"v", vec_json<2>(g.v)}}; }

void from_json(const nlohmann::json& j, Goal& g) {
  g.p = json_vec<2>(j.at("p"));
  g.v = json_vec<2>(j.at("v"));
}

void to_json(nlohmann::json& j, const Cluster& c) {
  nlohmann::json cov = nlohmann::json::array();
  for (int r = 0; r < 4; ++r)
    for (int k = 0; k < 4; ++k) cov.push_back(c.cov(r, k));
  j = {{"id", c.id}, {"members", c.members}, {"mean", c.mean}, {"cov", cov}, {"goal", c.goal}};
}

void from_json(const nlohmann::json& j, Cluster& c) {
  c.id = j.at("id").get<ClusterId>();
  c.members = j.at("members").get<std::vector<AgentId>>();
  c.mean = j.at("mean").get<AgentState>();
  const auto& cov = j.at("cov");
  if (!cov.is_array() || cov.size() != 16) throw std::invalid_argument("cluster cov must have 16 entries");
  for (int r = 0; r < 4; ++r)
    for (int k = 0; k < 4; ++k) c.cov(r, k) = cov.at(r * 4 + k).get<double>();
  c.goal = j.at("goal").get<Goal>();
}

void to_json(nlohmann::json& j, const ClusterSet& cs) {
  nlohmann::json agents = nlohmann::json::array();
  for (const auto& [id, s] : cs.agent_states) agents.push_back({{"id", id}, {"state", s}});
  nlohmann::json missed = nlohmann::json::array();
  for (const auto& [id, n] : cs.missed) missed.push_back({id, n});
  j = {{"clusters", cs.clusters}, {"agents", agents}, {"missed", missed}, {"next_id", cs.next_id}};
}

void from_json(const nlohmann::json& j, ClusterSet& cs) {
  cs.clusters = j.at("clusters").get<std::vector<Cluster>>();
  cs.agent_states.clear();
  for (const auto& a : j.at("agents")) cs.agent_states[a.at("id").get<AgentId>()] = a.at("state").get<AgentState>();
  cs.missed.clear();
  if (j.contains("missed"))
    for (const auto& m : j.at("missed")) cs.missed[m.at(0).get<AgentId>()] = m.at(1).get<int>();
  cs.next_id = j.at("next_id").get<ClusterId>();
}

}  // namespace swarm
