#include "swarm/scene.hpp"

#include <set>

namespace swarm {

std::vector<AgentId> Scene::agent_ids() const {
  std::set<AgentId> ids;
  for (const auto& f : frames)
    for (const auto& [id, o] : f) ids.insert(id);
  return {ids.begin(), ids.end()};
}

std::optional<AgentState> Scene::state_at(std::size_t frame, AgentId id) const {
  if (frame >= frames.size()) return std::nullopt;
  auto it = frames[frame].find(id);
  if (it == frames[frame].end()) return std::nullopt;
  return AgentState{it->second.p, it->second.v.value_or(Vec2::Zero())};
}

std::optional<std::size_t> Scene::last_frame_of(AgentId id) const {
  for (std::size_t k = frames.size(); k-- > 0;)
    if (frames[k].count(id)) return k;
  return std::nullopt;
}

std::optional<std::size_t> Scene::first_frame_of(AgentId id) const {
  for (std::size_t k = 0; k < frames.size(); ++k)
    if (frames[k].count(id)) return k;
  return std::nullopt;
}

void fill_velocities(Scene& scene) {
  const std::size_t n = scene.frames.size();
  for (std::size_t k = 0; k < n; ++k) {
    for (auto& [id, obs] : scene.frames[k]) {
      if (obs.v) continue;
      const Observation* prev = nullptr;
      const Observation* next = nullptr;
      if (k > 0) {
        auto it = scene.frames[k - 1].find(id);
        if (it != scene.frames[k - 1].end()) prev = &it->second;
      }
      if (k + 1 < n) {
        auto it = scene.frames[k + 1].find(id);
        if (it != scene.frames[k + 1].end()) next = &it->second;
      }
      if (prev && next)
        obs.v = (next->p - prev->p) / (2.0 * scene.dt);
      else if (next)
        obs.v = (next->p - obs.p) / scene.dt;
      else if (prev)
        obs.v = (obs.p - prev->p) / scene.dt;
      else
        obs.v = Vec2::Zero();
    }
  }
}

}  // namespace swarm
