#pragma once

// Named synthetic scenario generators used by the CLI and the test suites.

#include <string_view>
#include <vector>

#include "swarm/io.hpp"

namespace swarm {

// Three agents moving in +x: agent 1 starts beside agent 2 but is bound for a
// far goal, overtakes it and closes on agent 3 which travels ahead at agent 1's
// eventual pace.
SynthSpec overtaking_spec();

// Co-moving groups crossing an opposing group at close lateral range.
SynthSpec opposing_flow_spec(std::uint64_t seed);

// Two to four groups with random boxes, headings and goals.
SynthSpec random_scene_spec(std::uint64_t seed);

// Two agents side by side at rest with goals in opposite directions.
SynthSpec lambda_fixture_spec();

std::vector<std::string_view> preset_names();
// Throws std::invalid_argument on an unknown name.
SynthSpec preset_spec(std::string_view name, std::uint64_t seed);

// Defaults with c_tol = 3. For the lambda fixture the pair cost is
// 0.1875*lambda1 + 6.75*(1 - lambda1), so the pair forms for lambda1 >= 0.7
// and not for lambda1 <= 0.5.
Config lambda_fixture_config();

}  // namespace swarm
