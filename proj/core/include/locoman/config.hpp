#pragma once

#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "locoman/scenario.hpp"
#include "locoman/sweep.hpp"

namespace locoman {

/// Bad file, bad value or unknown key. The message names the source and the key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything one scenario file can describe.
struct ScenarioFile {
  ScenarioConfig scenario;
  std::vector<ControllerKind> compare_kinds;  // [compare] kinds
  std::optional<PoseSweep> sweep;             // [sweep]
};

/// INI text: `[section]` headers and `key = value` lines, `;` or `#` comments.
/// Sections: scenario, task, object, gait, pose, mpc, planner, robot, compare,
/// sweep. Vectors are whitespace or comma separated. Each override is
/// `key=value`; a key without a dot belongs to [scenario], `pose.w_height`
/// to [pose]. The result is validated.
ScenarioFile parse_scenario_file(std::istream& in, const std::string& source,
                                 const std::vector<std::string>& overrides = {});

/// Reads `path`; a missing or unreadable file is a ConfigError naming it.
ScenarioFile load_scenario_file(const std::string& path, const std::vector<std::string>& overrides = {});

}  // namespace locoman
