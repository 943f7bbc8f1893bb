#include <doctest.h>

#include <sstream>

#include "locoman/config.hpp"

using namespace locoman;

namespace {

ScenarioFile parse(const std::string& text, const std::vector<std::string>& overrides = {}) {
  std::istringstream in(text);
  return parse_scenario_file(in, "test.cfg", overrides);
}

}  // namespace

TEST_CASE("an empty file gives the defaults") {
  const ScenarioFile f = parse("");
  const ScenarioConfig d;
  CHECK(f.scenario.duration == d.duration);
  CHECK(f.scenario.controller_kind == ControllerKind::Full);
  CHECK_FALSE(f.scenario.task.has_value());
  CHECK(f.compare_kinds.empty());
  CHECK_FALSE(f.sweep.has_value());
}

TEST_CASE("sections fill the scenario") {
  const ScenarioFile f = parse(R"(
[scenario]
name = lift
duration = 3.5
seed = 9
controller_kind = FixedForce
start_x = 0.25
vel_cmd = 0.1, 0, 0
[task]
kind = Lift
target = 0.2
duration = 0.5
[object]
mass = 10
[gait]
pattern = Trot
period = 0.4
[mpc]
horizon_N = 8
state_weights = 1 2 3 4 5 6 7 8 9 10 11 12 0
[compare]
kinds = Full, FixedForce
)");
  const ScenarioConfig& c = f.scenario;
  CHECK(c.name == "lift");
  CHECK(c.duration == 3.5);
  CHECK(c.seed == 9);
  CHECK(c.controller_kind == ControllerKind::FixedForce);
  CHECK(c.start_xy.x() == 0.25);
  CHECK(c.vel_cmd.x() == 0.1);
  REQUIRE(c.task.has_value());
  CHECK(c.task->kind == TaskKind::Lift);
  CHECK(c.task->duration == 0.5);
  CHECK(c.object.lift_mass() == doctest::Approx(10.0));
  CHECK(c.gait.pattern == GaitPattern::Trot);
  CHECK(c.gait.period == 0.4);
  CHECK(c.mpc.horizon_N == 8);
  CHECK(c.mpc.state_weights(5) == 6.0);
  REQUIRE(f.compare_kinds.size() == 2);
  CHECK(f.compare_kinds[1] == ControllerKind::FixedForce);
}

TEST_CASE("overrides beat the file; bare keys mean [scenario]") {
  const ScenarioFile f = parse("[scenario]\nduration = 3\n[pose]\nw_torque = 1\n",
                               {"duration=4", "pose.w_torque=0.5", "seed=3", "start_x=+0.1"});
  CHECK(f.scenario.duration == 4.0);
  CHECK(f.scenario.pose_weights.w_torque == 0.5);
  CHECK(f.scenario.seed == 3);
  CHECK(f.scenario.start_xy.x() == 0.1);
}

TEST_CASE("bad input is a ConfigError") {
  CHECK_THROWS_AS(parse("[scenario]\ndurration = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse("[bogus]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse("[scenario]\nduration = three\n"), ConfigError);
  CHECK_THROWS_AS(parse("[scenario]\nduration = -1\n"), ConfigError);
  CHECK_THROWS_AS(parse("[scenario]\ncontroller_kind = Magic\n"), ConfigError);
  CHECK_THROWS_AS(parse("[mpc]\nstate_weights = 1 2 3\n"), ConfigError);
  CHECK_THROWS_AS(parse("", {"noequals"}), ConfigError);
  CHECK_THROWS_AS(parse("", {"a.b.c=1"}), ConfigError);
  CHECK_THROWS_AS(load_scenario_file("/nonexistent/file.cfg"), ConfigError);
}

TEST_CASE("the error names the offending key") {
  try {
    parse("[gait]\nduty = 2x\n");
    FAIL("no throw");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("gait.duty") != std::string::npos);
  }
}

TEST_CASE("sweep section") {
  const ScenarioFile f = parse("[sweep]\nkey = w_height\nvalues = 1e3, 1e1 1e-1\ngrip = 0.8 0 0.55\nobject_mass = 10\n");
  REQUIRE(f.sweep.has_value());
  CHECK(f.sweep->key == "w_height");
  REQUIRE(f.sweep->values.size() == 3);
  CHECK(f.sweep->values[2] == 0.1);
  CHECK(f.sweep->target.grip.x() == 0.8);
  CHECK(f.sweep->target.force.z() == doctest::Approx(10.0 * f.scenario.robot.gravity));
  CHECK_THROWS_AS(parse("[sweep]\nvalues = 1 2\n"), ConfigError);
}

TEST_CASE("shipped configs parse") {
  for (const char* name : {"stand", "lift3kg", "lift8kg", "lift10kg_2", "lift10kg_0.5", "lift10kg_0.25", "door",
                           "sweep_height", "sweep_euler"}) {
    CAPTURE(name);
    CHECK_NOTHROW(load_scenario_file(std::string(LOCOMAN_CONFIG_DIR) + "/" + name + ".cfg"));
  }
}
