#include "locoman/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace locoman {

namespace {

namespace pt = boost::property_tree;

// Typed access to the tree that remembers which keys were read, so leftovers
// can be reported as unknown.
class Reader {
 public:
  Reader(const pt::ptree& tree, std::string source) : tree_(tree), source_(std::move(source)) {}

  std::optional<std::string> raw(const std::string& path) {
    used_.insert(path);
    const auto v = tree_.get_optional<std::string>(pt::ptree::path_type(path, '.'));
    if (!v) return std::nullopt;
    return trim(*v);
  }

  void number(const std::string& path, double& out) {
    if (const auto s = raw(path)) out = parse_number(path, *s);
  }

  void integer(const std::string& path, int& out) {
    if (const auto s = raw(path)) {
      const double v = parse_number(path, *s);
      if (v != static_cast<double>(static_cast<int>(v))) fail(path, "'" + *s + "' is not an integer");
      out = static_cast<int>(v);
    }
  }

  void boolean(const std::string& path, bool& out) {
    if (const auto s = raw(path)) {
      if (*s == "true" || *s == "1" || *s == "yes") out = true;
      else if (*s == "false" || *s == "0" || *s == "no") out = false;
      else fail(path, "'" + *s + "' is not a boolean");
    }
  }

  std::optional<std::vector<double>> list(const std::string& path) {
    const auto s = raw(path);
    if (!s) return std::nullopt;
    std::string text = *s;
    for (char& c : text)
      if (c == ',') c = ' ';
    std::istringstream in(text);
    std::vector<double> out;
    std::string item;
    while (in >> item) out.push_back(parse_number(path, item));
    return out;
  }

  template <int N>
  void fixed(const std::string& path, Eigen::Matrix<double, N, 1>& out) {
    if (const auto v = list(path)) {
      if (static_cast<int>(v->size()) != N)
        fail(path, "expected " + std::to_string(N) + " values, got " + std::to_string(v->size()));
      for (int i = 0; i < N; ++i) out(i) = (*v)[static_cast<std::size_t>(i)];
    }
  }

  [[noreturn]] void fail(const std::string& path, const std::string& what) const {
    throw ConfigError(source_ + ": " + path + ": " + what);
  }

  void reject_unknown() const {
    for (const auto& [section, keys] : tree_) {
      if (keys.empty() && !keys.data().empty())
        throw ConfigError(source_ + ": key '" + section + "' is outside any section");
      for (const auto& kv : keys) {
        const std::string path = section + "." + kv.first;
        if (!used_.count(path)) throw ConfigError(source_ + ": unknown key '" + path + "'");
      }
    }
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  double parse_number(const std::string& path, const std::string& s) const {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (!s.empty() && *first == '+') ++first;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) fail(path, "'" + s + "' is not a number");
    return v;
  }

  const pt::ptree& tree_;
  std::string source_;
  std::set<std::string> used_;
};

template <typename Fn>
auto parse_enum(Reader& r, const std::string& path, Fn parse) -> std::optional<decltype(parse(std::string()))> {
  const auto s = r.raw(path);
  if (!s) return std::nullopt;
  try {
    return parse(*s);
  } catch (const std::invalid_argument& e) {
    r.fail(path, e.what());
  }
}

void read_scenario(Reader& r, ScenarioConfig& c) {
  if (const auto s = r.raw("scenario.name")) c.name = *s;
  r.number("scenario.duration", c.duration);
  if (const auto s = r.raw("scenario.seed")) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(s->data(), s->data() + s->size(), v);
    if (res.ec != std::errc() || res.ptr != s->data() + s->size())
      r.fail("scenario.seed", "'" + *s + "' is not a non-negative integer");
    c.seed = v;
  }
  if (const auto k = parse_enum(r, "scenario.controller_kind", parse_controller_kind)) c.controller_kind = *k;
  r.number("scenario.initial_noise", c.initial_noise);
  r.number("scenario.stand_height", c.stand_height);
  r.number("scenario.start_x", c.start_xy.x());
  r.number("scenario.start_y", c.start_xy.y());
  r.number("scenario.start_yaw", c.start_yaw);
  r.number("scenario.q_arm0", c.q_arm0);
  r.number("scenario.front_foot_shift", c.front_foot_shift);
  r.number("scenario.rear_foot_shift", c.rear_foot_shift);
  r.fixed<3>("scenario.vel_cmd", c.vel_cmd);
  r.number("scenario.swing_height", c.swing_height);
  r.number("scenario.raibert_gain", c.raibert_gain);
  r.number("scenario.physics_dt", c.physics_dt);
  r.number("scenario.control_rate", c.control_rate);
  r.number("scenario.tip_limit", c.tip_limit);
}

void read_robot(Reader& r, RobotModel& m) {
  r.number("robot.mass", m.mass);
  r.number("robot.mu", m.mu);
  r.number("robot.fz_max", m.fz_bounds.max);
  r.number("robot.gravity", m.gravity);
  r.number("robot.arm_length", m.arm_length);
}

void read_task(Reader& r, ScenarioConfig& c) {
  const auto kind = r.raw("task.kind");
  TaskCommand t;
  r.number("task.target", t.target);
  r.number("task.duration", t.duration);
  r.boolean("task.hold", t.hold);
  r.number("task.handle_duration", t.handle_duration);

  double mass = 3.0;
  bool planar = false;
  double handle_lump = 0.5, door_lump = 20.0, spring = 2.0, friction = 5.0;
  r.number("object.mass", mass);
  r.boolean("object.planar", planar);
  r.number("object.handle_lump", handle_lump);
  r.number("object.door_lump", door_lump);
  r.number("object.handle_spring", spring);
  r.number("object.hinge_friction", friction);
  DoorGeometry door;
  r.number("object.frame_x", door.frame_x);
  r.number("object.hinge_y", door.hinge_y);
  r.number("object.width", door.width);
  r.number("object.grip_distance", door.grip_distance);
  r.number("object.grip_height", door.grip_height);
  r.number("object.handle_length", door.handle_length);
  r.number("object.handle_release", door.handle_release);
  r.number("object.body_radius", door.body_radius);
  r.number("object.clearance_margin", door.clearance_margin);

  if (!kind || *kind == "none") {
    c.task.reset();
    return;
  }
  try {
    t.kind = parse_task_kind(*kind);
  } catch (const std::invalid_argument& e) {
    r.fail("task.kind", e.what());
  }
  c.task = t;
  if (t.kind == TaskKind::Lift) {
    c.object = ObjectModel::lift(mass, c.robot.gravity, planar);
  } else {
    c.object = ObjectModel::door_open(handle_lump, door_lump, spring, friction);
    c.object.door = door;
  }
}

void read_gait(Reader& r, GaitSchedule& g) {
  if (const auto p = parse_enum(r, "gait.pattern", parse_gait_pattern)) {
    if (*p == GaitPattern::Trot) g = GaitSchedule::trot();
    else g = GaitSchedule::stand();
  }
  r.number("gait.period", g.period);
  r.number("gait.duty", g.duty);
  Eigen::Vector4d offsets(g.phase_offsets[0], g.phase_offsets[1], g.phase_offsets[2], g.phase_offsets[3]);
  r.fixed<4>("gait.offsets", offsets);
  for (std::size_t i = 0; i < kNumLegs; ++i) g.phase_offsets[i] = offsets(static_cast<int>(i));
}

void read_pose(Reader& r, PoseWeights& w) {
  r.number("pose.w_height", w.w_height);
  r.fixed<3>("pose.w_euler", w.w_euler);
  r.number("pose.w_torque", w.w_torque);
  r.number("pose.w_reg_xy", w.w_reg_xy);
}

void read_mpc(Reader& r, MpcConfig& m) {
  r.integer("mpc.horizon_N", m.horizon_N);
  r.number("mpc.horizon_T", m.horizon_T);
  r.fixed<kStateDim>("mpc.state_weights", m.state_weights);
  double input_weight = -1.0;
  r.number("mpc.input_weight", input_weight);
  if (input_weight >= 0.0) m.input_weights.setConstant(input_weight);
  r.number("mpc.qp_tolerance", m.qp.tol);
  r.integer("mpc.qp_max_iter", m.qp.max_iter);
}

void read_planner(Reader& r, PlannerSettings& p) {
  r.number("planner.tracking_weight", p.tracking_weight);
  r.number("planner.force_weight", p.force_weight);
  r.number("planner.position_gain", p.position_gain);
  r.number("planner.lift_force_max", p.lift_force_max);
  r.number("planner.handle_torque_max", p.handle_torque_max);
  r.number("planner.push_force_max", p.push_force_max);
}

void read_compare(Reader& r, std::vector<ControllerKind>& kinds) {
  const auto s = r.raw("compare.kinds");
  if (!s) return;
  std::string text = *s;
  for (char& ch : text)
    if (ch == ',') ch = ' ';
  std::istringstream in(text);
  std::string item;
  while (in >> item) {
    try {
      kinds.push_back(parse_controller_kind(item));
    } catch (const std::invalid_argument& e) {
      r.fail("compare.kinds", e.what());
    }
  }
}

std::optional<PoseSweep> read_sweep(Reader& r, const ScenarioConfig& c) {
  const auto key = r.raw("sweep.key");
  const auto values = r.list("sweep.values");
  PoseSweep s;
  s.base = c.pose_weights;
  s.target.ref_height = c.stand_height;
  s.target.anchor_xy = c.start_xy;
  s.target.ref_yaw = c.start_yaw;
  r.fixed<3>("sweep.grip", s.target.grip);
  double mass = 0.0;
  r.number("sweep.object_mass", mass);
  s.target.force = Vec3(0.0, 0.0, mass * c.robot.gravity);
  r.fixed<3>("sweep.force", s.target.force);
  r.number("sweep.ref_height", s.target.ref_height);
  if (!key && !values) return std::nullopt;
  if (!key) r.fail("sweep.key", "missing");
  s.key = *key;
  if (values) s.values = *values;
  return s;
}

}  // namespace

ScenarioFile parse_scenario_file(std::istream& in, const std::string& source, const std::vector<std::string>& overrides) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(source + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  for (const std::string& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + o + "' is not key=value");
    std::string key = o.substr(0, eq);
    if (key.find('.') == std::string::npos) key = "scenario." + key;
    if (key.find('.') != key.rfind('.')) throw ConfigError("override key '" + key + "' has more than one dot");
    tree.put(pt::ptree::path_type(key, '.'), o.substr(eq + 1));
  }

  Reader r(tree, source);
  ScenarioFile f;
  ScenarioConfig& c = f.scenario;
  read_robot(r, c.robot);
  read_scenario(r, c);
  read_task(r, c);
  read_gait(r, c.gait);
  read_pose(r, c.pose_weights);
  read_mpc(r, c.mpc);
  read_planner(r, c.planner);
  read_compare(r, f.compare_kinds);
  f.sweep = read_sweep(r, c);
  r.reject_unknown();

  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return f;
}

ScenarioFile load_scenario_file(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_scenario_file(in, path, overrides);
}

}  // namespace locoman
