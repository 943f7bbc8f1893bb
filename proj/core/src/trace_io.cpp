#include "locoman/trace_io.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace locoman {

namespace {

const char* const kStateNames[kStateDim] = {"roll", "pitch", "yaw", "px", "py", "pz", "wx",
                                            "wy",   "wz",    "vx",  "vy", "vz", "g"};

int object_dim_of(const std::vector<TraceRow>& rows) {
  if (rows.empty()) return 0;
  return static_cast<int>(rows.front().object_pos.size());
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";  // folds -0 as well
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> trace_header(int object_dim) {
  std::vector<std::string> h{"time"};
  for (const char* n : kStateNames) h.push_back(std::string("x_") + n);
  for (const char* n : kStateNames) h.push_back(std::string("ref_") + n);
  for (int leg = 0; leg < kNumLegs; ++leg)
    for (const char* axis : {"x", "y", "z"}) h.push_back("u_f" + std::to_string(leg) + axis);
  for (const char* axis : {"x", "y", "z"}) h.push_back(std::string("u_fm") + axis);
  h.push_back("q_arm");
  h.push_back("q_arm_ref");
  for (int i = 0; i < object_dim; ++i) h.push_back("obj_pos_" + std::to_string(i));
  for (int i = 0; i < object_dim; ++i) h.push_back("obj_vel_" + std::to_string(i));
  for (int leg = 0; leg < kNumLegs; ++leg) h.push_back("stance_" + std::to_string(leg));
  h.push_back("planner_degraded");
  h.push_back("pose_degraded");
  h.push_back("mpc_degraded");
  return h;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows) {
  const int dim = object_dim_of(rows);
  const std::vector<std::string> header = trace_header(dim);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';

  for (const TraceRow& r : rows) {
    if (r.object_pos.size() != dim || r.object_vel.size() != dim)
      throw std::invalid_argument("write_trace_csv: rows disagree on the object layout");
    std::string line = format_number(r.time);
    auto put = [&line](double v) {
      line += ',';
      line += format_number(v);
    };
    const StateVector x = r.state.to_vector();
    const StateVector ref = r.reference.to_vector();
    const InputVector u = r.input.to_vector();
    for (int i = 0; i < kStateDim; ++i) put(x(i));
    for (int i = 0; i < kStateDim; ++i) put(ref(i));
    for (int i = 0; i < kInputDim; ++i) put(u(i));
    put(r.q_arm);
    put(r.q_arm_ref);
    for (int i = 0; i < dim; ++i) put(r.object_pos(i));
    for (int i = 0; i < dim; ++i) put(r.object_vel(i));
    for (bool s : r.stance) put(s ? 1.0 : 0.0);
    put(r.planner_degraded ? 1.0 : 0.0);
    put(r.pose_degraded ? 1.0 : 0.0);
    put(r.mpc_degraded ? 1.0 : 0.0);
    out << line << '\n';
  }
}

void write_summary(std::ostream& out, const ScenarioConfig& config, const RunMetrics& m) {
  auto kv = [&out](const char* key, const std::string& value) { out << key << " = " << value << '\n'; };
  auto num = [&kv](const char* key, double v) { kv(key, format_number(v)); };
  kv("name", config.name);
  kv("controller_kind", to_string(config.controller_kind));
  kv("task", config.task ? to_string(config.task->kind) : "none");
  kv("gait", to_string(config.gait.pattern));
  kv("seed", std::to_string(config.seed));
  num("duration", config.duration);
  num("com_height_rmse", m.com_height_rmse);
  num("pitch_rmse", m.pitch_rmse);
  num("max_pitch", m.max_pitch);
  num("max_height_error", m.max_height_error);
  kv("fell", m.fell ? "true" : "false");
  kv("aborted", m.aborted ? "true" : "false");
  kv("abort_reason", m.abort_reason);
  kv("ticks", std::to_string(m.ticks));
  kv("planner_failures", std::to_string(m.planner_failures));
  kv("pose_failures", std::to_string(m.pose_failures));
  kv("mpc_failures", std::to_string(m.mpc_failures));
  kv("degraded_ticks", std::to_string(m.degraded_ticks));
  num("object_final", m.object_final);
  num("object_target", m.object_target);
  num("handle_release_time", m.handle_release_time);
  num("target80_time", m.target80_time);
  num("min_pose_clearance", m.min_pose_clearance);
  num("max_push_tangential", m.max_push_tangential);
  num("wall_time", m.wall_time);
}

}  // namespace locoman
