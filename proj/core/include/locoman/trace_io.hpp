#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "locoman/scenario.hpp"

namespace locoman {

/// Shortest text that reads back to the same double; "nan", "inf", "-inf"
/// for non-finite values.
std::string format_number(double v);

/// Column names of the per-tick trace for an object with `object_dim` states
/// (0 without an object):
///   time, x_* (13 state entries), ref_* (13), u_* (15), q_arm, q_arm_ref,
///   obj_pos_i, obj_vel_i, stance_0..3, planner_degraded, pose_degraded, mpc_degraded.
std::vector<std::string> trace_header(int object_dim);

/// Writes the header and one line per row. Throws std::invalid_argument if the
/// rows disagree on the object layout.
void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows);

/// `key = value` lines: scenario identity followed by every RunMetrics field.
void write_summary(std::ostream& out, const ScenarioConfig& config, const RunMetrics& metrics);

}  // namespace locoman
