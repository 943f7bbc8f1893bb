#pragma once

#include <array>
#include <vector>

#include "locoman/types.hpp"

namespace locoman {

using StanceFlags = std::array<bool, kNumLegs>;

struct GaitPhase {
  StanceFlags stance{true, true, true, true};
  std::array<double, kNumLegs> progress{0.0, 0.0, 0.0, 0.0};  // fraction through the current stance or swing
};

/// Leg i is in stance iff frac(t / period + offset_i) < duty. Stand keeps all legs down.
GaitPhase gait_tick(const GaitSchedule& gait, double t);

/// Stance flags at t, t + dt, ..., for `steps` samples.
std::vector<StanceFlags> stance_horizon(const GaitSchedule& gait, double t, double dt, int steps);

[[nodiscard]] double stance_duration(const GaitSchedule& gait);
[[nodiscard]] double swing_duration(const GaitSchedule& gait);

/// Raibert touchdown: hip ground projection + v T_stance / 2 + k_v (v - v_cmd), on z = 0.
Vec3 swing_target(const Vec3& hip_world, const Vec3& vel, const Vec3& vel_cmd, double stance_time, double k_v = 0.0);

/// Swing foot path from liftoff to touchdown: cubic ease in x-y with zero end
/// velocities and a smooth vertical bump of the given apex height.
struct SwingTrajectory {
  Vec3 start = Vec3::Zero();
  Vec3 end = Vec3::Zero();
  double apex = 0.08;

  /// s in [0, 1] is the swing progress.
  [[nodiscard]] Vec3 position(double s) const;
};

}  // namespace locoman
