#include "locoman/gait.hpp"

#include <algorithm>
#include <cmath>

namespace locoman {

namespace {

double frac(double v) { return v - std::floor(v); }

// Cubic with zero slope at both ends.
double smoothstep(double s) { return s * s * (3.0 - 2.0 * s); }

}  // namespace

GaitPhase gait_tick(const GaitSchedule& gait, double t) {
  if (t < 0.0) throw std::invalid_argument("gait_tick: time must be non-negative");
  GaitPhase out;
  if (gait.pattern == GaitPattern::Stand) return out;
  for (std::size_t i = 0; i < kNumLegs; ++i) {
    const double ph = frac(t / gait.period + gait.phase_offsets[i]);
    out.stance[i] = ph < gait.duty;
    out.progress[i] = out.stance[i] ? ph / gait.duty : (ph - gait.duty) / (1.0 - gait.duty);
  }
  return out;
}

std::vector<StanceFlags> stance_horizon(const GaitSchedule& gait, double t, double dt, int steps) {
  std::vector<StanceFlags> out;
  out.reserve(static_cast<std::size_t>(steps));
  for (int k = 0; k < steps; ++k) out.push_back(gait_tick(gait, t + k * dt).stance);
  return out;
}

double stance_duration(const GaitSchedule& gait) { return gait.duty * gait.period; }
double swing_duration(const GaitSchedule& gait) { return (1.0 - gait.duty) * gait.period; }

Vec3 swing_target(const Vec3& hip_world, const Vec3& vel, const Vec3& vel_cmd, double stance_time, double k_v) {
  Vec3 t = hip_world + 0.5 * stance_time * vel + k_v * (vel - vel_cmd);
  t.z() = 0.0;
  return t;
}

Vec3 SwingTrajectory::position(double s) const {
  s = std::clamp(s, 0.0, 1.0);
  const double w = smoothstep(s);
  Vec3 p = start + w * (end - start);
  // Piecewise cubic rise and fall: zero vertical speed at liftoff, apex and touchdown.
  const double bump = s < 0.5 ? smoothstep(2.0 * s) : smoothstep(2.0 - 2.0 * s);
  p.z() += apex * bump;
  return p;
}

}  // namespace locoman
