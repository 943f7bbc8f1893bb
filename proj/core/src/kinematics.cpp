#include "locoman/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace locoman {

Mat3 rot_z(double yaw) {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  Mat3 r;
  r << c, -s, 0.0,
       s, c, 0.0,
       0.0, 0.0, 1.0;
  return r;
}

Mat3 rot_zyx(const Vec3& euler) {
  const double cr = std::cos(euler.x()), sr = std::sin(euler.x());
  const double cp = std::cos(euler.y()), sp = std::sin(euler.y());
  Mat3 rx, ry;
  rx << 1.0, 0.0, 0.0,
        0.0, cr, -sr,
        0.0, sr, cr;
  ry << cp, 0.0, sp,
        0.0, 1.0, 0.0,
        -sp, 0.0, cp;
  return rot_z(euler.z()) * ry * rx;
}

Mat3 skew(const Vec3& r) {
  Mat3 m;
  m << 0.0, -r.z(), r.y(),
       r.z(), 0.0, -r.x(),
       -r.y(), r.x(), 0.0;
  return m;
}

Mat3 euler_rate_to_omega(const Vec3& euler) {
  const double cp = std::cos(euler.y()), sp = std::sin(euler.y());
  const double cy = std::cos(euler.z()), sy = std::sin(euler.z());
  Mat3 e;
  e << cp * cy, -sy, 0.0,
       cp * sy, cy, 0.0,
       -sp, 0.0, 1.0;
  return e;
}

Mat3 omega_to_euler_rate(const Vec3& euler) {
  const double cp = std::cos(euler.y());
  if (std::abs(cp) < 1e-9) {
    throw std::domain_error("omega_to_euler_rate: pitch at Euler singularity");
  }
  const double tp = std::tan(euler.y());
  const double cy = std::cos(euler.z()), sy = std::sin(euler.z());
  Mat3 m;
  m << cy / cp, sy / cp, 0.0,
       -sy, cy, 0.0,
       cy * tp, sy * tp, 1.0;
  return m;
}

Mat3 world_inertia(const RobotModel& model, const Vec3& euler) {
  const Mat3 r = rot_zyx(euler);
  return r * model.inertia_body * r.transpose();
}

Vec3 arm_link(double q_arm, const RobotModel& model) {
  return model.arm_length * Vec3(std::cos(q_arm), 0.0, std::sin(q_arm));
}

Vec3 arm_link_dq(double q_arm, const RobotModel& model) {
  return model.arm_length * Vec3(-std::sin(q_arm), 0.0, std::cos(q_arm));
}

EndEffectorPose arm_fk(const Vec3& base_pos, const Vec3& euler, double q_arm, const RobotModel& model) {
  return {base_pos + rot_zyx(euler) * (model.arm_mount + arm_link(q_arm, model)), euler.y() + q_arm};
}

Vec3 arm_jacobian(const Vec3& euler, double q_arm, const RobotModel& model) {
  return rot_zyx(euler) * arm_link_dq(q_arm, model);
}

Vec3 hip_position(const Vec3& pos, const Vec3& euler, int hip_index, const RobotModel& model) {
  if (hip_index < 0 || hip_index >= kNumLegs) {
    throw std::out_of_range("hip index " + std::to_string(hip_index) + " outside 0..3");
  }
  return pos + rot_zyx(euler) * model.hip_offset[static_cast<std::size_t>(hip_index)];
}

double hip_height(const Vec3& pos, const Vec3& euler, int hip_index, const RobotModel& model) {
  return hip_position(pos, euler, hip_index, model).z();
}

double arm_angle_for_height(const Vec3& pos, const Vec3& euler, double target_z, double q_near,
                            const RobotModel& model) {
  // z(q) = z0 + a cos q + b sin q = z0 + amp cos(q - phase)
  const Mat3 rot = rot_zyx(euler);
  const double z0 = pos.z() + rot.row(2).dot(model.arm_mount);
  const double a = model.arm_length * rot(2, 0);
  const double b = model.arm_length * rot(2, 2);
  const double amp = std::hypot(a, b);
  const double phase = std::atan2(b, a);
  const double c = std::clamp((target_z - z0) / amp, -1.0, 1.0);
  const double spread = std::acos(c);
  auto wrap_near = [q_near](double q) { return q + 2.0 * std::numbers::pi * std::round((q_near - q) / (2.0 * std::numbers::pi)); };
  const double q1 = wrap_near(phase + spread);
  const double q2 = wrap_near(phase - spread);
  return std::abs(q1 - q_near) <= std::abs(q2 - q_near) ? q1 : q2;
}

}  // namespace locoman
