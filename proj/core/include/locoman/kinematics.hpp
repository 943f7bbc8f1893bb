#pragma once

#include "locoman/types.hpp"

namespace locoman {

/// Rotation about world z.
Mat3 rot_z(double yaw);

/// Body-to-world rotation for ZYX Euler angles given as (roll, pitch, yaw):
/// R = Rz(yaw) * Ry(pitch) * Rx(roll).
Mat3 rot_zyx(const Vec3& euler);

/// Cross-product matrix: skew(r) * v == r.cross(v).
Mat3 skew(const Vec3& r);

/// Maps Euler-angle rates to world angular velocity: omega = E(euler) * euler_dot.
Mat3 euler_rate_to_omega(const Vec3& euler);

/// Inverse of euler_rate_to_omega. Throws std::domain_error at |pitch| >= pi/2.
Mat3 omega_to_euler_rate(const Vec3& euler);

Mat3 world_inertia(const RobotModel& model, const Vec3& euler);

/// Arm link vector in the body frame for joint angle q (link rotates in the body x-z plane).
Vec3 arm_link(double q_arm, const RobotModel& model);
/// d(arm_link)/dq.
Vec3 arm_link_dq(double q_arm, const RobotModel& model);

struct EndEffectorPose {
  Vec3 position = Vec3::Zero();
  double pitch = 0.0;  // body pitch + q_arm
};

EndEffectorPose arm_fk(const Vec3& base_pos, const Vec3& euler, double q_arm, const RobotModel& model);

/// Column d(EE position)/d(q_arm). Arm torque for a gripper force f is J.dot(f).
Vec3 arm_jacobian(const Vec3& euler, double q_arm, const RobotModel& model);

/// World z of hip `hip_index`. Throws std::out_of_range for an index outside 0..3.
double hip_height(const Vec3& pos, const Vec3& euler, int hip_index, const RobotModel& model);

/// Hip position in the world frame.
Vec3 hip_position(const Vec3& pos, const Vec3& euler, int hip_index, const RobotModel& model);

/// Arm angle that puts the end effector at height `target_z` for the given
/// body pose, choosing the root nearest `q_near`. An unreachable height gives
/// the angle of closest approach.
double arm_angle_for_height(const Vec3& pos, const Vec3& euler, double target_z, double q_near,
                            const RobotModel& model);

}  // namespace locoman
