#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Geometry>

#include "locoman/kinematics.hpp"

using namespace locoman;

namespace {

Vec3 random_euler(std::mt19937& rng) {
  std::uniform_real_distribution<double> tilt(-1.2, 1.2);
  std::uniform_real_distribution<double> yaw(-3.0, 3.0);
  return {tilt(rng), tilt(rng), yaw(rng)};
}

// Independent transform chain: world <- body <- arm mount <- link tip.
Vec3 fk_transform_chain(const Vec3& base, const Vec3& euler, double q, const RobotModel& m) {
  Eigen::Affine3d world_body = Eigen::Translation3d(base) *
                               Eigen::AngleAxisd(euler.z(), Vec3::UnitZ()) *
                               Eigen::AngleAxisd(euler.y(), Vec3::UnitY()) *
                               Eigen::AngleAxisd(euler.x(), Vec3::UnitX());
  // Positive q raises the link, i.e. a negative rotation about body y.
  Eigen::Affine3d body_link = Eigen::Translation3d(m.arm_mount) * Eigen::AngleAxisd(-q, Vec3::UnitY()) *
                              Eigen::Translation3d(m.arm_length, 0.0, 0.0);
  return (world_body * body_link).translation();
}

}  // namespace

TEST_CASE("rot_z basic cases") {
  CHECK((rot_z(0.0) - Mat3::Identity()).norm() == doctest::Approx(0.0));
  const Vec3 v = rot_z(std::numbers::pi / 2) * Vec3::UnitX();
  CHECK(v.x() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(v.y() == doctest::Approx(1.0));
  const Mat3 r = rot_z(0.3);
  CHECK((r.transpose() * r - Mat3::Identity()).norm() < 1e-12);
}

TEST_CASE("rotations stay orthonormal with unit determinant") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> any(-10.0, 10.0);
  for (int i = 0; i < 200; ++i) {
    const Vec3 e(any(rng), any(rng), any(rng));
    for (const Mat3& r : {rot_z(e.z()), rot_zyx(e)}) {
      CHECK((r.transpose() * r - Mat3::Identity()).norm() < 1e-10);
      CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("skew matches the cross product") {
  CHECK(skew(Vec3::Zero()).norm() == 0.0);
  const Vec3 unit = skew(Vec3::UnitX()) * Vec3::UnitY();
  CHECK((unit - Vec3::UnitZ()).norm() == 0.0);

  std::mt19937 rng(11);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 100; ++i) {
    const Vec3 r(nd(rng), nd(rng), nd(rng));
    const Vec3 v(nd(rng), nd(rng), nd(rng));
    const Vec3 expected(r.y() * v.z() - r.z() * v.y(), r.z() * v.x() - r.x() * v.z(), r.x() * v.y() - r.y() * v.x());
    CHECK((skew(r) * v - expected).norm() < 1e-14);
    CHECK((skew(r) + skew(r).transpose()).norm() == 0.0);
    CHECK((skew(r) * r).norm() < 1e-14);
  }
}

TEST_CASE("world inertia") {
  const RobotModel m;
  CHECK((world_inertia(m, Vec3::Zero()) - m.inertia_body).norm() < 1e-15);
  CHECK((world_inertia(m, Vec3(0, 0, std::numbers::pi)) - m.inertia_body).norm() < 1e-12);

  RobotModel full = m;
  full.inertia_body << 0.3, 0.02, -0.01, 0.02, 0.5, 0.03, -0.01, 0.03, 0.6;
  const Eigen::Vector3d ref = Eigen::SelfAdjointEigenSolver<Mat3>(full.inertia_body).eigenvalues();
  std::mt19937 rng(3);
  for (int i = 0; i < 50; ++i) {
    const Mat3 iw = world_inertia(full, random_euler(rng));
    const Eigen::Vector3d ev = Eigen::SelfAdjointEigenSolver<Mat3>(iw).eigenvalues();
    CHECK((ev - ref).norm() < 1e-10);
  }
}

TEST_CASE("euler rate maps are inverse of each other") {
  std::mt19937 rng(5);
  for (int i = 0; i < 50; ++i) {
    const Vec3 e = random_euler(rng);
    CHECK((euler_rate_to_omega(e) * omega_to_euler_rate(e) - Mat3::Identity()).norm() < 1e-10);
  }
  CHECK_THROWS_AS(omega_to_euler_rate(Vec3(0.0, std::numbers::pi / 2, 0.0)), std::domain_error);
}

TEST_CASE("euler rate map agrees with differentiated rotation") {
  // skew(omega) = dR/dt * R'; check against finite differences of rot_zyx.
  std::mt19937 rng(9);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 20; ++i) {
    const Vec3 e = random_euler(rng);
    const Vec3 rate(nd(rng), nd(rng), nd(rng));
    const double h = 1e-6;
    const Mat3 dr = (rot_zyx(e + h * rate) - rot_zyx(e - h * rate)) / (2 * h);
    const Mat3 w = dr * rot_zyx(e).transpose();
    const Vec3 omega(w(2, 1), w(0, 2), w(1, 0));
    CHECK((omega - euler_rate_to_omega(e) * rate).norm() < 1e-7);
  }
}

TEST_CASE("arm forward kinematics") {
  const RobotModel m;
  const auto p0 = arm_fk(Vec3::Zero(), Vec3::Zero(), 0.0, m);
  CHECK((p0.position - Vec3(0.8, 0.0, 0.05)).norm() < 1e-15);
  const auto p1 = arm_fk(Vec3::Zero(), Vec3::Zero(), std::numbers::pi / 2, m);
  CHECK((p1.position - Vec3(0.2, 0.0, 0.65)).norm() < 1e-15);
  CHECK(arm_fk(Vec3::Zero(), Vec3(0.0, 0.1, 0.0), 0.3, m).pitch == doctest::Approx(0.4));

  std::mt19937 rng(13);
  std::uniform_real_distribution<double> pos(-2.0, 2.0);
  std::uniform_real_distribution<double> q(-2.0 * std::numbers::pi, 2.0 * std::numbers::pi);
  for (int i = 0; i < 100; ++i) {
    const Vec3 base(pos(rng), pos(rng), pos(rng));
    const Vec3 e = random_euler(rng);
    const double qa = q(rng);
    CHECK((arm_fk(base, e, qa, m).position - fk_transform_chain(base, e, qa, m)).norm() < 1e-12);
  }
}

TEST_CASE("arm jacobian") {
  const RobotModel m;
  const Vec3 j0 = arm_jacobian(Vec3::Zero(), 0.0, m);
  CHECK((j0 - Vec3(0.0, 0.0, 0.6)).norm() < 1e-15);
  CHECK(j0.dot(Vec3(0, 0, -10)) == doctest::Approx(-6.0));
  CHECK(j0.dot(Vec3::Zero()) == 0.0);

  std::mt19937 rng(17);
  std::uniform_real_distribution<double> q(-2.0 * std::numbers::pi, 2.0 * std::numbers::pi);
  for (int i = 0; i < 100; ++i) {
    const Vec3 e = random_euler(rng);
    const double qa = q(rng);
    const double h = 1e-6;
    const Vec3 fd = (arm_fk(Vec3::Zero(), e, qa + h, m).position - arm_fk(Vec3::Zero(), e, qa - h, m).position) / (2 * h);
    const Vec3 j = arm_jacobian(e, qa, m);
    CHECK((fd - j).norm() <= 1e-5 * std::max(1.0, j.norm()));
  }
}

TEST_CASE("hip height") {
  const RobotModel m;
  CHECK(hip_height(Vec3(0, 0, 0.4), Vec3::Zero(), 0, m) == doctest::Approx(0.4));
  // Front hip, nose-down pitch: R_y(0.2) * (0.24, y, 0) has z = -0.24 sin(0.2).
  const double expected = 0.4 - 0.24 * std::sin(0.2);
  CHECK(expected == doctest::Approx(0.3523).epsilon(1e-4));
  CHECK(hip_height(Vec3(0, 0, 0.4), Vec3(0, 0.2, 0), 0, m) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(hip_height(Vec3(0, 0, 0.4), Vec3(0, 0.2, 0), 0, m) ==
        doctest::Approx(hip_height(Vec3(0, 0, 0.4), Vec3(0, 0.2, 0), 1, m)));
  CHECK_THROWS_AS(hip_height(Vec3::Zero(), Vec3::Zero(), 4, m), std::out_of_range);
  CHECK_THROWS_AS(hip_height(Vec3::Zero(), Vec3::Zero(), -1, m), std::out_of_range);
}

TEST_CASE("model validation") {
  RobotModel m;
  CHECK_NOTHROW(m.validate());
  m.mass = 0.0;
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
  m = RobotModel{};
  m.inertia_body(0, 0) = -1.0;
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
  m = RobotModel{};
  m.leg_reach = {0.5, 0.2};
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);

  ObjectModel lift = ObjectModel::lift(3.0);
  CHECK_NOTHROW(lift.validate());
  CHECK(lift.external_force(0) == doctest::Approx(-29.43));
  lift.dynamics_diag(0) = 0.0;
  CHECK_THROWS_AS(lift.validate(), std::invalid_argument);
  ObjectModel bad = ObjectModel::door_open();
  bad.state_dim = 1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("arm angle for a target height") {
  const RobotModel m;
  std::mt19937 rng(29);
  std::uniform_real_distribution<double> qd(-0.6, 2.2);
  for (int i = 0; i < 200; ++i) {
    const Vec3 base(0.1, -0.2, 0.35 + 0.1 * qd(rng));
    const Vec3 e = 0.3 * random_euler(rng);
    const double q_true = qd(rng);
    const double z = fk_transform_chain(base, e, q_true, m).z();
    // Guessing the generating angle returns it; the other root is further away.
    const double q = arm_angle_for_height(base, e, z, q_true, m);
    CHECK(fk_transform_chain(base, e, q, m).z() == doctest::Approx(z).epsilon(1e-10));
    CHECK(q == doctest::Approx(q_true).epsilon(1e-8));
  }
  // Out of reach: the arm points straight at the target.
  const double up = arm_angle_for_height(Vec3(0, 0, 0.4), Vec3::Zero(), 5.0, 1.0, m);
  CHECK(up == doctest::Approx(std::numbers::pi / 2));
}
