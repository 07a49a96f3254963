#include <cmath>
#include <random>

#include <doctest.h>
#include <Eigen/Geometry>

#include "mimu/errors.hpp"
#include "mimu/so3.hpp"

using namespace mimu;

namespace {

Vec3 random_vec(std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> g(0.0, 1.0);
  return scale * Vec3(g(rng), g(rng), g(rng));
}

Rotation quaternion_exp(const Vec3& theta) {
  const double angle = theta.norm();
  if (angle == 0.0) return Rotation::Identity();
  return Eigen::AngleAxisd(angle, theta / angle).toRotationMatrix();
}

}  // namespace

TEST_SUITE("so3") {

TEST_CASE("hat and vee are exact inverses") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 v = random_vec(rng, 3.0);
    const Mat3 m = hat(v);
    CHECK((m + m.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((vee(m) - v).cwiseAbs().maxCoeff() == 0.0);
    const Vec3 w = random_vec(rng, 1.0);
    CHECK((m * w - v.cross(w)).cwiseAbs().maxCoeff() < 1e-15);
  }
  CHECK_THROWS_AS(vee(Mat3::Identity()), NotSkewSymmetric);
}

TEST_CASE("exp_map matches the quaternion oracle") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> angle(0.0, M_PI);
  for (int i = 0; i < 1000; ++i) {
    Vec3 axis = random_vec(rng, 1.0);
    if (axis.norm() < 1e-6) axis = Vec3::UnitX();
    const Vec3 theta = angle(rng) * axis.normalized();
    CHECK((exp_map(theta) - quaternion_exp(theta)).cwiseAbs().maxCoeff() < 1e-12);
  }
  // Taylor branch.
  for (double s : {0.0, 1e-9, 1e-7}) {
    const Vec3 theta = s * Vec3(1.0, -2.0, 0.5).normalized();
    CHECK((exp_map(theta) - quaternion_exp(theta)).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("exp/log roundtrip including near pi") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> angle(0.0, M_PI - 1e-3);
  for (int i = 0; i < 1000; ++i) {
    Vec3 axis = random_vec(rng, 1.0);
    if (axis.norm() < 1e-6) axis = Vec3::UnitY();
    const Vec3 theta = angle(rng) * axis.normalized();
    CHECK((log_map(exp_map(theta)) - theta).norm() < 1e-9);
  }
  // Exactly pi: the sign of the axis is not determined and the trace-based
  // angle loses half the digits, so only the rotation itself is checked.
  for (const Vec3 axis : {Vec3::UnitX().eval(), Vec3::UnitZ().eval(),
                          Vec3(1.0, 1.0, 1.0).normalized().eval()}) {
    const Vec3 l = log_map(exp_map(M_PI * axis));
    CHECK(std::abs(l.norm() - M_PI) < 1e-6);
    CHECK((exp_map(l) - exp_map(M_PI * axis)).cwiseAbs().maxCoeff() < 1e-6);
  }
  CHECK(log_map(Rotation::Identity()).norm() == 0.0);
}

TEST_CASE("right Jacobian matches its finite-difference definition") {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 50; ++i) {
    const Vec3 theta = random_vec(rng, 1.0);
    const Mat3 jr = right_jacobian(theta);
    CHECK((jr * right_jacobian_inv(theta) - Mat3::Identity()).cwiseAbs().maxCoeff() <
          1e-10);
    const double h = 1e-6;
    for (int j = 0; j < 3; ++j) {
      const Vec3 d = h * Vec3::Unit(j);
      // Exp(theta + d) ~ Exp(theta) Exp(Jr d)
      const Vec3 fd = log_map(exp_map(theta).transpose() * exp_map(theta + d)) / h;
      CHECK((fd - jr.col(j)).norm() < 1e-5);
    }
  }
  CHECK((right_jacobian(Vec3::Zero()) - Mat3::Identity()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("project_rotation recovers the nearest rotation") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const Rotation r = exp_map(random_vec(rng, 1.0));
    CHECK((project_rotation(r) - r).cwiseAbs().maxCoeff() < 1e-12);
    Mat3 noisy = r;
    noisy += 1e-6 * Mat3::Random();
    const Rotation p = project_rotation(noisy);
    CHECK(is_rotation(p, 1e-12));
    CHECK(geodesic_distance(p, r) < 1e-5);
  }
}

TEST_CASE("geodesic distance equals the rotation angle") {
  const Vec3 theta(0.4, -0.1, 0.2);
  const Rotation a = exp_map(Vec3(0.7, 0.1, -0.3));
  CHECK(std::abs(geodesic_distance(a, a * exp_map(theta)) - theta.norm()) < 1e-12);
  CHECK(geodesic_distance(a, a) == 0.0);
}

TEST_CASE("rotation_mean") {
  const Rotation r = exp_map(Vec3(0.2, 0.5, -0.4));
  CHECK(geodesic_distance(rotation_mean({r, r, r}), r) < 1e-12);
  // Symmetric pair about r: mean must be r.
  const Vec3 d(0.3, 0.0, 0.1);
  const Rotation m = rotation_mean({r * exp_map(d), r * exp_map(-d)});
  CHECK(geodesic_distance(m, r) < 1e-9);
  CHECK_THROWS_AS(rotation_mean({}), EmptyInput);
}

TEST_CASE("interpolate_trajectory is exact at keyframes and accurate between") {
  // Smooth analytic trajectory.
  auto truth = [](double t) {
    return exp_map(Vec3(std::sin(t), 0.3 * std::cos(2.0 * t), 0.2 * t));
  };
  OrientationTrajectory traj;
  for (int k = 0; k <= 40; ++k) traj.push_back(0.05 * k, truth(0.05 * k));

  std::vector<double> at_keys = {0.0, 0.5, 1.0, 2.0};
  const OrientationTrajectory exact = interpolate_trajectory(traj, at_keys);
  for (std::size_t i = 0; i < at_keys.size(); ++i)
    CHECK(geodesic_distance(exact.rotations[i], truth(at_keys[i])) < 1e-12);

  std::vector<double> between;
  for (int k = 0; k < 100; ++k) between.push_back(0.017 * k);
  const OrientationTrajectory interp = interpolate_trajectory(traj, between);
  for (std::size_t i = 0; i < between.size(); ++i)
    CHECK(geodesic_distance(interp.rotations[i], truth(between[i])) < 1e-5);

  OrientationTrajectory tiny;
  for (int k = 0; k < 3; ++k) tiny.push_back(0.1 * k, truth(0.1 * k));
  CHECK_THROWS_AS(interpolate_trajectory(tiny, {0.1}), TooFewSamples);
  CHECK_THROWS_AS(interpolate_trajectory(traj, {5.0}), OutOfRange);
}

}  // TEST_SUITE
