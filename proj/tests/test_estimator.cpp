#include <cmath>

#include <doctest.h>

#include "mimu/estimator.hpp"
#include "mimu/so3.hpp"

using namespace mimu;

TEST_SUITE("estimator") {

TEST_CASE("constant-rate integration matches the closed form") {
  const Vec3 omega(0.7, -0.3, 1.1);
  const Rotation r0 = exp_map(Vec3(0.2, 0.1, -0.5));
  const int steps = 342;
  const double total = 2.0;
  Rotation r = r0;
  for (int k = 0; k < steps; ++k) r = integrate_step(r, omega, total / steps);
  CHECK(geodesic_distance(r, r0 * exp_map(omega * total)) < 1e-12);
}

TEST_CASE("integrate_master satisfies the flow property") {
  const Rotation r0 = Rotation::Identity();
  std::vector<std::pair<double, Vec3>> rates;
  for (int k = 0; k <= 100; ++k)
    rates.emplace_back(0.01 * k, Vec3(std::sin(0.13 * k), 0.2, -std::cos(0.07 * k)));

  const OrientationTrajectory full = integrate_master(r0, rates);
  // Integrate the first half, restart from its endpoint, integrate the rest.
  std::vector<std::pair<double, Vec3>> a(rates.begin(), rates.begin() + 51);
  std::vector<std::pair<double, Vec3>> b(rates.begin() + 50, rates.end());
  const OrientationTrajectory first = integrate_master(r0, a);
  const OrientationTrajectory second =
      integrate_master(first.rotations.back(), b);
  CHECK(geodesic_distance(second.rotations.back(), full.rotations.back()) < 1e-12);
  CHECK(full.size() == rates.size());
  CHECK(geodesic_distance(full.rotations.front(), r0) == 0.0);
}

TEST_CASE("long integrations stay orthonormal") {
  std::vector<std::pair<double, Vec3>> rates;
  for (int k = 0; k < 20000; ++k)
    rates.emplace_back(1e-3 * k, Vec3(1.0, -0.5, 0.3));
  const OrientationTrajectory traj = integrate_master(Rotation::Identity(), rates);
  CHECK(is_rotation(traj.rotations.back(), 1e-9));
}

TEST_CASE("ave_fuse averages the corrected, rotated rates") {
  std::vector<std::pair<ImuIntrinsics, ImuExtrinsics>> imus(3);
  imus[1].first.c(0, 0) = 1.1;
  imus[2].second.r_master_imu = exp_map(Vec3(0.0, 0.3, 0.0));
  const std::vector<Vec3> samples = {Vec3(0.1, 0.2, 0.3), Vec3(-0.2, 0.0, 0.5),
                                     Vec3(0.4, -0.1, 0.0)};
  const std::vector<Vec3> biases = {Vec3(0.01, 0.0, 0.0), Vec3::Zero(),
                                    Vec3(0.0, 0.0, -0.02)};
  Vec3 expected = Vec3::Zero();
  for (int i = 0; i < 3; ++i)
    expected += imus[i].second.r_master_imu *
                (imus[i].first.c * samples[i] - biases[i]);
  expected /= 3.0;
  CHECK((ave_fuse(samples, imus, biases) - expected).norm() < 1e-15);
}

}  // TEST_SUITE
