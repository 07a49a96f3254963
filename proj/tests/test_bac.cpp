#include <cmath>
#include <random>

#include <doctest.h>

#include "mimu/bac.hpp"
#include "mimu/errors.hpp"
#include "mimu/estimator.hpp"
#include "mimu/so3.hpp"

using namespace mimu;

namespace {

OrientationTrajectory analytic_truth(double rate_hz, double secs) {
  OrientationTrajectory traj;
  const int n = static_cast<int>(rate_hz * secs);
  for (int k = 0; k <= n; ++k) {
    const double t = k / rate_hz;
    traj.push_back(t, exp_map(Vec3(0.6 * std::sin(1.1 * t), 0.4 * std::cos(0.9 * t),
                                   0.5 * std::sin(1.7 * t))));
  }
  return traj;
}

}  // namespace

TEST_SUITE("bac") {

TEST_CASE("axis_errors vanish for a perfect estimate") {
  const OrientationTrajectory gt = analytic_truth(100.0, 2.0);
  ImuExtrinsics extr;
  extr.r_master_imu = exp_map(Vec3(0.1, -0.2, 0.05));
  const AxisErrorSeries err = axis_errors(gt, gt, extr, 50, 3);
  CHECK(err.imu_id == 3);
  CHECK(err.e.size() == 50);
  for (const auto& e : err.e) CHECK(e.norm() < 1e-12);
}

TEST_CASE("axis_errors are expressed in the IMU frame") {
  const OrientationTrajectory gt = analytic_truth(100.0, 1.0);
  ImuExtrinsics extr;
  extr.r_master_imu = exp_map(Vec3(0.0, 0.4, -0.1));
  // Perturb the estimate by a fixed right-multiplied Master-frame error.
  const Vec3 d(0.01, -0.02, 0.03);
  OrientationTrajectory est = gt;
  for (auto& r : est.rotations) r = r * exp_map(d);
  const AxisErrorSeries err = axis_errors(gt, est, extr, 10);
  const Vec3 expected = extr.r_master_imu.transpose() * d;
  for (const auto& e : err.e) CHECK((e - expected).norm() < 1e-9);
}

TEST_CASE("select_best_axes picks the per-axis MSE minimizer, ties to lowest id") {
  std::vector<AxisErrorSeries> errors(3);
  for (int i = 0; i < 3; ++i) {
    errors[i].imu_id = i;
    errors[i].e.assign(4, Vec3::Zero());
  }
  // IMU 0: bad x, good y.  IMU 1: good x.  IMU 2: bad everything, good z.
  for (auto& e : errors[0].e) e = Vec3(0.5, 0.001, 0.2);
  for (auto& e : errors[1].e) e = Vec3(0.002, 0.3, 0.2);
  for (auto& e : errors[2].e) e = Vec3(0.4, 0.35, 0.001);
  const auto chosen = select_best_axes(errors);
  CHECK(chosen[0] == 1);
  CHECK(chosen[1] == 0);
  CHECK(chosen[2] == 2);

  // Exact tie on axis z between IMUs 0 and 1 -> lowest id.
  for (auto& e : errors[2].e) e.z() = 0.2;
  for (auto& e : errors[0].e) e.z() = 0.1;
  for (auto& e : errors[1].e) e.z() = 0.1;
  CHECK(select_best_axes(errors)[2] == 0);

  CHECK_THROWS_AS(select_best_axes({}), EmptyInput);
}

TEST_CASE("composition roundtrip against directly constructed rates") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ImuExtrinsics> extr(3);
    for (auto& e : extr)
      e.r_master_imu = exp_map(Vec3(gauss(rng), gauss(rng), gauss(rng)));
    const std::array<int, 3> sel = {static_cast<int>(rng() % 3),
                                    static_cast<int>(rng() % 3),
                                    static_cast<int>(rng() % 3)};
    Mat3 a;
    try {
      a = composition_matrix(sel, extr);
    } catch (const CoplanarAxes&) {
      continue;  // legitimately rejected random configuration
    }
    const Vec3 omega(gauss(rng), gauss(rng), gauss(rng));
    Vec3 comps;
    for (int axis = 0; axis < 3; ++axis)
      comps[axis] =
          (extr[sel[axis]].r_master_imu.transpose() * omega)[axis];
    CHECK((compose_omega(a, comps) - omega).norm() < 1e-10);
  }
}

TEST_CASE("coplanar selections are rejected") {
  // Row 0 of IMU 0 is +x, row 1 of IMU 1 is -x, row 2 of IMU 2 is +x:
  // the stacked rows span a single line.
  std::vector<ImuExtrinsics> extr(3);
  extr[0].r_master_imu = Rotation::Identity();
  extr[1].r_master_imu = exp_map(Vec3(0.0, 0.0, M_PI / 2.0));  // row 1 = -x
  extr[2].r_master_imu = exp_map(Vec3(0.0, M_PI / 2.0, 0.0));  // row 2 = +x
  CHECK_THROWS_AS(composition_matrix({0, 1, 2}, extr), CoplanarAxes);
  CHECK_THROWS_AS(composition_matrix({0, 1, 2}, std::vector<ImuExtrinsics>(1)),
                  OutOfRange);
}

TEST_CASE("open_loop_estimate reproduces truth from perfect measurements") {
  const OrientationTrajectory gt = analytic_truth(342.0, 3.0);
  std::vector<ImuParams> params(2);
  params[0].extrinsics.r_master_imu = exp_map(Vec3(0.05, 0.1, -0.07));
  params[1].extrinsics.r_master_imu = exp_map(Vec3(-0.2, 0.0, 0.15));
  params[0].intrinsics.c(1, 0) = 0.02;

  // Perfect measurements: invert the model by hand, zero bias.
  std::vector<GyroTrack> tracks(2);
  for (int i = 0; i < 2; ++i) {
    tracks[i].imu_id = i;
    tracks[i].timestamps = gt.timestamps;
    for (std::size_t k = 0; k < gt.size(); ++k) {
      Vec3 omega_m = Vec3::Zero();
      if (k + 1 < gt.size())
        omega_m = log_map(gt.rotations[k].transpose() * gt.rotations[k + 1]) /
                  (gt.timestamps[k + 1] - gt.timestamps[k]);
      const Vec3 body = params[i].extrinsics.r_master_imu.transpose() * omega_m;
      tracks[i].omega_meas.push_back(
          params[i].intrinsics.c.triangularView<Eigen::Lower>().solve(body));
    }
  }

  AxisSelection sel;
  sel.chosen = {1, 0, 1};
  std::vector<ImuExtrinsics> extr = {params[0].extrinsics, params[1].extrinsics};
  sel.composition = composition_matrix(sel.chosen, extr);
  const std::vector<Vec3> biases = {Vec3::Zero(), Vec3::Zero()};
  const OrientationTrajectory est =
      open_loop_estimate(gt.rotations.front(), tracks, sel, params, biases, 3.0);
  REQUIRE(est.size() == gt.size());
  CHECK(geodesic_distance(est.rotations.back(), gt.rotations.back()) < 1e-9);

  // Truncation by duration.
  const OrientationTrajectory half =
      open_loop_estimate(gt.rotations.front(), tracks, sel, params, biases, 1.5);
  CHECK(half.timestamps.back() <= gt.timestamps.front() + 1.5 + 1e-9);
}

}  // TEST_SUITE
