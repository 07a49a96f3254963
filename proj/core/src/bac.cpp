#include "mimu/bac.hpp"

#include <cmath>
#include <limits>

#include <Eigen/LU>

#include "mimu/errors.hpp"
#include "mimu/estimator.hpp"
#include "mimu/so3.hpp"

namespace mimu {

AxisErrorSeries axis_errors(const OrientationTrajectory& gt,
                            const OrientationTrajectory& est_i,
                            const ImuExtrinsics& extr_i, std::size_t window_p,
                            int imu_id) {
  if (gt.size() != est_i.size())
    throw LengthMismatch("axis_errors: gt and estimate differ in length");
  for (std::size_t k = 0; k < gt.size(); ++k)
    if (std::abs(gt.timestamps[k] - est_i.timestamps[k]) > 1e-9)
      throw LengthMismatch("axis_errors: gt and estimate timestamps differ");
  if (window_p > gt.size())
    throw WindowTooLarge("axis_errors: window exceeds track length");

  const Rotation& r_mi = extr_i.r_master_imu;
  AxisErrorSeries series;
  series.imu_id = imu_id;
  series.timestamps.reserve(window_p);
  series.e.reserve(window_p);
  for (std::size_t k = gt.size() - window_p; k < gt.size(); ++k) {
    series.timestamps.push_back(gt.timestamps[k]);
    series.e.push_back(log_map(r_mi.transpose() * gt.rotations[k].transpose() *
                               est_i.rotations[k] * r_mi));
  }
  return series;
}

std::array<int, 3> select_best_axes(const std::vector<AxisErrorSeries>& errors) {
  if (errors.empty()) throw EmptyInput("select_best_axes: no error series");
  const std::size_t p = errors.front().e.size();
  for (const auto& s : errors)
    if (s.e.size() != p)
      throw LengthMismatch("select_best_axes: unequal error windows");

  std::array<int, 3> best{0, 0, 0};
  for (int axis = 0; axis < 3; ++axis) {
    double best_mse = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < errors.size(); ++i) {
      double mse = 0.0;
      for (const auto& e : errors[i].e) mse += e[axis] * e[axis];
      if (mse < best_mse) {  // strict: ties keep the lowest imu_id
        best_mse = mse;
        best[axis] = static_cast<int>(i);
      }
    }
  }
  return best;
}

Mat3 composition_matrix(const std::array<int, 3>& selection,
                        const std::vector<ImuExtrinsics>& extrinsics) {
  Mat3 stacked;
  for (int axis = 0; axis < 3; ++axis) {
    const int i = selection[axis];
    if (i < 0 || static_cast<std::size_t>(i) >= extrinsics.size())
      throw OutOfRange("composition_matrix: selected IMU index out of range");
    // Row `axis` of R_{I<-M} for the selected IMU.
    stacked.row(axis) =
        extrinsics[i].r_master_imu.transpose().row(axis);
  }
  if (std::abs(stacked.determinant()) < kCoplanarityThreshold)
    throw CoplanarAxes("composition_matrix: selected axes are coplanar");
  return stacked.inverse();
}

Vec3 compose_omega(const Mat3& a, const Vec3& components) {
  return a * components;
}

OrientationTrajectory open_loop_estimate(const Rotation& r0,
                                         const std::vector<GyroTrack>& tracks,
                                         const AxisSelection& selection,
                                         const std::vector<ImuParams>& params,
                                         const std::vector<Vec3>& frozen_biases,
                                         double duration) {
  if (tracks.empty()) throw EmptyInput("open_loop_estimate: no tracks");
  if (params.size() != tracks.size() || frozen_biases.size() != tracks.size())
    throw LengthMismatch("open_loop_estimate: params/biases do not match tracks");
  const auto& ts = tracks.front().timestamps;
  if (ts.empty()) throw TrackExhausted("open_loop_estimate: empty track");
  for (const auto& t : tracks) {
    if (t.size() != ts.size())
      throw LengthMismatch("open_loop_estimate: tracks differ in length");
    for (std::size_t k = 0; k < ts.size(); ++k)
      if (std::abs(t.timestamps[k] - ts[k]) > 1e-9)
        throw LengthMismatch("open_loop_estimate: tracks are not time-aligned");
  }
  const double t_end = ts.front() + duration;
  if (ts.back() < t_end - 1e-9)
    throw TrackExhausted("open_loop_estimate: track shorter than requested duration");

  std::vector<std::pair<double, Vec3>> fused;
  for (std::size_t k = 0; k < ts.size() && ts[k] <= t_end + 1e-9; ++k) {
    Vec3 components;
    for (int axis = 0; axis < 3; ++axis) {
      const int i = selection.chosen[axis];
      const Vec3 corrected = correct_measurement(
          tracks[i].omega_meas[k], params[i].intrinsics, frozen_biases[i]);
      components[axis] = corrected[axis];
    }
    fused.emplace_back(ts[k], compose_omega(selection.composition, components));
  }
  return integrate_master(r0, fused);
}

}  // namespace mimu
