#ifndef MIMU_BAC_HPP
#define MIMU_BAC_HPP

#include <array>
#include <vector>

#include "mimu/calibrate.hpp"
#include "mimu/gyro_model.hpp"
#include "mimu/trajectory.hpp"
#include "mimu/types.hpp"

namespace mimu {

// Orientation error of one IMU over the last p aided samples, expressed in
// that IMU's frame.
struct AxisErrorSeries {
  int imu_id = 0;
  std::vector<double> timestamps;
  std::vector<Vec3> e;
};

// The chosen (IMU, axis) triple and the precomputed composition matrix.
struct AxisSelection {
  std::array<int, 3> chosen{0, 0, 0};  // IMU index per axis x, y, z
  Mat3 composition = Mat3::Identity();
  std::size_t window_p = 0;
};

inline constexpr double kCoplanarityThreshold = 1e-3;

// e_i(t_k) = Ln(R_{I<-M} R_{M<-W}^GT R_{W<-M}^i R_{M<-I}) over the last
// window_p samples. gt and est must share timestamps.
AxisErrorSeries axis_errors(const OrientationTrajectory& gt,
                            const OrientationTrajectory& est_i,
                            const ImuExtrinsics& extr_i, std::size_t window_p,
                            int imu_id = 0);

// Per axis, the IMU with the lowest windowed MSE; ties go to the lowest id.
std::array<int, 3> select_best_axes(const std::vector<AxisErrorSeries>& errors);

// A = (stacked selected rows of R_{I<-M})^-1. Throws CoplanarAxes when the
// stacked-row determinant is below the threshold.
Mat3 composition_matrix(const std::array<int, 3>& selection,
                        const std::vector<ImuExtrinsics>& extrinsics);

// A * (selected scalar components) = omega in the Master frame.
Vec3 compose_omega(const Mat3& a, const Vec3& components);

// Open-loop propagation from the last aided estimate using only the selected
// axes and the frozen biases. Tracks must start at the aided/open-loop
// boundary and share timestamps.
OrientationTrajectory open_loop_estimate(const Rotation& r0,
                                         const std::vector<GyroTrack>& tracks,
                                         const AxisSelection& selection,
                                         const std::vector<ImuParams>& params,
                                         const std::vector<Vec3>& frozen_biases,
                                         double duration);

}  // namespace mimu

#endif
