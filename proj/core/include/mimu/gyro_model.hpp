#ifndef MIMU_GYRO_MODEL_HPP
#define MIMU_GYRO_MODEL_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "mimu/trajectory.hpp"
#include "mimu/types.hpp"

namespace mimu {

// Per-IMU intrinsics: lower-triangular scale-misalignment correction C,
// bias decay gamma, and diagonal noise scales.
struct ImuIntrinsics {
  Mat3 c = Mat3::Identity();   // strictly lower-triangular above the diagonal
  double gamma = 1e-4;         // dimensionless bias decay, in [0, 1)
  Vec3 sigma_g = Vec3::Zero(); // rad/s, per-axis white noise std
  Vec3 sigma_b = Vec3::Zero(); // rad/s, per-step bias walk std

  void validate() const;
};

// Rotation from the IMU frame to the Master frame, R_{M<-I}.
struct ImuExtrinsics {
  Rotation r_master_imu = Rotation::Identity();
};

// Raw measured angular velocities of one IMU.
struct GyroTrack {
  int imu_id = 0;
  std::vector<double> timestamps;
  std::vector<Vec3> omega_meas;  // rad/s

  std::size_t size() const { return timestamps.size(); }
  void validate() const;
};

struct BiasTrajectory {
  std::vector<double> timestamps;
  std::vector<Vec3> b;  // rad/s
};

// Injectable model-unexplained error: per-axis piecewise-constant additive
// offset plus a per-axis multiplicative scale perturbation. After the last
// segment the final offset holds.
struct SystematicErrorProfile {
  struct Segment {
    double duration = 0.0;  // seconds, > 0
    double offset = 0.0;    // rad/s
  };
  std::vector<Segment> segments[3];
  Vec3 scale_pert = Vec3::Zero();  // dimensionless

  double offset_at(int axis, double t) const;
  Vec3 offset_vec(double t) const {
    return Vec3(offset_at(0, t), offset_at(1, t), offset_at(2, t));
  }
};

// C * omega_meas - b. The zero-mean noise term is unobservable here.
Vec3 correct_measurement(const Vec3& omega_meas, const ImuIntrinsics& intr,
                         const Vec3& b);

// One bias random-walk step: b + (-gamma * b + noise).
Vec3 propagate_bias(const Vec3& b, const ImuIntrinsics& intr, const Vec3& noise);

// Generates per-IMU measurement streams from a Master-frame ground-truth
// trajectory sampled at the IMU rate. Body rates come from finite-difference
// log increments; measurements invert the correction model so that applying
// it with the true parameters recovers the true rate plus exactly the
// injected systematic residual and noise. Deterministic given the seed.
std::vector<std::pair<GyroTrack, BiasTrajectory>> simulate_mimu(
    const OrientationTrajectory& true_traj,
    const std::vector<std::pair<ImuIntrinsics, ImuExtrinsics>>& imus,
    const std::vector<SystematicErrorProfile>& sys_err, std::uint64_t seed,
    const std::vector<Vec3>& initial_biases = {});

}  // namespace mimu

#endif
