#include "mimu/estimator.hpp"

#include "mimu/errors.hpp"
#include "mimu/so3.hpp"

namespace mimu {

Rotation integrate_step(const Rotation& r, const Vec3& omega, double dt) {
  return r * exp_map(omega * dt);
}

OrientationTrajectory integrate_master(
    const Rotation& r0, const std::vector<std::pair<double, Vec3>>& omega_master) {
  if (omega_master.empty()) throw EmptyInput("integrate_master: empty rate stream");
  OrientationTrajectory traj;
  traj.timestamps.reserve(omega_master.size());
  traj.rotations.reserve(omega_master.size());
  traj.push_back(omega_master.front().first, r0);
  Rotation r = r0;
  for (std::size_t k = 0; k + 1 < omega_master.size(); ++k) {
    const double dt = omega_master[k + 1].first - omega_master[k].first;
    if (!(dt > 0.0))
      throw NonMonotonicTime("integrate_master: timestamps must be strictly increasing");
    r = integrate_step(r, omega_master[k].second, dt);
    if ((k + 1) % 1000 == 0) r = project_rotation(r);
    traj.push_back(omega_master[k + 1].first, r);
  }
  return traj;
}

Vec3 ave_fuse(const std::vector<Vec3>& samples,
              const std::vector<std::pair<ImuIntrinsics, ImuExtrinsics>>& imus,
              const std::vector<Vec3>& biases) {
  if (samples.empty()) throw EmptyInput("ave_fuse: no samples");
  if (samples.size() != imus.size() || biases.size() != imus.size())
    throw LengthMismatch("ave_fuse: one sample and one bias per IMU required");
  Vec3 acc = Vec3::Zero();
  for (std::size_t i = 0; i < imus.size(); ++i)
    acc += imus[i].second.r_master_imu *
           correct_measurement(samples[i], imus[i].first, biases[i]);
  return acc / static_cast<double>(imus.size());
}

}  // namespace mimu
