#include "mimu/gyro_model.hpp"

#include <cmath>
#include <random>

#include "mimu/errors.hpp"
#include "mimu/so3.hpp"

namespace mimu {

void ImuIntrinsics::validate() const {
  if (c(0, 1) != 0.0 || c(0, 2) != 0.0 || c(1, 2) != 0.0)
    throw DataError("intrinsics: C must be lower-triangular");
  if (c(0, 0) <= 0.0 || c(1, 1) <= 0.0 || c(2, 2) <= 0.0)
    throw DataError("intrinsics: diag(C) must be positive");
  if (gamma < 0.0 || gamma >= 1.0)
    throw DataError("intrinsics: gamma must be in [0, 1)");
  if ((sigma_g.array() < 0.0).any() || (sigma_b.array() < 0.0).any())
    throw DataError("intrinsics: noise scales must be non-negative");
}

void GyroTrack::validate() const {
  if (timestamps.size() != omega_meas.size())
    throw LengthMismatch("gyro track: timestamps and samples differ in length");
  for (std::size_t i = 1; i < timestamps.size(); ++i)
    if (!(timestamps[i] > timestamps[i - 1]))
      throw NonMonotonicTime("gyro track: timestamps must be strictly increasing");
}

double SystematicErrorProfile::offset_at(int axis, double t) const {
  const auto& segs = segments[axis];
  if (segs.empty()) return 0.0;
  double end = 0.0;
  for (const auto& s : segs) {
    end += s.duration;
    if (t < end) return s.offset;
  }
  return segs.back().offset;
}

Vec3 correct_measurement(const Vec3& omega_meas, const ImuIntrinsics& intr,
                         const Vec3& b) {
  return intr.c * omega_meas - b;
}

Vec3 propagate_bias(const Vec3& b, const ImuIntrinsics& intr, const Vec3& noise) {
  return b + (-intr.gamma * b + noise);
}

std::vector<std::pair<GyroTrack, BiasTrajectory>> simulate_mimu(
    const OrientationTrajectory& true_traj,
    const std::vector<std::pair<ImuIntrinsics, ImuExtrinsics>>& imus,
    const std::vector<SystematicErrorProfile>& sys_err, std::uint64_t seed,
    const std::vector<Vec3>& initial_biases) {
  true_traj.validate();
  const std::size_t n = true_traj.size();
  if (n < 2) throw TooFewSamples("simulate_mimu: need at least 2 trajectory samples");
  if (sys_err.size() != imus.size())
    throw LengthMismatch("simulate_mimu: one systematic profile per IMU required");
  if (!initial_biases.empty() && initial_biases.size() != imus.size())
    throw LengthMismatch("simulate_mimu: one initial bias per IMU required");

  const auto& ts = true_traj.timestamps;
  double dt_min = ts[1] - ts[0], dt_max = dt_min;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double dt = ts[k + 1] - ts[k];
    dt_min = std::min(dt_min, dt);
    dt_max = std::max(dt_max, dt);
  }
  if (dt_max > 1.01 * dt_min)
    throw RateMismatch("simulate_mimu: trajectory sampling irregular beyond 1%");

  // Master-frame body rates from finite-difference log increments; the last
  // sample reuses the previous rate.
  std::vector<Vec3> omega_master(n);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double dt = ts[k + 1] - ts[k];
    omega_master[k] =
        log_map(true_traj.rotations[k].transpose() * true_traj.rotations[k + 1]) / dt;
  }
  omega_master[n - 1] = omega_master[n - 2];

  std::vector<std::pair<GyroTrack, BiasTrajectory>> out;
  out.reserve(imus.size());

  for (std::size_t i = 0; i < imus.size(); ++i) {
    const ImuIntrinsics& intr = imus[i].first;
    const Rotation& r_mi = imus[i].second.r_master_imu;
    intr.validate();

    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + 0x100000001b3ULL * (i + 1));
    std::normal_distribution<double> gauss(0.0, 1.0);

    GyroTrack track;
    track.imu_id = static_cast<int>(i);
    track.timestamps = ts;
    track.omega_meas.resize(n);
    BiasTrajectory bias;
    bias.timestamps = ts;
    bias.b.resize(n);

    Vec3 b = initial_biases.empty() ? Vec3::Zero() : initial_biases[i];
    for (std::size_t k = 0; k < n; ++k) {
      bias.b[k] = b;
      const Vec3 omega_body = r_mi.transpose() * omega_master[k];
      Vec3 n_g(gauss(rng), gauss(rng), gauss(rng));
      n_g = n_g.cwiseProduct(intr.sigma_g);
      const Vec3 pre =
          (Vec3::Ones() + sys_err[i].scale_pert).cwiseProduct(omega_body) + b +
          sys_err[i].offset_vec(ts[k]) + n_g;
      // omega_meas = C^-1 * pre, C lower-triangular.
      track.omega_meas[k] =
          intr.c.triangularView<Eigen::Lower>().solve(pre);

      Vec3 n_b(gauss(rng), gauss(rng), gauss(rng));
      n_b = n_b.cwiseProduct(intr.sigma_b);
      b = propagate_bias(b, intr, n_b);
    }
    out.emplace_back(std::move(track), std::move(bias));
  }
  return out;
}

}  // namespace mimu
