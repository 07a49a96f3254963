#ifndef MIMU_ESTIMATOR_HPP
#define MIMU_ESTIMATOR_HPP

#include <utility>
#include <vector>

#include "mimu/gyro_model.hpp"
#include "mimu/trajectory.hpp"
#include "mimu/types.hpp"

namespace mimu {

// One integration step r * Exp(omega * dt); exact for piecewise-constant rates.
Rotation integrate_step(const Rotation& r, const Vec3& omega, double dt);

// Folds integrate_step over a Master-frame rate stream. trajectory[0] = r0.
// The running rotation is re-orthonormalized every 1000 steps.
OrientationTrajectory integrate_master(
    const Rotation& r0, const std::vector<std::pair<double, Vec3>>& omega_master);

// Averaged Virtual Estimator: (1/N) sum R_{M<-I_i} (C_i * omega_i - b_i),
// virtual frame fixed to the Master frame.
Vec3 ave_fuse(const std::vector<Vec3>& samples,
              const std::vector<std::pair<ImuIntrinsics, ImuExtrinsics>>& imus,
              const std::vector<Vec3>& biases);

}  // namespace mimu

#endif
