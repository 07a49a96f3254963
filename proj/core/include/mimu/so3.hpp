#ifndef MIMU_SO3_HPP
#define MIMU_SO3_HPP

#include <vector>

#include "mimu/trajectory.hpp"
#include "mimu/types.hpp"

namespace mimu {

// Skew-symmetric matrix of v, so that hat(v) * w == v x w.
Mat3 hat(const Vec3& v);

// Inverse of hat. Throws NotSkewSymmetric if |M + M^T| exceeds tol.
Vec3 vee(const Mat3& m, double tol = 1e-9);

// Rodrigues formula; Taylor branch below 1e-6 rad.
Rotation exp_map(const Vec3& theta);

// Principal logarithm, |result| in [0, pi]. The angle-pi case is resolved by
// the largest-diagonal-element branch with the first nonzero component positive.
Vec3 log_map(const Rotation& r);

// Right Jacobian of SO(3) and its inverse, with small-angle branches.
Mat3 right_jacobian(const Vec3& theta);
Mat3 right_jacobian_inv(const Vec3& theta);

// Nearest rotation matrix (polar projection).
Rotation project_rotation(const Mat3& m);

// ||Ln(a^T b)||, the rotation angle separating a and b.
double geodesic_distance(const Rotation& a, const Rotation& b);

// Iterative tangent-space mean. Throws NoConvergence after max_iters,
// EmptyInput on an empty list.
Rotation rotation_mean(const std::vector<Rotation>& rs, double tol = 1e-10,
                       int max_iters = 100);

// Cubic interpolation of the trajectory in per-segment local tangent
// coordinates Ln(R(t_a)^T R(t)); exact at keyframe times. Requires >= 4
// samples (TooFewSamples) and queries inside the span (OutOfRange).
OrientationTrajectory interpolate_trajectory(const OrientationTrajectory& traj,
                                             const std::vector<double>& query_times);

}  // namespace mimu

#endif
