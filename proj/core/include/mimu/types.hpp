#ifndef MIMU_TYPES_HPP
#define MIMU_TYPES_HPP

#include <Eigen/Core>
#include <Eigen/LU>  // determinant() used by is_rotation

namespace mimu {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Orthonormal, det +1. Validity is checked where it matters, not on every use.
using Rotation = Eigen::Matrix3d;

inline bool is_rotation(const Mat3& r, double tol = 1e-9) {
  return ((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol) &&
         (std::abs(r.determinant() - 1.0) <= tol);
}

}  // namespace mimu

#endif
