#include "mimu/so3.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace mimu {

Mat3 hat(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return m;
}

Vec3 vee(const Mat3& m, double tol) {
  if ((m + m.transpose()).cwiseAbs().maxCoeff() > tol)
    throw NotSkewSymmetric("vee: input is not skew-symmetric within tolerance");
  return Vec3(0.5 * (m(2, 1) - m(1, 2)),
              0.5 * (m(0, 2) - m(2, 0)),
              0.5 * (m(1, 0) - m(0, 1)));
}

Rotation exp_map(const Vec3& theta) {
  const double t2 = theta.squaredNorm();
  const double t = std::sqrt(t2);
  double a, b;  // R = I + a*[theta]x + b*[theta]x^2
  if (t < 1e-6) {
    a = 1.0 - t2 / 6.0;
    b = 0.5 - t2 / 24.0;
  } else {
    a = std::sin(t) / t;
    b = (1.0 - std::cos(t)) / t2;
  }
  const Mat3 k = hat(theta);
  return Mat3::Identity() + a * k + b * (k * k);
}

Vec3 log_map(const Rotation& r) {
  const double cos_theta = std::clamp(0.5 * (r.trace() - 1.0), -1.0, 1.0);
  const double theta = std::acos(cos_theta);
  const Vec3 w(0.5 * (r(2, 1) - r(1, 2)),
               0.5 * (r(0, 2) - r(2, 0)),
               0.5 * (r(1, 0) - r(0, 1)));  // sin(theta) * axis
  if (theta < 1e-6) {
    const double t2 = theta * theta;
    return w * (1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0);
  }
  if (theta < M_PI - 1e-4) return w * (theta / std::sin(theta));

  // Near pi: axis from the symmetric part, largest-diagonal element branch.
  const Mat3 q = Mat3::Identity() +
                 (0.5 * (r + r.transpose()) - Mat3::Identity()) / (1.0 - cos_theta);
  int i = 0;
  if (q(1, 1) > q(i, i)) i = 1;
  if (q(2, 2) > q(i, i)) i = 2;
  Vec3 axis;
  axis[i] = std::sqrt(std::max(q(i, i), 0.0));
  for (int j = 0; j < 3; ++j)
    if (j != i) axis[j] = q(i, j) / axis[i];
  axis.normalize();
  if (w.norm() > 1e-9) {
    if (axis.dot(w) < 0.0) axis = -axis;
  } else {
    // Exactly at pi the sign is a convention: first nonzero component positive.
    for (int j = 0; j < 3; ++j) {
      if (std::abs(axis[j]) > 1e-12) {
        if (axis[j] < 0.0) axis = -axis;
        break;
      }
    }
  }
  return theta * axis;
}

Mat3 right_jacobian(const Vec3& theta) {
  const double t2 = theta.squaredNorm();
  const double t = std::sqrt(t2);
  double a, b;  // Jr = I - a*[theta]x + b*[theta]x^2
  if (t < 1e-5) {
    a = 0.5 - t2 / 24.0;
    b = 1.0 / 6.0 - t2 / 120.0;
  } else {
    a = (1.0 - std::cos(t)) / t2;
    b = (t - std::sin(t)) / (t2 * t);
  }
  const Mat3 k = hat(theta);
  return Mat3::Identity() - a * k + b * (k * k);
}

Mat3 right_jacobian_inv(const Vec3& theta) {
  const double t2 = theta.squaredNorm();
  const double t = std::sqrt(t2);
  double b;  // Jr^-1 = I + [theta]x/2 + b*[theta]x^2
  if (t < 1e-5) {
    b = 1.0 / 12.0 + t2 / 720.0;
  } else {
    b = 1.0 / t2 - (1.0 + std::cos(t)) / (2.0 * t * std::sin(t));
  }
  const Mat3 k = hat(theta);
  return Mat3::Identity() + 0.5 * k + b * (k * k);
}

Rotation project_rotation(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Mat3 d = Mat3::Identity();
    d(2, 2) = -1.0;
    r = svd.matrixU() * d * svd.matrixV().transpose();
  }
  return r;
}

double geodesic_distance(const Rotation& a, const Rotation& b) {
  return log_map(a.transpose() * b).norm();
}

Rotation rotation_mean(const std::vector<Rotation>& rs, double tol, int max_iters) {
  if (rs.empty()) throw EmptyInput("rotation_mean: empty input");
  Rotation m = rs.front();
  for (int it = 0; it < max_iters; ++it) {
    Vec3 delta = Vec3::Zero();
    for (const auto& r : rs) delta += log_map(m.transpose() * r);
    delta /= static_cast<double>(rs.size());
    m = m * exp_map(delta);
    if (delta.norm() < tol) return m;
  }
  throw NoConvergence("rotation_mean: no convergence within iteration limit");
}

namespace {

// Cubic Lagrange interpolation through 4 nodes.
Vec3 lagrange4(const double* ts, const Vec3* ys, double t) {
  Vec3 out = Vec3::Zero();
  for (int i = 0; i < 4; ++i) {
    double w = 1.0;
    for (int j = 0; j < 4; ++j)
      if (j != i) w *= (t - ts[j]) / (ts[i] - ts[j]);
    out += w * ys[i];
  }
  return out;
}

}  // namespace

OrientationTrajectory interpolate_trajectory(const OrientationTrajectory& traj,
                                             const std::vector<double>& query_times) {
  traj.validate();
  const std::size_t n = traj.size();
  if (n < 4) throw TooFewSamples("interpolate_trajectory: need at least 4 samples");
  const auto& ts = traj.timestamps;

  OrientationTrajectory out;
  out.timestamps.reserve(query_times.size());
  out.rotations.reserve(query_times.size());

  for (double t : query_times) {
    if (t < ts.front() || t > ts.back())
      throw OutOfRange("interpolate_trajectory: query time outside trajectory span");
    auto it = std::upper_bound(ts.begin(), ts.end(), t);
    std::size_t seg = (it == ts.begin()) ? 0 : static_cast<std::size_t>(it - ts.begin()) - 1;
    if (seg >= n - 1) seg = n - 2;

    if (t == ts[seg]) {
      out.push_back(t, traj.rotations[seg]);
      continue;
    }
    if (t == ts[seg + 1]) {
      out.push_back(t, traj.rotations[seg + 1]);
      continue;
    }

    // Four nodes around the segment, tangent coordinates anchored at the
    // segment start so the chart stays well inside the pi-radius ball.
    std::size_t i0 = (seg == 0) ? 0 : seg - 1;
    i0 = std::min(i0, n - 4);
    const Rotation& anchor = traj.rotations[seg];
    double nt[4];
    Vec3 ny[4];
    for (int i = 0; i < 4; ++i) {
      nt[i] = ts[i0 + i];
      ny[i] = log_map(anchor.transpose() * traj.rotations[i0 + i]);
    }
    out.push_back(t, anchor * exp_map(lagrange4(nt, ny, t)));
  }
  return out;
}

}  // namespace mimu
