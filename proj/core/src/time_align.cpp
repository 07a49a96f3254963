#include <algorithm>
#include <cmath>
#include <vector>

#include "mimu/errors.hpp"
#include "mimu/harness.hpp"
#include "mimu/so3.hpp"

namespace mimu {

namespace {

// Linear resampling of (ts, values) onto a uniform grid.
std::vector<double> resample(const std::vector<double>& ts,
                             const std::vector<double>& values, double t_start,
                             double dt, std::size_t count) {
  std::vector<double> out(count);
  std::size_t j = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const double t = t_start + static_cast<double>(i) * dt;
    while (j + 2 < ts.size() && ts[j + 1] < t) ++j;
    const double a = ts[j], b = ts[j + 1];
    const double u = std::clamp((t - a) / (b - a), 0.0, 1.0);
    out[i] = (1.0 - u) * values[j] + u * values[j + 1];
  }
  return out;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

double time_align(const GyroTrack& gyro, const OrientationTrajectory& gt,
                  double search_window) {
  gyro.validate();
  gt.validate();
  if (gyro.size() < 2 || gt.size() < 3)
    throw TooFewSamples("time_align: too few samples");

  // |omega| profile of the gyro stream.
  std::vector<double> g_mag(gyro.size());
  for (std::size_t k = 0; k < gyro.size(); ++k) g_mag[k] = gyro.omega_meas[k].norm();

  const double g_mean = mean_of(g_mag);
  double var = 0.0;
  for (double m : g_mag) var += (m - g_mean) * (m - g_mean);
  if (std::sqrt(var / static_cast<double>(g_mag.size())) <= 0.05)
    throw InsufficientMotion("time_align: |omega| variation below motion threshold");

  // |omega| finite-differenced from gt, at interval midpoints.
  std::vector<double> r_t(gt.size() - 1), r_mag(gt.size() - 1);
  for (std::size_t k = 0; k + 1 < gt.size(); ++k) {
    const double dt = gt.timestamps[k + 1] - gt.timestamps[k];
    r_t[k] = 0.5 * (gt.timestamps[k] + gt.timestamps[k + 1]);
    r_mag[k] =
        log_map(gt.rotations[k].transpose() * gt.rotations[k + 1]).norm() / dt;
  }

  const double overlap = std::min(gyro.timestamps.back(), r_t.back()) -
                         std::max(gyro.timestamps.front(), r_t.front());
  if (overlap < 5.0) throw NoOverlap("time_align: overlap below 5 s");

  // Common uniform grid at the gyro rate over the gt-rate span.
  const double dt = (gyro.timestamps.back() - gyro.timestamps.front()) /
                    static_cast<double>(gyro.size() - 1);
  const double t_start = std::max(gyro.timestamps.front(), r_t.front());
  const double t_stop = std::min(gyro.timestamps.back(), r_t.back());
  const std::size_t count = static_cast<std::size_t>((t_stop - t_start) / dt) + 1;

  std::vector<double> a = resample(gyro.timestamps, g_mag, t_start, dt, count);
  std::vector<double> b = resample(r_t, r_mag, t_start, dt, count);
  const double ma = mean_of(a), mb = mean_of(b);
  for (double& x : a) x -= ma;
  for (double& x : b) x -= mb;

  const long max_lag = std::lround(std::ceil(search_window / dt));
  if (static_cast<std::size_t>(2 * max_lag) >= count)
    throw NoOverlap("time_align: search window too large for the overlap");

  // Normalized cross-correlation per integer lag. Positive lag means the
  // gyro profile lags the gt profile by lag*dt.
  std::vector<double> corr(2 * max_lag + 1);
  for (long lag = -max_lag; lag <= max_lag; ++lag) {
    double num = 0.0, ea = 0.0, eb = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      const long j = static_cast<long>(i) + lag;
      if (j < 0 || j >= static_cast<long>(count)) continue;
      num += a[j] * b[i];
      ea += a[j] * a[j];
      eb += b[i] * b[i];
    }
    corr[lag + max_lag] = (ea > 0.0 && eb > 0.0) ? num / std::sqrt(ea * eb) : 0.0;
  }

  long best = 0;
  for (long i = 1; i < static_cast<long>(corr.size()); ++i)
    if (corr[i] > corr[best]) best = i;

  // Parabolic sub-sample refinement around the peak.
  double delta = 0.0;
  if (best > 0 && best + 1 < static_cast<long>(corr.size())) {
    const double c0 = corr[best - 1], c1 = corr[best], c2 = corr[best + 1];
    const double denom = c0 - 2.0 * c1 + c2;
    if (std::abs(denom) > 1e-15) delta = 0.5 * (c0 - c2) / denom;
  }

  const double lag_s = (static_cast<double>(best - max_lag) + delta) * dt;
  // a(j) pairs with b(i=j-lag): gyro content at t matches gt content at
  // t - lag, so adding -lag to the gyro timestamps aligns the streams.
  return -lag_s;
}

}  // namespace mimu
