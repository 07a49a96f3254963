#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "mimu/errors.hpp"
#include "mimu/estimator.hpp"
#include "mimu/harness.hpp"
#include "mimu/so3.hpp"

namespace mimu {

namespace {

GyroTrack slice_track(const GyroTrack& g, double t0, double t1) {
  GyroTrack out;
  out.imu_id = g.imu_id;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double t = g.timestamps[k];
    if (t < t0 - 1e-9 || t > t1 + 1e-9) continue;
    out.timestamps.push_back(t);
    out.omega_meas.push_back(g.omega_meas[k]);
  }
  return out;
}

std::vector<std::string> default_methods(std::size_t n_imus) {
  std::vector<std::string> m;
  for (std::size_t i = 0; i < n_imus; ++i)
    m.push_back("single-imu-" + std::to_string(i));
  m.push_back("AVE");
  m.push_back("BAC");
  if (n_imus > 2) m.push_back("BAC-2");
  return m;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Per-method open-loop trajectories for one track.
struct TrackRun {
  std::string track_id;
  std::vector<double> errors_per_method_horizon;  // flattened [method][horizon]
};

std::size_t nearest_index(const std::vector<double>& ts, double t) {
  auto it = std::lower_bound(ts.begin(), ts.end(), t);
  if (it == ts.end()) return ts.size() - 1;
  std::size_t k = static_cast<std::size_t>(it - ts.begin());
  if (k > 0 && std::abs(ts[k - 1] - t) < std::abs(ts[k] - t)) --k;
  return k;
}

}  // namespace

void aggregate_method_stats(PipelineResult& result) {
  const MethodReport* ave = nullptr;
  for (const auto& m : result.methods)
    if (m.method == "AVE") ave = &m;

  for (auto& m : result.methods) {
    const std::size_t nh = m.horizons.size();
    m.median_error.assign(nh, 0.0);
    m.ratio_vs_ave.clear();
    for (std::size_t h = 0; h < nh; ++h) {
      std::vector<double> col;
      for (const auto& row : m.errors) col.push_back(row[h]);
      m.median_error[h] = median(col);
    }
    if (!ave || result.methods.size() < 2) continue;
    m.ratio_vs_ave.assign(nh, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t h = 0; h < nh; ++h) {
      double sum = 0.0;
      std::size_t count = 0;
      for (std::size_t t = 0; t < m.errors.size(); ++t) {
        const double ea = ave->errors[t][h];
        if (!(ea > 0.0)) continue;  // ratio defined only where AVE error > 0
        sum += ea / std::max(m.errors[t][h], 1e-15);
        ++count;
      }
      if (count > 0) m.ratio_vs_ave[h] = 100.0 * sum / static_cast<double>(count);
    }
  }
}

PipelineResult run_pipeline(const std::vector<Track>& tracks,
                            const CalibrationResult& calib, const PipelineConfig& cfg) {
  if (tracks.empty()) throw EmptyInput("run_pipeline: no tracks");
  const std::size_t n_imus = calib.params.size();
  if (n_imus == 0) throw EmptyInput("run_pipeline: empty calibration");

  std::vector<std::string> methods =
      cfg.methods.empty() ? default_methods(n_imus) : cfg.methods;
  for (const auto& m : methods) {
    if (m == "AVE" || m == "BAC" || m == "BAC-2") continue;
    if (m.rfind("single-imu-", 0) == 0) {
      const long i = std::strtol(m.c_str() + 11, nullptr, 10);
      if (i >= 0 && static_cast<std::size_t>(i) < n_imus) continue;
    }
    throw SchemaError("run_pipeline: unknown method '" + m + "'");
  }
  for (int i : cfg.bac2_imus)
    if (i < 0 || static_cast<std::size_t>(i) >= n_imus)
      throw OutOfRange("run_pipeline: BAC-2 IMU index out of range");

  std::vector<std::pair<ImuIntrinsics, ImuExtrinsics>> imu_pairs;
  std::vector<ImuExtrinsics> extrinsics;
  for (const auto& p : calib.params) {
    imu_pairs.emplace_back(p.intrinsics, p.extrinsics);
    extrinsics.push_back(p.extrinsics);
  }

  PipelineResult result;
  result.usage.frequency.assign(n_imus, {0.0, 0.0, 0.0});

  std::vector<double> horizons;
  {
    const double span = tracks.front().open_loop_duration;
    for (double h = 0.0; h <= span + 1e-9; h += 0.5) horizons.push_back(std::min(h, span));
  }
  for (const auto& m : methods) {
    MethodReport rep;
    rep.method = m;
    rep.horizons = horizons;
    result.methods.push_back(std::move(rep));
  }

  std::size_t used_tracks = 0;

  for (const auto& track : tracks) {
    try {
      if (track.gyro.size() != n_imus)
        throw LengthMismatch("track " + track.track_id +
                             ": IMU count differs from calibration");
      const double t_boundary = track.aided_duration;
      const double t_end = track.aided_duration + track.open_loop_duration;

      std::vector<GyroTrack> aided, open;
      for (const auto& g : track.gyro) {
        aided.push_back(slice_track(g, 0.0, t_boundary));
        open.push_back(slice_track(g, t_boundary, t_end));
      }
      if (aided.front().size() < 2 || open.front().size() < 2)
        throw TooFewSamples("track " + track.track_id + ": window too short");

      const OrientationTrajectory gt_aided =
          interpolate_trajectory(track.gt, aided.front().timestamps);

      // Stage II: bias states only. Initialize each bias trajectory at the
      // mean mismatch between corrected measurements and the ground-truth
      // rates; the walk prior keeps it near-constant anyway.
      std::vector<ImuStateEstimate> init(n_imus);
      for (std::size_t i = 0; i < n_imus; ++i) {
        Vec3 mean = Vec3::Zero();
        for (std::size_t k = 0; k + 1 < gt_aided.size(); ++k) {
          const double dt = gt_aided.timestamps[k + 1] - gt_aided.timestamps[k];
          const Vec3 omega_m =
              log_map(gt_aided.rotations[k].transpose() * gt_aided.rotations[k + 1]) /
              dt;
          mean += calib.params[i].intrinsics.c * aided[i].omega_meas[k] -
                  calib.params[i].extrinsics.r_master_imu.transpose() * omega_m;
        }
        mean /= static_cast<double>(gt_aided.size() - 1);
        init[i].bias.assign(gt_aided.size(), mean);
      }
      const std::vector<ImuStateEstimate> states =
          optimize_stage2(aided, gt_aided, calib.params, cfg.stage2, init);

      std::vector<OrientationTrajectory> est(n_imus);
      std::vector<Vec3> frozen_biases;
      for (std::size_t i = 0; i < n_imus; ++i) {
        est[i].timestamps = gt_aided.timestamps;
        est[i].rotations.reserve(gt_aided.size());
        for (const auto& z : states[i].orientation_tangent)
          est[i].rotations.push_back(exp_map(z));
        frozen_biases.push_back(states[i].bias.back());
      }

      // Selection trials: restart every IMU from the ground-truth pose at the
      // window start so the error series reflects the current per-axis rate
      // residual instead of drift accumulated since t = 0.
      const std::size_t p = std::min(cfg.window_p, gt_aided.size());
      const std::size_t w0 = gt_aided.size() - p;
      OrientationTrajectory gt_window;
      for (std::size_t k = w0; k < gt_aided.size(); ++k)
        gt_window.push_back(gt_aided.timestamps[k], gt_aided.rotations[k]);
      std::vector<AxisErrorSeries> errors;
      for (std::size_t i = 0; i < n_imus; ++i) {
        OrientationTrajectory trial;
        Rotation r = gt_window.rotations.front();
        trial.push_back(gt_window.timestamps.front(), r);
        for (std::size_t k = w0; k + 1 < gt_aided.size(); ++k) {
          const double dt = gt_aided.timestamps[k + 1] - gt_aided.timestamps[k];
          const Vec3 v = correct_measurement(aided[i].omega_meas[k],
                                             calib.params[i].intrinsics,
                                             states[i].bias[k]);
          r = integrate_step(r, calib.params[i].extrinsics.r_master_imu * v, dt);
          trial.push_back(gt_aided.timestamps[k + 1], r);
        }
        errors.push_back(
            axis_errors(gt_window, trial, extrinsics[i], p, static_cast<int>(i)));
      }

      AxisSelection bac;
      bac.chosen = select_best_axes(errors);
      bac.composition = composition_matrix(bac.chosen, extrinsics);
      bac.window_p = p;

      // Common open-loop start for all methods: the aided estimate at the
      // boundary, which the Master aid keeps at the ground-truth pose.
      const Rotation r0 = gt_aided.rotations.back();

      // Held-out ground truth at the horizon sample times.
      const auto& open_ts = open.front().timestamps;
      std::vector<double> horizon_ts;
      std::vector<std::size_t> horizon_idx;
      for (double h : horizons) {
        const std::size_t k = nearest_index(open_ts, open_ts.front() + h);
        horizon_idx.push_back(k);
        horizon_ts.push_back(open_ts[k]);
      }
      const OrientationTrajectory gt_horizon =
          interpolate_trajectory(track.gt, horizon_ts);

      std::vector<std::vector<double>> method_errors;
      for (const auto& name : methods) {
        OrientationTrajectory traj;
        if (name == "AVE") {
          std::vector<std::pair<double, Vec3>> fused;
          for (std::size_t k = 0; k < open_ts.size(); ++k) {
            std::vector<Vec3> samples;
            for (std::size_t i = 0; i < n_imus; ++i)
              samples.push_back(open[i].omega_meas[k]);
            fused.emplace_back(open_ts[k], ave_fuse(samples, imu_pairs, frozen_biases));
          }
          traj = integrate_master(r0, fused);
        } else {
          AxisSelection sel = bac;
          if (name == "BAC-2") {
            std::vector<AxisErrorSeries> subset;
            for (int i : cfg.bac2_imus) subset.push_back(errors[i]);
            const std::array<int, 3> local = select_best_axes(subset);
            for (int axis = 0; axis < 3; ++axis)
              sel.chosen[axis] = cfg.bac2_imus[local[axis]];
            sel.composition = composition_matrix(sel.chosen, extrinsics);
          } else if (name != "BAC") {
            const int i = static_cast<int>(std::strtol(name.c_str() + 11, nullptr, 10));
            sel.chosen = {i, i, i};
            sel.composition = composition_matrix(sel.chosen, extrinsics);
          }
          traj = open_loop_estimate(r0, open, sel, calib.params, frozen_biases,
                                    track.open_loop_duration);
        }

        std::vector<double> errs;
        for (std::size_t h = 0; h < horizons.size(); ++h) {
          const std::size_t k = std::min(horizon_idx[h], traj.size() - 1);
          errs.push_back(
              geodesic_distance(gt_horizon.rotations[h], traj.rotations[k]));
        }
        method_errors.push_back(std::move(errs));
      }

      for (int axis = 0; axis < 3; ++axis)
        result.usage.frequency[bac.chosen[axis]][axis] += 1.0;
      ++used_tracks;
      for (std::size_t m = 0; m < methods.size(); ++m) {
        result.methods[m].track_ids.push_back(track.track_id);
        result.methods[m].errors.push_back(std::move(method_errors[m]));
      }
    } catch (const Error& e) {
      result.failures.push_back({track.track_id, e.what()});
    }
  }

  if (used_tracks > 0)
    for (auto& row : result.usage.frequency)
      for (double& f : row) f /= static_cast<double>(used_tracks);

  aggregate_method_stats(result);
  return result;
}

}  // namespace mimu
