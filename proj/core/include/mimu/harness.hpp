#ifndef MIMU_HARNESS_HPP
#define MIMU_HARNESS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mimu/bac.hpp"
#include "mimu/calibrate.hpp"
#include "mimu/gyro_model.hpp"
#include "mimu/trajectory.hpp"

namespace mimu {

// One evaluation unit: per-IMU gyro streams plus Master ground truth poses.
struct Track {
  std::string track_id;
  std::vector<GyroTrack> gyro;
  OrientationTrajectory gt;
  double aided_duration = 10.0;
  double open_loop_duration = 5.0;
};

struct MethodReport {
  std::string method;
  std::vector<double> horizons;  // seconds past the aided/open-loop boundary
  // Per track: geodesic error in rad at each horizon. Indexed [track][horizon].
  std::vector<std::string> track_ids;
  std::vector<std::vector<double>> errors;
  // 100 * mean over tracks of (AVE error / this method's error), per horizon.
  std::vector<double> ratio_vs_ave;
  std::vector<double> median_error;
};

struct AxisUsageReport {
  // frequency[imu][axis] over all tracks; columns sum to 1 per axis.
  std::vector<std::array<double, 3>> frequency;
};

struct TrackFailure {
  std::string track_id;
  std::string reason;
};

struct PipelineResult {
  std::vector<MethodReport> methods;
  AxisUsageReport usage;
  std::vector<TrackFailure> failures;
};

// --- track files -----------------------------------------------------------

// Reads <dir>/gyro.csv, <dir>/gt.csv and <dir>/track.txt. Timestamps are
// normalized to start at zero.
Track load_track(const std::string& dir);
void save_track(const std::string& dir, const Track& track);

// --- time alignment --------------------------------------------------------

// Offset (seconds) to add to the gyro timestamps so that its |omega| profile
// best correlates with the |omega| profile finite-differenced from gt.
// Resolved to sub-sample accuracy by parabolic refinement.
double time_align(const GyroTrack& gyro, const OrientationTrajectory& gt,
                  double search_window);

// --- synthetic suite -------------------------------------------------------

struct SuiteConfig {
  int n_imus = 3;
  int n_tracks = 44;
  double aided_secs = 10.0;
  double open_secs = 5.0;
  double gyro_rate_hz = 342.0;
  double gt_rate_hz = 30.0;

  // MEMS-class defaults.
  double sigma_g = 2e-3;   // rad/s per sample
  double sigma_b = 1e-5;   // rad/s per step
  double gamma = 1e-4;
  double c_diag_range = 0.05;      // diag(C) in 1 +- range
  double c_offdiag_range = 0.02;   // lower off-diagonals in +- range
  double extrinsic_pert_rad = 0.0872664625997165;  // <= 5 deg

  // Injected systematic error. A segment is clean with probability
  // sparsity, otherwise carries a signed offset in [offset_min, offset_max].
  bool systematic_errors = true;
  double offset_min = 5e-3;   // rad/s
  double offset_max = 2e-2;   // rad/s
  double segment_min_s = 8.0;
  double segment_max_s = 20.0;
  double clean_segment_prob = 0.8;
  double scale_pert_max = 0.03;  // per-axis |scale perturbation| bound
  double clean_scale_prob = 0.5;

  // Trajectory excitation.
  double motion_amplitude = 0.8;  // rad/s scale of the random rate signal
  double motion_max_freq_hz = 0.8;
};

// Deterministic synthetic tracks with smooth random motion and per-track
// resampled systematic profiles.
std::vector<Track> generate_synthetic_suite(const SuiteConfig& cfg, std::uint64_t seed);

// A dedicated high-diversity, systematic-error-free calibration track, plus
// the true per-IMU parameters used to generate the whole suite (for tests).
struct SyntheticTruth {
  std::vector<ImuParams> params;
};
Track generate_calibration_track(const SuiteConfig& cfg, std::uint64_t seed,
                                 SyntheticTruth* truth = nullptr);

// True per-IMU parameters for a given suite seed (the suite and the
// calibration track share them).
std::vector<ImuParams> suite_true_params(const SuiteConfig& cfg, std::uint64_t seed);

// --- pipeline --------------------------------------------------------------

struct PipelineConfig {
  std::size_t window_p = 342;
  std::vector<std::string> methods;  // default: single-imu-i, AVE, BAC, BAC-2
  std::vector<int> bac2_imus = {1, 2};
  CalibrationConfig stage2;
  PipelineConfig() {
    stage2.lr_initial = 3e-4;
    stage2.lr_final = 1e-6;
    stage2.max_epochs = 200;
    stage2.convergence_tol = 1e-8;
    stage2.convergence_patience = 25;
  }
};

// Stage II + axis selection + open-loop runs for every method, per track.
PipelineResult run_pipeline(const std::vector<Track>& tracks,
                            const CalibrationResult& calib, const PipelineConfig& cfg);

// --- reports ---------------------------------------------------------------

// Recomputes median_error and ratio_vs_ave from the per-track errors.
// Ratios are left empty when AVE is absent or only one method is present.
void aggregate_method_stats(PipelineResult& result);

// Writes error-vs-horizon, ratio, per-track and axis-usage tables plus a
// summary. Returns the written paths.
std::vector<std::string> emit_reports(const PipelineResult& result,
                                      const std::string& out_dir);

// Rebuilds a PipelineResult from a previously written report directory
// (per_track_errors.csv plus axis_usage.csv) and recomputes the aggregates.
PipelineResult load_report_tables(const std::string& dir);

}  // namespace mimu

#endif
