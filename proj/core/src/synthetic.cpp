#include <cmath>
#include <cstdio>
#include <random>

#include "mimu/errors.hpp"
#include "mimu/estimator.hpp"
#include "mimu/harness.hpp"
#include "mimu/so3.hpp"

namespace mimu {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double timestamp_ns(std::size_t idx, double rate) {
  // Nanosecond-quantized grid so the %.9f file format round-trips exactly.
  return static_cast<double>(std::llround(static_cast<double>(idx) * 1e9 / rate)) * 1e-9;
}

// Band-limited random Master-frame rate signal: a few sinusoids per axis.
struct MotionModel {
  struct Harmonic {
    double amp, freq_hz, phase;
  };
  std::array<std::vector<Harmonic>, 3> harmonics;

  static MotionModel random(std::mt19937_64& rng, double amplitude, double max_freq) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    MotionModel m;
    for (int axis = 0; axis < 3; ++axis) {
      const int n = 4;
      for (int h = 0; h < n; ++h) {
        Harmonic hh;
        hh.amp = amplitude * (0.25 + 0.75 * u01(rng)) / n * 2.0;
        hh.freq_hz = max_freq * (0.08 + 0.92 * u01(rng));
        hh.phase = 2.0 * M_PI * u01(rng);
        m.harmonics[axis].push_back(hh);
      }
    }
    return m;
  }

  Vec3 rate(double t) const {
    Vec3 w;
    for (int axis = 0; axis < 3; ++axis) {
      double s = 0.0;
      for (const auto& h : harmonics[axis])
        s += h.amp * std::sin(2.0 * M_PI * h.freq_hz * t + h.phase);
      w[axis] = s;
    }
    return w;
  }
};

// Integrates the motion model on a 10x fine grid and returns the truth
// subsampled at the gyro rate plus ground truth at the gt rate.
void build_truth(const MotionModel& motion, double duration, double gyro_rate,
                 double gt_rate, OrientationTrajectory* truth_gyro,
                 OrientationTrajectory* truth_gt) {
  const int oversample = 10;
  const double fine_rate = gyro_rate * oversample;
  const std::size_t n_fine = static_cast<std::size_t>(std::llround(duration * fine_rate)) + 1;

  OrientationTrajectory fine;
  fine.timestamps.reserve(n_fine);
  fine.rotations.reserve(n_fine);
  Rotation r = Rotation::Identity();
  fine.push_back(timestamp_ns(0, fine_rate), r);
  for (std::size_t k = 1; k < n_fine; ++k) {
    const double t_prev = fine.timestamps.back();
    const double t = timestamp_ns(k, fine_rate);
    r = integrate_step(r, motion.rate(0.5 * (t_prev + t)), t - t_prev);
    if (k % 5000 == 0) r = project_rotation(r);
    fine.push_back(t, r);
  }

  truth_gyro->timestamps.clear();
  truth_gyro->rotations.clear();
  const std::size_t n_gyro = static_cast<std::size_t>(std::llround(duration * gyro_rate)) + 1;
  for (std::size_t k = 0; k < n_gyro; ++k) {
    const std::size_t idx = k * oversample;
    truth_gyro->push_back(fine.timestamps[idx], fine.rotations[idx]);
  }

  truth_gt->timestamps.clear();
  truth_gt->rotations.clear();
  const std::size_t n_gt = static_cast<std::size_t>(std::llround(duration * gt_rate)) + 1;
  for (std::size_t k = 0; k < n_gt; ++k) {
    std::size_t idx = static_cast<std::size_t>(
        std::llround(static_cast<double>(k) * fine_rate / gt_rate));
    idx = std::min(idx, fine.timestamps.size() - 1);
    truth_gt->push_back(fine.timestamps[idx], fine.rotations[idx]);
  }
}

SystematicErrorProfile random_profile(std::mt19937_64& rng, const SuiteConfig& cfg,
                                      double duration) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  SystematicErrorProfile profile;
  if (!cfg.systematic_errors) return profile;
  for (int axis = 0; axis < 3; ++axis) {
    double covered = 0.0;
    while (covered < duration) {
      SystematicErrorProfile::Segment seg;
      seg.duration = cfg.segment_min_s + (cfg.segment_max_s - cfg.segment_min_s) * u01(rng);
      if (u01(rng) >= cfg.clean_segment_prob) {
        const double mag = cfg.offset_min + (cfg.offset_max - cfg.offset_min) * u01(rng);
        seg.offset = (u01(rng) < 0.5 ? -1.0 : 1.0) * mag;
      }
      profile.segments[axis].push_back(seg);
      covered += seg.duration;
    }
    if (u01(rng) >= cfg.clean_scale_prob) {
      const double mag = cfg.scale_pert_max * (0.2 + 0.8 * u01(rng));
      profile.scale_pert[axis] = (u01(rng) < 0.5 ? -1.0 : 1.0) * mag;
    }
  }
  return profile;
}

Track make_track(const SuiteConfig& cfg, const std::vector<ImuParams>& params,
                 std::uint64_t track_seed, const std::string& track_id,
                 double motion_amplitude, double motion_max_freq,
                 bool with_systematic) {
  std::mt19937_64 rng(track_seed);
  const MotionModel motion = MotionModel::random(rng, motion_amplitude, motion_max_freq);
  const double duration = cfg.aided_secs + cfg.open_secs;

  Track track;
  track.track_id = track_id;
  track.aided_duration = cfg.aided_secs;
  track.open_loop_duration = cfg.open_secs;

  OrientationTrajectory truth_gyro;
  build_truth(motion, duration, cfg.gyro_rate_hz, cfg.gt_rate_hz, &truth_gyro,
              &track.gt);

  std::vector<std::pair<ImuIntrinsics, ImuExtrinsics>> imus;
  std::vector<SystematicErrorProfile> profiles;
  std::vector<Vec3> initial_biases;
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (const auto& p : params) {
    imus.emplace_back(p.intrinsics, p.extrinsics);
    SystematicErrorProfile profile;
    if (with_systematic) profile = random_profile(rng, cfg, duration);
    profiles.push_back(profile);
    Vec3 b0(u01(rng) - 0.5, u01(rng) - 0.5, u01(rng) - 0.5);
    initial_biases.push_back(b0 * 6e-3);  // turn-on bias within +-3e-3 rad/s
  }

  auto sim = simulate_mimu(truth_gyro, imus, profiles,
                           mix_seed(track_seed, 0xabcdULL), initial_biases);
  for (auto& [gyro, bias] : sim) track.gyro.push_back(std::move(gyro));
  return track;
}

}  // namespace

std::vector<ImuParams> suite_true_params(const SuiteConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(mix_seed(seed, 1));
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<ImuParams> params(cfg.n_imus);
  for (auto& p : params) {
    Mat3 c = Mat3::Identity();
    for (int i = 0; i < 3; ++i)
      c(i, i) = 1.0 + cfg.c_diag_range * (2.0 * u01(rng) - 1.0);
    c(1, 0) = cfg.c_offdiag_range * (2.0 * u01(rng) - 1.0);
    c(2, 0) = cfg.c_offdiag_range * (2.0 * u01(rng) - 1.0);
    c(2, 1) = cfg.c_offdiag_range * (2.0 * u01(rng) - 1.0);
    p.intrinsics.c = c;
    p.intrinsics.gamma = cfg.gamma;
    p.intrinsics.sigma_g = Vec3::Constant(cfg.sigma_g);
    p.intrinsics.sigma_b = Vec3::Constant(cfg.sigma_b);

    Vec3 axis(u01(rng) - 0.5, u01(rng) - 0.5, u01(rng) - 0.5);
    if (axis.norm() < 1e-9) axis = Vec3::UnitX();
    axis.normalize();
    p.extrinsics.r_master_imu = exp_map(axis * (cfg.extrinsic_pert_rad * u01(rng)));
  }
  return params;
}

std::vector<Track> generate_synthetic_suite(const SuiteConfig& cfg, std::uint64_t seed) {
  const std::vector<ImuParams> params = suite_true_params(cfg, seed);
  std::vector<Track> tracks;
  tracks.reserve(cfg.n_tracks);
  for (int t = 0; t < cfg.n_tracks; ++t) {
    char name[32];
    std::snprintf(name, sizeof(name), "track_%03d", t);
    tracks.push_back(make_track(cfg, params, mix_seed(seed, 100 + t), name,
                                cfg.motion_amplitude, cfg.motion_max_freq_hz,
                                cfg.systematic_errors));
  }
  return tracks;
}

Track generate_calibration_track(const SuiteConfig& cfg, std::uint64_t seed,
                                 SyntheticTruth* truth) {
  const std::vector<ImuParams> params = suite_true_params(cfg, seed);
  if (truth) truth->params = params;
  // Richer excitation than common tracks, and no systematic error: the
  // calibration trajectory is assumed to be collected carefully.
  SuiteConfig calib_cfg = cfg;
  calib_cfg.open_secs = 0.0;
  return make_track(calib_cfg, params, mix_seed(seed, 7), "calib",
                    1.5 * cfg.motion_amplitude, 1.25 * cfg.motion_max_freq_hz,
                    /*with_systematic=*/false);
}

}  // namespace mimu
