#include <algorithm>
#include <cmath>

#include <doctest.h>

#include "mimu/errors.hpp"
#include "mimu/harness.hpp"
#include "mimu/so3.hpp"

using namespace mimu;

namespace {

struct CleanSuite {
  std::vector<Track> tracks;
  CalibrationResult calib;
};

CleanSuite clean_suite(int n_tracks, std::uint64_t seed) {
  SuiteConfig cfg;
  cfg.n_tracks = n_tracks;
  cfg.sigma_g = 0.0;
  cfg.sigma_b = 0.0;
  cfg.systematic_errors = false;
  CleanSuite s;
  s.tracks = generate_synthetic_suite(cfg, seed);
  s.calib.params = suite_true_params(cfg, seed);
  s.calib.states.resize(s.calib.params.size());
  return s;
}

PipelineConfig fast_config() {
  PipelineConfig cfg;
  cfg.stage2.max_epochs = 20;
  return cfg;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("noiseless suite with true calibration yields tiny open-loop errors") {
  CleanSuite s = clean_suite(3, 31);
  const PipelineResult res = run_pipeline(s.tracks, s.calib, fast_config());
  CHECK(res.failures.empty());
  REQUIRE(!res.methods.empty());
  for (const auto& m : res.methods) {
    REQUIRE(m.errors.size() == s.tracks.size());
    for (const auto& row : m.errors) {
      CHECK(row.front() < 1e-9);  // horizon 0 starts at the boundary pose
      // Residual error is the rate-sampling discretization of the gyro
      // stream (truth moves within a sample period), a few mrad over 5 s.
      for (double e : row) CHECK(e < 1e-2);
    }
  }
}

TEST_CASE("default method set and report shape") {
  CleanSuite s = clean_suite(2, 32);
  const PipelineResult res = run_pipeline(s.tracks, s.calib, fast_config());
  std::vector<std::string> names;
  for (const auto& m : res.methods) names.push_back(m.method);
  for (const char* expected :
       {"single-imu-0", "single-imu-1", "single-imu-2", "AVE", "BAC", "BAC-2"})
    CHECK(std::find(names.begin(), names.end(), expected) != names.end());
  for (const auto& m : res.methods) {
    CHECK(m.horizons.front() == 0.0);
    CHECK(m.horizons.back() == s.tracks.front().open_loop_duration);
    CHECK(m.median_error.size() == m.horizons.size());
  }
}

TEST_CASE("axis usage frequencies are a distribution per axis") {
  CleanSuite s = clean_suite(4, 33);
  const PipelineResult res = run_pipeline(s.tracks, s.calib, fast_config());
  REQUIRE(res.usage.frequency.size() == s.calib.params.size());
  for (int axis = 0; axis < 3; ++axis) {
    double col = 0.0;
    for (const auto& row : res.usage.frequency) col += row[axis];
    CHECK(col == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("method list order does not change per-method results") {
  CleanSuite s = clean_suite(2, 34);
  PipelineConfig a = fast_config();
  a.methods = {"AVE", "BAC", "single-imu-0"};
  PipelineConfig b = fast_config();
  b.methods = {"single-imu-0", "BAC", "AVE"};
  const PipelineResult ra = run_pipeline(s.tracks, s.calib, a);
  const PipelineResult rb = run_pipeline(s.tracks, s.calib, b);
  for (const auto& ma : ra.methods) {
    const auto it = std::find_if(rb.methods.begin(), rb.methods.end(),
                                 [&](const MethodReport& m) { return m.method == ma.method; });
    REQUIRE(it != rb.methods.end());
    for (std::size_t t = 0; t < ma.errors.size(); ++t)
      for (std::size_t h = 0; h < ma.errors[t].size(); ++h)
        CHECK(ma.errors[t][h] == it->errors[t][h]);
  }
}

TEST_CASE("invalid configurations are rejected") {
  CleanSuite s = clean_suite(1, 35);
  PipelineConfig bad = fast_config();
  bad.methods = {"AVE", "nonsense"};
  CHECK_THROWS_AS(run_pipeline(s.tracks, s.calib, bad), SchemaError);

  PipelineConfig oob = fast_config();
  oob.bac2_imus = {0, 7};
  CHECK_THROWS_AS(run_pipeline(s.tracks, s.calib, oob), OutOfRange);

  CHECK_THROWS_AS(run_pipeline({}, s.calib, fast_config()), EmptyInput);
}

TEST_CASE("per-track failures are reported, not fatal") {
  CleanSuite s = clean_suite(2, 36);
  s.tracks[1].gyro.pop_back();  // IMU count mismatch on one track only
  const PipelineResult res = run_pipeline(s.tracks, s.calib, fast_config());
  REQUIRE(res.failures.size() == 1);
  CHECK(res.failures[0].track_id == s.tracks[1].track_id);
  for (const auto& m : res.methods) CHECK(m.errors.size() == 1);
}

TEST_CASE("suite generation is deterministic and seed-sensitive") {
  SuiteConfig cfg;
  cfg.n_tracks = 2;
  const auto a = generate_synthetic_suite(cfg, 99);
  const auto b = generate_synthetic_suite(cfg, 99);
  const auto c = generate_synthetic_suite(cfg, 100);
  double same = 0.0, other = 0.0;
  for (std::size_t k = 0; k < a[0].gyro[0].size(); ++k) {
    same += (a[0].gyro[0].omega_meas[k] - b[0].gyro[0].omega_meas[k]).norm();
    other += (a[0].gyro[0].omega_meas[k] - c[0].gyro[0].omega_meas[k]).norm();
  }
  CHECK(same == 0.0);
  CHECK(other > 0.0);
}

}  // TEST_SUITE
