#include <random>

#include <benchmark/benchmark.h>

#include "mimu/calibrate.hpp"
#include "mimu/estimator.hpp"
#include "mimu/harness.hpp"
#include "mimu/so3.hpp"

namespace {

mimu::Vec3 random_vec(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng)};
}

void BM_ExpLog(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const mimu::Vec3 v = random_vec(rng, 1.5);
  for (auto _ : state)
    benchmark::DoNotOptimize(mimu::log_map(mimu::exp_map(v)));
}
BENCHMARK(BM_ExpLog);

void BM_IntegrateMaster(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::vector<std::pair<double, mimu::Vec3>> stream;
  for (int k = 0; k < 3420; ++k)
    stream.emplace_back(k / 342.0, random_vec(rng, 0.8));
  for (auto _ : state)
    benchmark::DoNotOptimize(
        mimu::integrate_master(mimu::Rotation::Identity(), stream));
}
BENCHMARK(BM_IntegrateMaster);

void BM_CalibrationCostGrad(benchmark::State& state) {
  mimu::SuiteConfig cfg;
  cfg.aided_secs = 2.0;
  cfg.open_secs = 0.0;
  mimu::SyntheticTruth truth;
  const mimu::Track track = mimu::generate_calibration_track(cfg, 3, &truth);
  const mimu::OrientationTrajectory gt =
      mimu::interpolate_trajectory(track.gt, track.gyro.front().timestamps);
  mimu::CalibrationConfig ccfg;
  mimu::CalibrationProblem problem(track.gyro, gt, ccfg,
                                   mimu::CalibrationProblem::Stage::kFullParameters,
                                   truth.params);
  std::vector<mimu::ImuStateEstimate> states(track.gyro.size());
  const Eigen::VectorXd x = problem.pack(truth.params, states);
  Eigen::VectorXd g(problem.dim());
  for (auto _ : state) benchmark::DoNotOptimize(problem.cost_and_gradient(x, g));
}
BENCHMARK(BM_CalibrationCostGrad);

}  // namespace

BENCHMARK_MAIN();
