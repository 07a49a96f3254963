// Command-line front end: synthetic suite generation, Stage-I calibration,
// the full evaluation pipeline, report re-aggregation and a self-test.
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mimu/errors.hpp"
#include "mimu/estimator.hpp"
#include "mimu/harness.hpp"
#include "mimu/so3.hpp"

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t comma = s.find(',', pos);
    out.push_back(s.substr(pos, (comma == std::string::npos ? s.size() : comma) - pos));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  out.erase(std::remove(out.begin(), out.end(), std::string()), out.end());
  return out;
}

std::vector<std::string> list_track_dirs(const std::string& suite_dir) {
  std::vector<std::string> dirs;
  for (const auto& entry : fs::directory_iterator(suite_dir))
    if (entry.is_directory() && fs::exists(entry.path() / "gyro.csv") &&
        entry.path().filename() != "calib")
      dirs.push_back(entry.path().string());
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) throw mimu::EmptyInput("no track directories under " + suite_dir);
  return dirs;
}

int cmd_simulate(std::uint64_t seed, const mimu::SuiteConfig& cfg, const std::string& out) {
  const std::vector<mimu::Track> tracks = mimu::generate_synthetic_suite(cfg, seed);
  for (const auto& t : tracks) mimu::save_track((fs::path(out) / t.track_id).string(), t);
  const mimu::Track calib = mimu::generate_calibration_track(cfg, seed);
  mimu::save_track((fs::path(out) / "calib").string(), calib);
  std::cout << "wrote " << tracks.size() << " tracks + calibration track to " << out
            << "\n";
  return 0;
}

int cmd_calibrate(const std::string& track_dir, const mimu::CalibrationConfig& cfg,
                  const std::string& out) {
  const mimu::Track track = mimu::load_track(track_dir);
  const mimu::OrientationTrajectory gt =
      mimu::interpolate_trajectory(track.gt, track.gyro.front().timestamps);
  const mimu::CalibrationResult result = mimu::optimize_stage1(track.gyro, gt, cfg);
  mimu::save_calibration(out, result);
  std::cout << "calibrated " << result.params.size() << " IMUs, cost "
            << result.final_cost << ", epochs " << result.epochs << " -> " << out
            << "\n";
  return 0;
}

int cmd_run(const std::string& suite_dir, const std::string& calib_file,
            const mimu::PipelineConfig& cfg, double aided_secs, double open_secs,
            const std::string& out) {
  const mimu::CalibrationResult calib = mimu::load_calibration(calib_file);
  std::vector<mimu::Track> tracks;
  for (const auto& dir : list_track_dirs(suite_dir)) {
    mimu::Track t = mimu::load_track(dir);
    if (aided_secs > 0.0) t.aided_duration = aided_secs;
    if (open_secs > 0.0) t.open_loop_duration = open_secs;
    tracks.push_back(std::move(t));
  }
  const mimu::PipelineResult result = mimu::run_pipeline(tracks, calib, cfg);
  for (const auto& p : mimu::emit_reports(result, out)) std::cout << p << "\n";
  if (!result.failures.empty())
    std::cerr << result.failures.size() << " track(s) failed; see summary.txt\n";
  return 0;
}

int cmd_report(const std::string& in_dir, const std::string& out) {
  const mimu::PipelineResult result = mimu::load_report_tables(in_dir);
  for (const auto& p : mimu::emit_reports(result, out)) std::cout << p << "\n";
  return 0;
}

int cmd_check(std::uint64_t seed) {
  using namespace mimu;
  // Exp/Log roundtrip.
  const Vec3 v(0.3, -0.2, 0.9);
  if ((log_map(exp_map(v)) - v).norm() > 1e-12) throw NumericalError("check: exp/log");
  // Constant-rate integration against the closed form.
  Rotation r = Rotation::Identity();
  for (int k = 0; k < 342; ++k) r = integrate_step(r, v, 1.0 / 342.0);
  if (geodesic_distance(r, exp_map(v)) > 1e-12)
    throw NumericalError("check: constant-rate integration");
  // Noise-free composition roundtrip on the default suite parameters.
  SuiteConfig cfg;
  const auto params = suite_true_params(cfg, seed);
  std::vector<ImuExtrinsics> extr;
  for (const auto& p : params) extr.push_back(p.extrinsics);
  const Mat3 a = composition_matrix({0, 1, 2}, extr);
  const Vec3 omega(0.5, -1.1, 0.7);
  Vec3 comps;
  for (int axis = 0; axis < 3; ++axis)
    comps[axis] = (extr[axis].r_master_imu.transpose() * omega)[axis];
  if ((compose_omega(a, comps) - omega).norm() > 1e-10)
    throw NumericalError("check: axis composition roundtrip");
  std::cout << "ok\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-IMU gyroscope fusion: best-axes composition pipeline"};
  app.require_subcommand(1);

  std::uint64_t seed = 42;
  int imus = 3, tracks = 44;
  std::size_t window_p = 342;
  double aided_secs = 10.0, open_secs = 5.0;
  std::string methods_arg, out, in_dir, calib_file;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "master RNG seed");
    sub->add_option("--imus", imus, "number of IMUs");
    sub->add_option("--tracks", tracks, "number of tracks");
    sub->add_option("--window-p", window_p, "axis-selection window length (samples)");
    sub->add_option("--aided-secs", aided_secs, "aided window length (s)");
    sub->add_option("--open-secs", open_secs, "open-loop window length (s)");
    sub->add_option("--methods", methods_arg, "comma-separated method list");
    sub->add_option("--out", out, "output path");
  };

  CLI::App* sim = app.add_subcommand("simulate", "generate a synthetic suite");
  add_common(sim);

  CLI::App* cal = app.add_subcommand("calibrate", "Stage-I calibration on one track");
  cal->add_option("track_dir", in_dir, "calibration track directory")->required();
  add_common(cal);
  mimu::CalibrationConfig cal_cfg;
  cal->add_option("--lr-initial", cal_cfg.lr_initial, "Adam initial step size");
  cal->add_option("--lr-final", cal_cfg.lr_final, "Adam final step size");
  cal->add_option("--epochs", cal_cfg.max_epochs, "Adam epoch budget");
  cal->add_option("--patience", cal_cfg.convergence_patience, "convergence window");
  cal->add_option("--tol", cal_cfg.convergence_tol, "relative convergence tolerance");

  CLI::App* run = app.add_subcommand("run", "Stage II + axis selection + reports");
  run->add_option("suite_dir", in_dir, "suite directory")->required();
  run->add_option("--calib", calib_file, "calibration file")->required();
  add_common(run);

  CLI::App* rep = app.add_subcommand("report", "re-aggregate report tables");
  rep->add_option("report_dir", in_dir, "directory with per_track_errors.csv")->required();
  add_common(rep);

  CLI::App* chk = app.add_subcommand("check", "invariant self-test");
  add_common(chk);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage errors exit 1, --help exits 0
  }

  try {
    if (sim->parsed()) {
      if (out.empty()) throw CLI::RequiredError("--out");
      mimu::SuiteConfig cfg;
      cfg.n_imus = imus;
      cfg.n_tracks = tracks;
      cfg.aided_secs = aided_secs;
      cfg.open_secs = open_secs;
      return cmd_simulate(seed, cfg, out);
    }
    if (cal->parsed()) {
      if (out.empty()) throw CLI::RequiredError("--out");
      return cmd_calibrate(in_dir, cal_cfg, out);
    }
    if (run->parsed()) {
      if (out.empty()) throw CLI::RequiredError("--out");
      mimu::PipelineConfig cfg;
      cfg.window_p = window_p;
      cfg.methods = split_csv(methods_arg);
      return cmd_run(in_dir, calib_file, cfg, aided_secs, open_secs, out);
    }
    if (rep->parsed()) {
      if (out.empty()) throw CLI::RequiredError("--out");
      return cmd_report(in_dir, out);
    }
    if (chk->parsed()) return cmd_check(seed);
  } catch (const CLI::Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const mimu::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const mimu::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const mimu::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
