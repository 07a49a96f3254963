#include "mimu/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <Eigen/Geometry>

#include "mimu/errors.hpp"
#include "mimu/so3.hpp"

namespace mimu {

Vec3 orientation_residual(const Rotation& r_gt, const Rotation& r_est) {
  return log_map(r_gt.transpose() * r_est);
}

Vec3 bias_residual(const Vec3& b_k, const Vec3& b_k1, double gamma) {
  return (b_k1 - b_k) + gamma * b_k;
}

namespace {

Mat3 lower_triangular_from(const double* p) {
  Mat3 c;
  c << p[0], 0.0, 0.0,
       p[1], p[2], 0.0,
       p[3], p[4], p[5];
  return c;
}

void lower_triangular_to(const Mat3& c, double* p) {
  p[0] = c(0, 0);
  p[1] = c(1, 0);
  p[2] = c(1, 1);
  p[3] = c(2, 0);
  p[4] = c(2, 1);
  p[5] = c(2, 2);
}

}  // namespace

CalibrationProblem::CalibrationProblem(std::vector<GyroTrack> tracks,
                                       OrientationTrajectory gt, CalibrationConfig cfg,
                                       Stage stage, std::vector<ImuParams> reference_params)
    : tracks_(std::move(tracks)),
      gt_(std::move(gt)),
      cfg_(cfg),
      stage_(stage),
      reference_params_(std::move(reference_params)) {
  gt_.validate();
  if (gt_.empty()) throw EmptyInput("calibration: empty ground truth");
  if (tracks_.empty()) throw EmptyInput("calibration: no tracks");
  if (reference_params_.empty()) reference_params_.resize(tracks_.size());
  if (reference_params_.size() != tracks_.size())
    throw LengthMismatch("calibration: one reference parameter set per IMU required");
  const std::size_t n = gt_.size();
  for (const auto& t : tracks_) {
    t.validate();
    if (t.size() != n)
      throw LengthMismatch("calibration: track length differs from ground truth");
    for (std::size_t k = 0; k < n; ++k)
      if (std::abs(t.timestamps[k] - gt_.timestamps[k]) > 1e-9)
        throw LengthMismatch("calibration: track timestamps differ from ground truth");
  }
  dt_.resize(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k)
    dt_[k] = gt_.timestamps[k + 1] - gt_.timestamps[k];

  param_block_ = (stage_ == Stage::kFullParameters) ? 9 : 0;
  per_imu_dim_ = param_block_ + 3 * static_cast<int>(n) *
                                    (cfg_.free_orientation_states ? 2 : 1);
}

int CalibrationProblem::dim() const {
  return per_imu_dim_ * static_cast<int>(tracks_.size());
}

double CalibrationProblem::bias_sigma() const {
  return std::max(cfg_.sigma_nb, 1e-12);
}

Eigen::VectorXd CalibrationProblem::pack(const std::vector<ImuParams>& params,
                                         const std::vector<ImuStateEstimate>& states) const {
  const std::size_t N = tracks_.size();
  const std::size_t n = gt_.size();
  if (params.size() != N || states.size() != N)
    throw LengthMismatch("pack: wrong number of parameter/state blocks");
  const double snb = bias_sigma();
  const double sth = std::max(cfg_.sigma_theta, 1e-12);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(dim());
  for (std::size_t i = 0; i < N; ++i) {
    double* xi = x.data() + i * per_imu_dim_;
    if (stage_ == Stage::kFullParameters) {
      lower_triangular_to(params[i].intrinsics.c, xi);
      const Vec3 text = log_map(
          reference_params_[i].extrinsics.r_master_imu.transpose() *
          params[i].extrinsics.r_master_imu);
      xi[6] = text.x();
      xi[7] = text.y();
      xi[8] = text.z();
    }
    const double gamma = reference_params_[i].intrinsics.gamma;
    double* bx = xi + param_block_;
    auto bias_at = [&](std::size_t k) {
      return (k < states[i].bias.size()) ? states[i].bias[k] : Vec3::Zero();
    };
    Eigen::Map<Vec3>{bx} = bias_at(0) / kBiasScale;
    for (std::size_t k = 0; k + 1 < n; ++k)
      Eigen::Map<Vec3>(bx + 3 * (k + 1)) =
          (bias_at(k + 1) - (1.0 - gamma) * bias_at(k)) / snb;
    if (cfg_.free_orientation_states) {
      double* zx = bx + 3 * n;
      for (std::size_t k = 0; k < n; ++k) {
        Vec3 zeta = Vec3::Zero();
        if (k < states[i].orientation_tangent.size())
          zeta = log_map(gt_.rotations[k].transpose() *
                         exp_map(states[i].orientation_tangent[k]));
        Eigen::Map<Vec3>(zx + 3 * k) = zeta / sth;
      }
    }
  }
  return x;
}

void CalibrationProblem::unpack(const Eigen::VectorXd& x, std::vector<ImuParams>& params,
                                std::vector<ImuStateEstimate>& states) const {
  const std::size_t N = tracks_.size();
  params = reference_params_;
  for (std::size_t i = 0; i < N; ++i) {
    const double* xi = x.data() + i * per_imu_dim_;
    if (stage_ == Stage::kFullParameters) {
      params[i].intrinsics.c = lower_triangular_from(xi);
      params[i].extrinsics.r_master_imu =
          reference_params_[i].extrinsics.r_master_imu *
          exp_map(Vec3(xi[6], xi[7], xi[8]));
    }
  }
  states = recover_states(x);
}

std::vector<ImuStateEstimate> CalibrationProblem::recover_states(
    const Eigen::VectorXd& x) const {
  const std::size_t N = tracks_.size();
  const std::size_t n = gt_.size();
  std::vector<ImuStateEstimate> states(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double* xi = x.data() + i * per_imu_dim_;
    Mat3 c = reference_params_[i].intrinsics.c;
    Rotation r_mi = reference_params_[i].extrinsics.r_master_imu;
    if (stage_ == Stage::kFullParameters) {
      c = lower_triangular_from(xi);
      r_mi = r_mi * exp_map(Vec3(xi[6], xi[7], xi[8]));
    }
    const double gamma = reference_params_[i].intrinsics.gamma;
    const double snb = bias_sigma();
    const double sth = std::max(cfg_.sigma_theta, 1e-12);
    const double* bx = xi + param_block_;
    states[i].bias.resize(n);
    states[i].orientation_tangent.resize(n);
    states[i].bias[0] = kBiasScale * Eigen::Map<const Vec3>(bx);
    for (std::size_t k = 0; k + 1 < n; ++k)
      states[i].bias[k + 1] = (1.0 - gamma) * states[i].bias[k] +
                              snb * Eigen::Map<const Vec3>(bx + 3 * (k + 1));
    if (cfg_.free_orientation_states) {
      const double* zx = bx + 3 * n;
      for (std::size_t k = 0; k < n; ++k)
        states[i].orientation_tangent[k] = log_map(
            gt_.rotations[k] *
            exp_map(Vec3(sth * zx[3 * k], sth * zx[3 * k + 1], sth * zx[3 * k + 2])));
    } else {
      Rotation r = gt_.rotations[0];
      states[i].orientation_tangent[0] = log_map(r);
      for (std::size_t k = 0; k + 1 < n; ++k) {
        const Vec3 v =
            (c * tracks_[i].omega_meas[k] - states[i].bias[k]) * dt_[k];
        r = r * exp_map(r_mi * v);
        states[i].orientation_tangent[k + 1] = log_map(r);
      }
    }
  }
  return states;
}

double CalibrationProblem::cost(const Eigen::VectorXd& x) const { return eval(x, nullptr); }

void CalibrationProblem::gradient(const Eigen::VectorXd& x, Eigen::VectorXd& g) const {
  g.resize(dim());
  eval(x, &g);
}

double CalibrationProblem::cost_and_gradient(const Eigen::VectorXd& x,
                                             Eigen::VectorXd& g) const {
  g.resize(dim());
  return eval(x, &g);
}

double CalibrationProblem::eval(const Eigen::VectorXd& x, Eigen::VectorXd* g) const {
  if (x.size() != dim()) throw LengthMismatch("calibration: wrong parameter vector size");
  const std::size_t N = tracks_.size();
  const std::size_t n = gt_.size();
  const double inv_th2 = 1.0 / (cfg_.sigma_theta * cfg_.sigma_theta);
  const double snb = bias_sigma();
  const double sth = std::max(cfg_.sigma_theta, 1e-12);
  const bool full = (stage_ == Stage::kFullParameters);
  const bool free_states = cfg_.free_orientation_states;

  if (g) g->setZero();
  double total = 0.0;

  // Scratch reused across IMUs.
  std::vector<Rotation> r(n);
  std::vector<Vec3> theta(n > 0 ? n - 1 : 0), v(n > 0 ? n - 1 : 0), e(n);
  std::vector<Vec3> b(n), grad_b(n);

  for (std::size_t i = 0; i < N; ++i) {
    const double* xi = x.data() + i * per_imu_dim_;
    double* gi = g ? g->data() + i * per_imu_dim_ : nullptr;

    Mat3 c = reference_params_[i].intrinsics.c;
    Rotation r_mi = reference_params_[i].extrinsics.r_master_imu;
    Vec3 theta_ext = Vec3::Zero();
    if (full) {
      c = lower_triangular_from(xi);
      theta_ext = Vec3(xi[6], xi[7], xi[8]);
      r_mi = r_mi * exp_map(theta_ext);
    }
    const double gamma = reference_params_[i].intrinsics.gamma;
    const double* bx = xi + param_block_;
    double* gb = gi ? gi + param_block_ : nullptr;
    const auto& w = tracks_[i].omega_meas;

    // Decode the whitened bias trajectory.
    b[0] = kBiasScale * Eigen::Map<const Vec3>(bx);
    for (std::size_t k = 0; k + 1 < n; ++k)
      b[k + 1] = (1.0 - gamma) * b[k] + snb * Eigen::Map<const Vec3>(bx + 3 * (k + 1));
    if (g) std::fill(grad_b.begin(), grad_b.end(), Vec3::Zero());

    Mat3 grad_c = Mat3::Zero();
    Vec3 grad_phi = Vec3::Zero();  // right perturbation of R_{M<-I}

    if (!free_states) {
      // Orientation states reconstructed from the kinematic chain.
      r[0] = gt_.rotations[0];
      e[0] = Vec3::Zero();
      for (std::size_t k = 0; k + 1 < n; ++k) {
        v[k] = (c * w[k] - b[k]) * dt_[k];
        theta[k] = r_mi * v[k];
        r[k + 1] = r[k] * exp_map(theta[k]);
        e[k + 1] = log_map(gt_.rotations[k + 1].transpose() * r[k + 1]);
        total += e[k + 1].squaredNorm() * inv_th2;
      }
      if (g && n > 1) {
        // Backward pass: grad wrt theta_j is Jr(theta_j)^T R_{j+1}^T S_j with
        // S_j the backward cumulative sum of world-frame residual pulls.
        Vec3 s = Vec3::Zero();
        for (std::size_t j = n - 1; j-- > 0;) {
          const Vec3 gk =
              right_jacobian_inv(e[j + 1]).transpose() * (2.0 * inv_th2 * e[j + 1]);
          s += r[j + 1] * gk;
          const Vec3 grad_theta =
              right_jacobian(theta[j]).transpose() * (r[j + 1].transpose() * s);
          const Vec3 a = r_mi.transpose() * grad_theta;
          grad_b[j] -= dt_[j] * a;
          if (full) {
            grad_c.noalias() += (dt_[j] * a) * w[j].transpose();
            grad_phi += v[j].cross(a);
          }
        }
      }
    } else {
      // Literal free-state parameterization: zeta_k anchors R_k = gt_k Exp(zeta_k);
      // a soft kinematic residual ties consecutive states to the measurements.
      const double* zx = bx + 3 * n;
      double* gz = gb ? gb + 3 * n : nullptr;
      for (std::size_t k = 0; k < n; ++k) {
        const Vec3 zk = sth * Vec3(zx[3 * k], zx[3 * k + 1], zx[3 * k + 2]);
        r[k] = gt_.rotations[k] * exp_map(zk);
        e[k] = zk;  // orientation residual in this chart
        total += zk.squaredNorm() * inv_th2;
        if (g) {
          const Vec3 pull = sth * (2.0 * inv_th2) * zk;
          gz[3 * k] += pull.x();
          gz[3 * k + 1] += pull.y();
          gz[3 * k + 2] += pull.z();
        }
      }
      for (std::size_t k = 0; k + 1 < n; ++k) {
        v[k] = (c * w[k] - b[k]) * dt_[k];
        theta[k] = r_mi * v[k];
        const Mat3 m = r[k].transpose() * r[k + 1];
        const Vec3 ck = log_map(exp_map(-theta[k]) * m);
        total += ck.squaredNorm() * inv_th2;
        if (g) {
          const Vec3 h = right_jacobian_inv(ck).transpose() * (2.0 * inv_th2 * ck);
          const Vec3 zk1 =
              sth * Vec3(zx[3 * (k + 1)], zx[3 * (k + 1) + 1], zx[3 * (k + 1) + 2]);
          const Vec3 zk = sth * Vec3(zx[3 * k], zx[3 * k + 1], zx[3 * k + 2]);
          const Vec3 gz1 = sth * (right_jacobian(zk1).transpose() * h);
          const Vec3 gz0 = -sth * (right_jacobian(zk).transpose() * (m * h));
          gz[3 * (k + 1)] += gz1.x();
          gz[3 * (k + 1) + 1] += gz1.y();
          gz[3 * (k + 1) + 2] += gz1.z();
          gz[3 * k] += gz0.x();
          gz[3 * k + 1] += gz0.y();
          gz[3 * k + 2] += gz0.z();
          const Vec3 grad_theta =
              -(right_jacobian(theta[k]).transpose() * (exp_map(ck) * h));
          const Vec3 a = r_mi.transpose() * grad_theta;
          grad_b[k] -= dt_[k] * a;
          if (full) {
            grad_c.noalias() += (dt_[k] * a) * w[k].transpose();
            grad_phi += v[k].cross(a);
          }
        }
      }
    }

    // Bias random-walk residuals: in whitened coordinates the prior is an
    // identity quadratic on the innovations.
    for (std::size_t k = 0; k + 1 < n; ++k) {
      const Eigen::Map<const Vec3> rk(bx + 3 * (k + 1));
      total += rk.squaredNorm();
      if (g) Eigen::Map<Vec3>(gb + 3 * (k + 1)) += 2.0 * rk;
    }

    // Chain the data-term bias gradients through the whitening: the decode is
    // causal, so a backward suffix accumulation gives the parameter gradient.
    if (g && n > 0) {
      Vec3 s = Vec3::Zero();
      for (std::size_t k = n; k-- > 0;) {
        s = grad_b[k] + (1.0 - gamma) * s;
        if (k > 0) Eigen::Map<Vec3>(gb + 3 * k) += snb * s;
      }
      Eigen::Map<Vec3>(gb) += kBiasScale * s;
    }

    if (g && full) {
      gi[0] += grad_c(0, 0);
      gi[1] += grad_c(1, 0);
      gi[2] += grad_c(1, 1);
      gi[3] += grad_c(2, 0);
      gi[4] += grad_c(2, 1);
      gi[5] += grad_c(2, 2);
      const Vec3 gext = right_jacobian(theta_ext).transpose() * grad_phi;
      gi[6] += gext.x();
      gi[7] += gext.y();
      gi[8] += gext.z();
    }
  }
  return total;
}

double total_cost(const std::vector<GyroTrack>& tracks, const OrientationTrajectory& gt,
                  const std::vector<ImuParams>& params,
                  const std::vector<ImuStateEstimate>& states,
                  const CalibrationConfig& cfg) {
  CalibrationProblem problem(tracks, gt, cfg, CalibrationProblem::Stage::kFullParameters,
                             params);
  return problem.cost(problem.pack(params, states));
}

double gradient_check(const DifferentiableProblem& problem, const Eigen::VectorXd& x,
                      double step) {
  Eigen::VectorXd g;
  problem.gradient(x, g);
  Eigen::VectorXd xp = x;
  double worst = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + step;
    const double cp = problem.cost(xp);
    xp[i] = x[i] - step;
    const double cm = problem.cost(xp);
    xp[i] = x[i];
    const double fd = (cp - cm) / (2.0 * step);
    const double dev = std::abs(g[i] - fd) /
                       std::max({1.0, std::abs(g[i]), std::abs(fd)});
    worst = std::max(worst, dev);
  }
  return worst;
}

Eigen::VectorXd adam_minimize(const DifferentiableProblem& problem,
                              const Eigen::VectorXd& x0, const CalibrationConfig& cfg,
                              OptimizerReport* report) {
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  Eigen::VectorXd x = x0;
  Eigen::VectorXd m = Eigen::VectorXd::Zero(x.size());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(x.size());
  Eigen::VectorXd g(x.size());

  Eigen::VectorXd x_best = x0;
  double best = std::numeric_limits<double>::infinity();
  double prev = std::numeric_limits<double>::infinity();
  double window_best = std::numeric_limits<double>::infinity();
  int increase_streak = 0;
  int epochs_run = 0;
  double b1t = 1.0, b2t = 1.0;

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const double c = problem.cost_and_gradient(x, g);
    epochs_run = epoch + 1;

    if (c < best) {
      best = c;
      x_best = x;
    }
    if (c > prev) {
      if (++increase_streak >= 50) throw Diverged("adam: cost increased 50 consecutive epochs");
    } else {
      increase_streak = 0;
    }
    prev = c;

    if (cfg.convergence_patience > 0 &&
        (epoch + 1) % cfg.convergence_patience == 0) {
      if (std::isfinite(window_best) &&
          window_best - best <= cfg.convergence_tol * std::max(std::abs(window_best), 1e-300))
        break;
      window_best = best;
    }

    const double progress =
        (cfg.max_epochs > 1) ? static_cast<double>(epoch) / (cfg.max_epochs - 1) : 1.0;
    const double lr =
        cfg.lr_final + 0.5 * (cfg.lr_initial - cfg.lr_final) * (1.0 + std::cos(M_PI * progress));

    b1t *= kBeta1;
    b2t *= kBeta2;
    m = kBeta1 * m + (1.0 - kBeta1) * g;
    v = kBeta2 * v + (1.0 - kBeta2) * g.cwiseProduct(g);
    x.array() -= lr * (m.array() / (1.0 - b1t)) /
                 ((v.array() / (1.0 - b2t)).sqrt() + kEps);
  }

  if (report) {
    report->final_cost = best;
    report->epochs = epochs_run;
  }
  return x_best;
}

namespace {

void check_excitation(const OrientationTrajectory& gt, double min_rad) {
  double swept = 0.0;
  for (std::size_t k = 1; k < gt.size(); ++k)
    swept = std::max(swept, geodesic_distance(gt.rotations[0], gt.rotations[k]));
  if (swept < min_rad)
    throw Degenerate("calibration: rotational excitation below threshold");
}

// Mean mismatch between the raw measurements and the body rate implied by
// the ground truth under the nominal extrinsics. For zero-mean motion the
// rotated-signal and scale terms average out, leaving the bias level.
Vec3 initial_bias_guess(const GyroTrack& track, const OrientationTrajectory& gt,
                        const ImuParams& nominal) {
  if (gt.size() < 2) return Vec3::Zero();
  Vec3 mean = Vec3::Zero();
  std::size_t count = 0;
  for (std::size_t k = 0; k + 1 < gt.size(); ++k) {
    const double dt = gt.timestamps[k + 1] - gt.timestamps[k];
    const Vec3 omega_m =
        log_map(gt.rotations[k].transpose() * gt.rotations[k + 1]) / dt;
    mean += nominal.intrinsics.c * track.omega_meas[k] -
            nominal.extrinsics.r_master_imu.transpose() * omega_m;
    ++count;
  }
  return mean / static_cast<double>(count);
}

// One-shot fit against the finite-difference ground-truth rates: linear
// least squares for the affine map omega_m ~ M*omega_meas + m, then the
// unique QL factorization M = R*C with C lower-triangular, positive-diagonal
// (the model's parameterization). Initializes the batch optimizer.
void direct_fit(const GyroTrack& track, const std::vector<Vec3>& omega_m,
                Mat3* c, Rotation* r_mi, Vec3* b) {
  const std::size_t n = omega_m.size();
  Eigen::Matrix4d ata = Eigen::Matrix4d::Zero();
  Eigen::Matrix<double, 4, 3> atb = Eigen::Matrix<double, 4, 3>::Zero();
  Eigen::Vector4d a;
  for (std::size_t k = 0; k < n; ++k) {
    a << track.omega_meas[k], 1.0;
    ata.noalias() += a * a.transpose();
    atb.noalias() += a * omega_m[k].transpose();
  }
  const Eigen::Matrix<double, 4, 3> sol = ata.ldlt().solve(atb);
  const Mat3 map = sol.topRows<3>().transpose();
  const Vec3 shift = sol.row(3).transpose();
  if (map.determinant() <= 0.0) return;  // keep the nominal initialization

  // QL via QR of the exchanged matrix: E*(E M E = QR)*E.
  Mat3 e = Mat3::Zero();
  e(0, 2) = e(1, 1) = e(2, 0) = 1.0;
  const Eigen::HouseholderQR<Mat3> qr(e * map * e);
  Mat3 q = e * Mat3(qr.householderQ()) * e;
  Mat3 l = e * Mat3(qr.matrixQR().triangularView<Eigen::Upper>()) * e;
  for (int j = 0; j < 3; ++j)
    if (l(j, j) < 0.0) {
      l.row(j) = -l.row(j);
      q.col(j) = -q.col(j);
    }
  *r_mi = q;
  *c = l;
  *b = -(q.transpose() * shift);
}

}  // namespace

CalibrationResult optimize_stage1(const std::vector<GyroTrack>& tracks,
                                  const OrientationTrajectory& gt,
                                  const CalibrationConfig& cfg,
                                  const std::vector<ImuParams>& nominal) {
  check_excitation(gt, cfg.min_excitation_rad);
  std::vector<ImuParams> ref = nominal;
  if (ref.empty()) ref.resize(tracks.size());

  std::vector<Vec3> omega_m(gt.size() > 0 ? gt.size() - 1 : 0);
  for (std::size_t k = 0; k + 1 < gt.size(); ++k)
    omega_m[k] = log_map(gt.rotations[k].transpose() * gt.rotations[k + 1]) /
                 (gt.timestamps[k + 1] - gt.timestamps[k]);

  std::vector<ImuStateEstimate> init(tracks.size());
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    Mat3 c = ref[i].intrinsics.c;
    Rotation r_mi = ref[i].extrinsics.r_master_imu;
    Vec3 b = initial_bias_guess(tracks[i], gt, ref[i]);
    direct_fit(tracks[i], omega_m, &c, &r_mi, &b);
    ref[i].intrinsics.c = c;
    ref[i].extrinsics.r_master_imu = r_mi;
    init[i].bias.assign(gt.size(), b);
  }

  CalibrationProblem problem(tracks, gt, cfg,
                             CalibrationProblem::Stage::kFullParameters, ref);
  const Eigen::VectorXd x0 = problem.pack(ref, init);
  OptimizerReport rep;
  const Eigen::VectorXd x = adam_minimize(problem, x0, cfg, &rep);

  CalibrationResult result;
  problem.unpack(x, result.params, result.states);
  result.final_cost = rep.final_cost;
  result.epochs = rep.epochs;
  return result;
}

std::vector<ImuStateEstimate> optimize_stage2(const std::vector<GyroTrack>& tracks,
                                              const OrientationTrajectory& gt,
                                              const std::vector<ImuParams>& fixed_params,
                                              const CalibrationConfig& cfg,
                                              const std::vector<ImuStateEstimate>& init_states,
                                              OptimizerReport* report) {
  CalibrationProblem problem(tracks, gt, cfg, CalibrationProblem::Stage::kStatesOnly,
                             fixed_params);
  std::vector<ImuStateEstimate> init = init_states;
  if (init.empty()) init.resize(tracks.size());
  const Eigen::VectorXd x0 = problem.pack(fixed_params, init);
  OptimizerReport rep;
  const Eigen::VectorXd x = adam_minimize(problem, x0, cfg, &rep);
  if (report) *report = rep;
  return problem.recover_states(x);
}

void save_calibration(const std::string& path, const CalibrationResult& result) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open calibration file for writing: " + path);
  char buf[64];
  auto fmt = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  out << "mimu-calibration v1\n";
  out << "imus " << result.params.size() << "\n";
  out << "cost " << fmt(result.final_cost) << "\n";
  out << "epochs " << result.epochs << "\n";
  for (std::size_t i = 0; i < result.params.size(); ++i) {
    out << "imu " << i << "\n";
    const Mat3& c = result.params[i].intrinsics.c;
    out << "C";
    for (int row = 0; row < 3; ++row)
      for (int col = 0; col < 3; ++col) out << " " << fmt(c(row, col));
    out << "\n";
    const Vec3 text = log_map(result.params[i].extrinsics.r_master_imu);
    out << "extrinsic_tangent " << fmt(text.x()) << " " << fmt(text.y()) << " "
        << fmt(text.z()) << "\n";
    Vec3 fb = Vec3::Zero();
    if (i < result.states.size() && !result.states[i].bias.empty())
      fb = result.states[i].bias.back();
    out << "final_bias " << fmt(fb.x()) << " " << fmt(fb.y()) << " " << fmt(fb.z())
        << "\n";
  }
  if (!out) throw IoError("failed writing calibration file: " + path);
}

CalibrationResult load_calibration(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open calibration file: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "mimu-calibration v1")
    throw ParseError("calibration file: bad header in " + path);

  CalibrationResult result;
  std::size_t n_imus = 0;
  std::size_t current = 0;
  bool have_imu = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "imus") {
      ss >> n_imus;
      result.params.resize(n_imus);
      result.states.resize(n_imus);
    } else if (key == "cost") {
      ss >> result.final_cost;
    } else if (key == "epochs") {
      ss >> result.epochs;
    } else if (key == "imu") {
      ss >> current;
      if (current >= n_imus) throw ParseError("calibration file: imu index out of range");
      have_imu = true;
    } else if (key == "C") {
      if (!have_imu) throw ParseError("calibration file: C before imu line");
      Mat3 c;
      for (int row = 0; row < 3; ++row)
        for (int col = 0; col < 3; ++col) ss >> c(row, col);
      result.params[current].intrinsics.c = c;
    } else if (key == "extrinsic_tangent") {
      Vec3 t;
      ss >> t.x() >> t.y() >> t.z();
      result.params[current].extrinsics.r_master_imu = exp_map(t);
    } else if (key == "final_bias") {
      Vec3 b;
      ss >> b.x() >> b.y() >> b.z();
      result.states[current].bias = {b};
    } else {
      throw ParseError("calibration file: unknown key '" + key + "'");
    }
    if (ss.fail()) throw ParseError("calibration file: malformed line '" + line + "'");
  }
  if (n_imus == 0) throw SchemaError("calibration file: missing imus count");
  return result;
}

}  // namespace mimu
