#include "fusion_track/ekf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fusion_track/errors.hpp"

namespace fusion_track {

namespace {

using namespace state_index;

constexpr double kMinSpeed = 1e-9;
// Sensors configured with zero noise are treated as near-exact rather than exact so that
// redundant noiseless rows keep the innovation covariance invertible.
constexpr double kMinSensorVariance = 1e-12;
constexpr double kSingularRcond = 1e-15;

const BsSite& find_site(std::span<const BsSite> sites, int id) {
  if (id >= 0 && static_cast<std::size_t>(id) < sites.size() && sites[id].id == id) return sites[id];
  for (const BsSite& s : sites) {
    if (s.id == id) return s;
  }
  throw ContractError("measurement references unknown base station " + std::to_string(id));
}

void check_distinct(const Vec2& p, const BsSite& site) {
  if ((p - site.position).squaredNorm() == 0.0) {
    throw GeometryError("vehicle estimate coincides with base station " + std::to_string(site.id));
  }
}

LinearizedObservation range_row(const StateVector& mean, const BsSite& site) {
  const Vec2 d = mean.head<2>() - site.position;
  const double r = d.norm();
  LinearizedObservation o;
  o.row = {ObservationKind::Range, site.id};
  o.predicted = r;
  o.jacobian(kX) = d.x() / r;
  o.jacobian(kY) = d.y() / r;
  return o;
}

LinearizedObservation azimuth_row(const StateVector& mean, const BsSite& site) {
  const Vec2 d = mean.head<2>() - site.position;
  const double r2 = d.squaredNorm();
  LinearizedObservation o;
  o.row = {ObservationKind::Azimuth, site.id};
  o.predicted = wrap_angle(std::atan2(d.y(), d.x()));
  o.jacobian(kX) = -d.y() / r2;
  o.jacobian(kY) = d.x() / r2;
  o.angular = true;
  return o;
}

LinearizedObservation speed_row(const StateVector& mean) {
  const Vec2 v = mean.segment<2>(kVx);
  const double s = v.norm();
  LinearizedObservation o;
  o.row = {ObservationKind::Speed, -1};
  o.predicted = s;
  o.jacobian(kVx) = v.x() / s;
  o.jacobian(kVy) = v.y() / s;
  return o;
}

LinearizedObservation accel_row(const StateVector& mean, int axis) {
  LinearizedObservation o;
  o.row = {axis == 0 ? ObservationKind::AccelX : ObservationKind::AccelY, -1};
  o.predicted = mean(kAx + axis);
  o.jacobian(kAx + axis) = 1.0;
  return o;
}

bool has_speed(const StateVector& mean) { return mean.segment<2>(kVx).norm() > kMinSpeed; }

// Index of the first row whose leading principal block of S is not positive definite.
std::size_t first_singular_row(const Eigen::MatrixXd& s) {
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    const Eigen::MatrixXd lead = s.topLeftCorner(i + 1, i + 1);
    Eigen::LLT<Eigen::MatrixXd> llt(lead);
    if (llt.info() != Eigen::Success || !(llt.rcond() > kSingularRcond)) return static_cast<std::size_t>(i);
  }
  return static_cast<std::size_t>(s.rows() - 1);
}

}  // namespace

bool is_symmetric_psd(const StateMatrix& p) {
  if (!p.allFinite()) return false;
  const double scale = std::max(p.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  if ((p - p.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) return false;
  const StateMatrix sym = 0.5 * (p + p.transpose());
  Eigen::SelfAdjointEigenSolver<StateMatrix> eig(sym, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff() >= -1e-9 * std::abs(sym.trace());
}

StateMatrix transition_matrix(double dt) {
  StateMatrix f = StateMatrix::Identity();
  for (int axis = 0; axis < 2; ++axis) {
    f(kX + axis, kVx + axis) = dt;
    f(kX + axis, kAx + axis) = 0.5 * dt * dt;
    f(kVx + axis, kAx + axis) = dt;
  }
  return f;
}

StateMatrix process_noise(const ProcessModel& model) {
  const double dt = model.dt_s;
  const double q = model.jerk_psd;
  const double dt2 = dt * dt, dt3 = dt2 * dt, dt4 = dt3 * dt, dt5 = dt4 * dt;
  Eigen::Matrix3d block;
  block << dt5 / 20.0, dt4 / 8.0, dt3 / 6.0,
           dt4 / 8.0,  dt3 / 3.0, dt2 / 2.0,
           dt3 / 6.0,  dt2 / 2.0, dt;
  StateMatrix out = StateMatrix::Zero();
  for (int axis = 0; axis < 2; ++axis) {
    const int idx[3] = {kX + axis, kVx + axis, kAx + axis};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) out(idx[i], idx[j]) = q * block(i, j);
  }
  return out;
}

EstimatorState initialize(const TruthSample& truth0, const ScenarioConfig& config, RandomStream& rng) {
  const double s_pos = config.noise.sigma_init_pos_m;
  const double s_vel = config.filter.init_sigma_vel_mps;
  const double s_acc = config.filter.init_sigma_accel_mps2;

  EstimatorState st;
  st.epoch = truth0.epoch;
  st.mean(kX) = truth0.position.x() + rng.normal(s_pos);
  st.mean(kY) = truth0.position.y() + rng.normal(s_pos);
  st.mean(kVx) = config.speed_mps;
  st.mean(kVy) = 0.0;
  st.mean(kAx) = 0.0;
  st.mean(kAy) = 0.0;
  StateVector diag;
  diag << s_pos * s_pos, s_pos * s_pos, s_vel * s_vel, s_vel * s_vel, s_acc * s_acc, s_acc * s_acc;
  st.covariance = diag.asDiagonal();
  return st;
}

EstimatorState predict(const EstimatorState& state, const ProcessModel& model) {
  if (!state.mean.allFinite() || !state.covariance.allFinite()) {
    throw NumericError("predict: non-finite estimator state at epoch " + std::to_string(state.epoch));
  }
  const StateMatrix f = transition_matrix(model.dt_s);
  EstimatorState out;
  out.epoch = state.epoch + 1;
  out.mean = f * state.mean;
  out.covariance = f * state.covariance * f.transpose() + process_noise(model);
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
  return out;
}

std::string ObservationRow::label() const {
  switch (kind) {
    case ObservationKind::Speed:
      return "imu.speed";
    case ObservationKind::AccelX:
      return "imu.accel_x";
    case ObservationKind::AccelY:
      return "imu.accel_y";
    case ObservationKind::Range:
      return "range[bs " + std::to_string(bs_id) + "]";
    case ObservationKind::Azimuth:
      return "azimuth[bs " + std::to_string(bs_id) + "]";
    case ObservationKind::PositionX:
      return "position.x";
    case ObservationKind::PositionY:
      return "position.y";
  }
  return "unknown";
}

JacobianResult measurement_jacobian(const StateVector& mean, std::span<const BsSite> active,
                                    FusionMode mode) {
  std::vector<LinearizedObservation> obs;
  JacobianResult out;
  if (uses_imu(mode)) {
    if (has_speed(mean)) {
      obs.push_back(speed_row(mean));
    } else {
      out.speed_row_dropped = true;
    }
    obs.push_back(accel_row(mean, 0));
    obs.push_back(accel_row(mean, 1));
  }
  if (uses_cellular(mode)) {
    for (const BsSite& site : active) {
      check_distinct(mean.head<2>(), site);
      obs.push_back(range_row(mean, site));
      obs.push_back(azimuth_row(mean, site));
    }
  }
  out.jacobian.resize(static_cast<Eigen::Index>(obs.size()), kStateDim);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    out.jacobian.row(static_cast<Eigen::Index>(i)) = obs[i].jacobian;
    out.rows.push_back(obs[i].row);
  }
  return out;
}

UpdateResult correct(const EstimatorState& prior, std::span<const LinearizedObservation> observations,
                     const UpdateOptions& options) {
  std::vector<const LinearizedObservation*> used;
  used.reserve(observations.size());
  for (const auto& o : observations) {
    if (std::isinf(o.variance) && o.variance > 0.0) continue;
    if (!std::isfinite(o.measured) || !std::isfinite(o.variance)) {
      throw NumericError("update: non-finite observation " + o.row.label(), o.row.label());
    }
    used.push_back(&o);
  }

  const StateMatrix& p = prior.covariance;
  UpdateResult result{prior, {}};

  auto assemble = [&](Eigen::MatrixXd& h, Eigen::VectorXd& nu, Eigen::VectorXd& r) {
    const auto m = static_cast<Eigen::Index>(used.size());
    h.resize(m, kStateDim);
    nu.resize(m);
    r.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const LinearizedObservation& o = *used[static_cast<std::size_t>(i)];
      h.row(i) = o.jacobian;
      const double diff = o.measured - o.predicted;
      nu(i) = o.angular ? wrap_angle(diff) : diff;
      r(i) = o.variance;
    }
  };

  Eigen::MatrixXd h;
  Eigen::VectorXd nu, r;
  assemble(h, nu, r);

  if (options.gate_chi2 && !used.empty()) {
    std::vector<const LinearizedObservation*> kept;
    for (std::size_t i = 0; i < used.size(); ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const double s_ii = h.row(ii) * p * h.row(ii).transpose() + r(ii);
      if (s_ii > 0.0 && nu(ii) * nu(ii) / s_ii > *options.gate_chi2) {
        ++result.diagnostics.gated_out;
      } else {
        kept.push_back(used[i]);
      }
    }
    used.swap(kept);
    assemble(h, nu, r);
  }

  for (const auto* o : used) result.diagnostics.rows.push_back(o->row);
  if (used.empty()) return result;

  Eigen::MatrixXd s = h * p * h.transpose();
  s.diagonal() += r;
  result.diagnostics.innovation = nu;
  result.diagnostics.innovation_covariance = s;

  Eigen::LLT<Eigen::MatrixXd> llt(s);
  if (!s.allFinite() || llt.info() != Eigen::Success || !(llt.rcond() > kSingularRcond)) {
    const std::size_t bad = s.allFinite() ? first_singular_row(s) : 0;
    const std::string block = used[bad]->row.label();
    throw NumericError("update: singular innovation covariance at observation " + block, block);
  }

  // K = P H^T S^-1, computed as (S^-1 H P)^T with P symmetric.
  const Eigen::MatrixXd k = llt.solve(h * p).transpose();
  result.state.mean = prior.mean + k * nu;

  const StateMatrix ikh = StateMatrix::Identity() - k * h;
  StateMatrix post = ikh * p * ikh.transpose() + k * r.asDiagonal() * k.transpose();
  result.state.covariance = 0.5 * (post + post.transpose());
  result.diagnostics.nis = nu.dot(llt.solve(nu));

  if (!result.state.mean.allFinite() || !result.state.covariance.allFinite()) {
    throw NumericError("update: non-finite posterior at epoch " + std::to_string(prior.epoch));
  }
  return result;
}

UpdateResult update(const EstimatorState& prior, const MeasurementBatch& batch,
                    std::span<const BsSite> sites, FusionMode mode, const UpdateOptions& options) {
  if (batch.epoch != prior.epoch) {
    throw ContractError("update: batch epoch " + std::to_string(batch.epoch) +
                        " does not match state epoch " + std::to_string(prior.epoch));
  }
  const auto var = [](double sigma) { return std::max(sigma * sigma, kMinSensorVariance); };

  std::vector<LinearizedObservation> obs;
  bool speed_dropped = false;

  if (uses_imu(mode)) {
    if (!batch.imu) throw ContractError("update: mode " + std::string(to_string(mode)) + " needs IMU data");
    const ImuReading& imu = *batch.imu;
    if (has_speed(prior.mean)) {
      auto o = speed_row(prior.mean);
      o.measured = imu.speed_mps;
      o.variance = var(imu.sigma_speed_mps);
      obs.push_back(o);
    } else {
      speed_dropped = true;
    }
    for (int axis = 0; axis < 2; ++axis) {
      auto o = accel_row(prior.mean, axis);
      o.measured = imu.accel_mps2(axis);
      o.variance = var(imu.sigma_accel_mps2);
      obs.push_back(o);
    }
  }

  if (uses_cellular(mode)) {
    if (batch.cellular.empty()) {
      throw ContractError("update: mode " + std::string(to_string(mode)) + " needs cellular data");
    }
    for (const CellularObservation& c : batch.cellular) {
      const BsSite& site = find_site(sites, c.bs_id);
      check_distinct(prior.position(), site);
      auto rr = range_row(prior.mean, site);
      rr.measured = c.range_m;
      rr.variance = var(c.sigma_range_m);
      obs.push_back(rr);
      auto ar = azimuth_row(prior.mean, site);
      ar.measured = c.azimuth_rad;
      ar.variance = var(c.sigma_aoa_rad);
      obs.push_back(ar);
    }
  }

  UpdateResult result = correct(prior, obs, options);
  result.diagnostics.speed_row_dropped = speed_dropped;
  return result;
}

}  // namespace fusion_track
