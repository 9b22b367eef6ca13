#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fusion_track/measurements.hpp"
#include "fusion_track/scenario.hpp"

namespace fusion_track {

inline constexpr int kStateDim = 6;

// [x, y, vx, vy, ax, ay]
using StateVector = Eigen::Matrix<double, kStateDim, 1>;
using StateMatrix = Eigen::Matrix<double, kStateDim, kStateDim>;
using StateRow = Eigen::Matrix<double, 1, kStateDim>;

namespace state_index {
inline constexpr int kX = 0, kY = 1, kVx = 2, kVy = 3, kAx = 4, kAy = 5;
}

struct EstimatorState {
  std::int64_t epoch = 0;
  StateVector mean = StateVector::Zero();
  StateMatrix covariance = StateMatrix::Zero();

  Vec2 position() const { return mean.head<2>(); }
};

// Symmetric to 1e-9 relative and eigenvalues >= -1e-9 * trace.
bool is_symmetric_psd(const StateMatrix& covariance);

struct ProcessModel {
  double dt_s = 0.1;
  double jerk_psd = 1.0;
};

StateMatrix transition_matrix(double dt_s);
// White-jerk discretization of the constant-acceleration model, per axis.
StateMatrix process_noise(const ProcessModel& model);

EstimatorState initialize(const TruthSample& truth0, const ScenarioConfig& config, RandomStream& rng);

// Constant-acceleration propagation; advances the epoch by one.
EstimatorState predict(const EstimatorState& state, const ProcessModel& model);

enum class ObservationKind { Speed, AccelX, AccelY, Range, Azimuth, PositionX, PositionY };

struct ObservationRow {
  ObservationKind kind = ObservationKind::Range;
  int bs_id = -1;  // cellular rows only

  std::string label() const;
};

struct JacobianResult {
  Eigen::MatrixXd jacobian;  // rows.size() x 6
  std::vector<ObservationRow> rows;
  bool speed_row_dropped = false;
};

// Rows: speed, ax, ay (modes with IMU), then range and azimuth per active site.
// The speed row is dropped when the velocity is zero.
JacobianResult measurement_jacobian(const StateVector& mean, std::span<const BsSite> active,
                                    FusionMode mode);

// One scalar observation linearized about the prior mean.
struct LinearizedObservation {
  ObservationRow row;
  double measured = 0.0;
  double predicted = 0.0;
  StateRow jacobian = StateRow::Zero();
  double variance = 0.0;
  bool angular = false;  // innovation wrapped to (-pi, pi]
};

struct InnovationDiagnostics {
  std::vector<ObservationRow> rows;
  Eigen::VectorXd innovation;
  Eigen::MatrixXd innovation_covariance;
  double nis = 0.0;  // normalized innovation squared
  bool speed_row_dropped = false;
  std::size_t gated_out = 0;
};

struct UpdateResult {
  EstimatorState state;
  InnovationDiagnostics diagnostics;
};

struct UpdateOptions {
  std::optional<double> gate_chi2;
};

// Stacked EKF correction in Joseph form. Observations with infinite variance carry no
// information and are skipped.
UpdateResult correct(const EstimatorState& prior, std::span<const LinearizedObservation> observations,
                     const UpdateOptions& options = {});

UpdateResult update(const EstimatorState& prior, const MeasurementBatch& batch,
                    std::span<const BsSite> sites, FusionMode mode, const UpdateOptions& options = {});

}  // namespace fusion_track
