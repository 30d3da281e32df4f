#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cfabc/abc.hpp"
#include "cfabc/transport.hpp"

namespace cfabc {

/// Per-channel deviation of every particle against every test pair
/// (rows = pairs, columns = particles). Unlike training there is no
/// down-sampling.
struct CellErrorMatrices {
  Eigen::MatrixXd position;
  Eigen::MatrixXd speed;
  Eigen::MatrixXd accel;
};

CellErrorMatrices evaluate_cells(const std::vector<Particle>& particles,
                                 const Dataset& test, TrajectoryNorm norm,
                                 const SimOptions& opts = {});

/// Weighted cost matrix cost[pair][particle] feeding the transport
/// distances; +inf marks aborted simulations.
Eigen::MatrixXd build_cost_matrix(const CellErrorMatrices& cells,
                                  const ScoreWeights& weights);
Eigen::MatrixXd build_cost_matrix(const std::vector<Particle>& particles,
                                  const Dataset& test,
                                  const ScoreWeights& weights,
                                  TrajectoryNorm norm = TrajectoryNorm::RMS,
                                  const SimOptions& opts = {});

struct AverageErrors {
  double position = 0.0;  // m
  double speed = 0.0;     // m/s
  double accel = 0.0;     // m/s^2
};

/// Mean over all (pair, particle) cells of the per-channel deviations.
AverageErrors average_errors(const CellErrorMatrices& cells);

/// The six evaluation metrics of one particle set on one test set.
struct MetricRow {
  double avg_position = 0.0;
  double avg_speed = 0.0;
  double avg_accel = 0.0;
  double minimum = 0.0;
  double beta_ws = 0.0;
  double ws = 0.0;
};

MetricRow evaluate_metrics(const std::vector<Particle>& particles,
                           const Dataset& test, const ScoreWeights& weights,
                           double beta, TrajectoryNorm norm = TrajectoryNorm::RMS,
                           const SimOptions& opts = {});

/// Position error of each particle's rollout on one pair, per time step
/// (rows = time, columns = particles, ordered as given).
Eigen::MatrixXd position_error_evolution(const std::vector<Particle>& particles,
                                         const CFPair& pair,
                                         const SimOptions& opts = {});

}  // namespace cfabc
