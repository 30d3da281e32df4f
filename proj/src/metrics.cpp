#include "cfabc/metrics.hpp"

#include <stdexcept>

namespace cfabc {

CellErrorMatrices evaluate_cells(const std::vector<Particle>& particles,
                                 const Dataset& test, TrajectoryNorm norm,
                                 const SimOptions& opts) {
  if (particles.empty() || test.empty())
    throw std::invalid_argument("evaluate_cells: empty particle set or test set");
  const Eigen::Index rows = static_cast<Eigen::Index>(test.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(particles.size());
  CellErrorMatrices cells{Eigen::MatrixXd(rows, cols),
                          Eigen::MatrixXd(rows, cols),
                          Eigen::MatrixXd(rows, cols)};
  for (Eigen::Index i = 0; i < rows; ++i) {
    const CFPair& pair = test.pairs[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < cols; ++j) {
      const SimulatedPortfolio sim =
          simulate_follower(particles[static_cast<std::size_t>(j)].params,
                            pair, opts);
      const ChannelErrors e = channel_errors(sim, pair.follower, norm);
      cells.position(i, j) = e.position;
      cells.speed(i, j) = e.speed;
      cells.accel(i, j) = e.accel;
    }
  }
  return cells;
}

Eigen::MatrixXd build_cost_matrix(const CellErrorMatrices& cells,
                                  const ScoreWeights& weights) {
  return weights.position * cells.position + weights.speed * cells.speed +
         weights.accel * cells.accel;
}

Eigen::MatrixXd build_cost_matrix(const std::vector<Particle>& particles,
                                  const Dataset& test,
                                  const ScoreWeights& weights,
                                  TrajectoryNorm norm, const SimOptions& opts) {
  return build_cost_matrix(evaluate_cells(particles, test, norm, opts),
                           weights);
}

AverageErrors average_errors(const CellErrorMatrices& cells) {
  return {cells.position.mean(), cells.speed.mean(), cells.accel.mean()};
}

MetricRow evaluate_metrics(const std::vector<Particle>& particles,
                           const Dataset& test, const ScoreWeights& weights,
                           double beta, TrajectoryNorm norm,
                           const SimOptions& opts) {
  const CellErrorMatrices cells = evaluate_cells(particles, test, norm, opts);
  const Eigen::MatrixXd cost = build_cost_matrix(cells, weights);
  const AverageErrors avg = average_errors(cells);
  MetricRow row;
  row.avg_position = avg.position;
  row.avg_speed = avg.speed;
  row.avg_accel = avg.accel;
  row.minimum = minimum_distance(cost);
  row.beta_ws = beta_wasserstein(cost, beta).objective;
  row.ws = wasserstein(cost).objective;
  return row;
}

Eigen::MatrixXd position_error_evolution(const std::vector<Particle>& particles,
                                         const CFPair& pair,
                                         const SimOptions& opts) {
  if (particles.empty())
    throw std::invalid_argument("position_error_evolution: no particles");
  const Eigen::Index steps = pair.follower.size();
  Eigen::MatrixXd out(steps, static_cast<Eigen::Index>(particles.size()));
  for (std::size_t j = 0; j < particles.size(); ++j) {
    const SimulatedPortfolio sim =
        simulate_follower(particles[j].params, pair, opts);
    if (sim.aborted)
      out.col(static_cast<Eigen::Index>(j))
          .setConstant(std::numeric_limits<double>::quiet_NaN());
    else
      out.col(static_cast<Eigen::Index>(j)) =
          sim.portfolio.positions - pair.follower.positions;
  }
  return out;
}

}  // namespace cfabc
