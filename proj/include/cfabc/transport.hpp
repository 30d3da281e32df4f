#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace cfabc {

/// Optimal coupling between test state portfolios (rows) and particles
/// (columns). plan(i, j) is the transported mass, objective the total cost.
struct TransportPlan {
  Eigen::MatrixXd plan;
  double objective = 0.0;
};

/// Exact balanced transportation problem:
///   min sum_ij plan_ij * cost_ij
///   s.t. row sums = supply, column sums = demand, plan >= 0,
/// with sum(supply) == sum(demand). Solved by a primal transportation
/// simplex on the spanning-tree basis.
TransportPlan solve_transportation(const Eigen::MatrixXd& cost,
                                   const Eigen::VectorXd& supply,
                                   const Eigen::VectorXd& demand);

/// Wasserstein distance between the uniform row and column empirical
/// distributions (row marginals 1/I, column marginals 1/|cols|).
/// +inf entries are allowed as long as the optimal plan avoids them; a row
/// with no finite entry is infeasible and throws.
TransportPlan wasserstein(const Eigen::MatrixXd& cost);

/// Partial-matching variant: column equality relaxed to
/// column sums >= beta/|cols| (beta in (0, 1]); row equalities keep total
/// mass at 1. beta = 1 recovers the Wasserstein distance.
TransportPlan beta_wasserstein(const Eigen::MatrixXd& cost, double beta);

/// Mean over rows of the best single-column cost; the beta -> 0 limit of
/// beta_wasserstein.
double minimum_distance(const Eigen::MatrixXd& cost);

/// Per-column linear normalization x' = (max - x) / (max - min) so 1 marks
/// the smallest error; a constant column maps to all 1.
Eigen::MatrixXd normalize_metrics(const Eigen::MatrixXd& table);

}  // namespace cfabc
