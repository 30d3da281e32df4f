#include "cfabc/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace cfabc {

namespace {

constexpr double kInfeasibleSentinel = 1e12;

// Primal transportation simplex over the spanning-tree basis. Supplies and
// demands must balance. Returns the optimal plan.
class TransportationSimplex {
 public:
  TransportationSimplex(const Eigen::MatrixXd& cost,
                        const Eigen::VectorXd& supply,
                        const Eigen::VectorXd& demand)
      : cost_(cost),
        m_(static_cast<int>(cost.rows())),
        n_(static_cast<int>(cost.cols())),
        supply_(supply),
        demand_(demand) {}

  TransportPlan solve() {
    try {
      return run(/*perturb=*/false);
    } catch (const std::runtime_error&) {
      // Degenerate cycling fallback: retry with a lexicographic-style
      // perturbation of the marginals, then report the unperturbed plan.
      return run(/*perturb=*/true);
    }
  }

 private:
  struct BasicCell {
    int i, j;
    double flow;
  };

  TransportPlan run(bool perturb) {
    Eigen::VectorXd a = supply_;
    Eigen::VectorXd b = demand_;
    if (perturb) {
      const double eps = 1e-11 * a.sum() / std::max(1, m_);
      for (int i = 0; i < m_; ++i) a[i] += eps * (i + 1);
      b[n_ - 1] += eps * m_ * (m_ + 1) / 2.0;
    }

    basis_.clear();
    cell_of_.assign(static_cast<std::size_t>(m_) * n_, -1);
    adj_.assign(m_ + n_, {});
    northwest_corner(a, b);

    const double tol =
        1e-10 * std::max(1.0, cost_.cwiseAbs().maxCoeff());
    const long max_pivots = 200L * (m_ + n_) * std::max(m_, n_) + 10000;
    Eigen::VectorXd u(m_), v(n_);

    for (long pivot = 0;; ++pivot) {
      if (pivot > max_pivots)
        throw std::runtime_error("transportation simplex: pivot cap hit");
      compute_duals(u, v);

      // Dantzig rule: most negative reduced cost.
      int bi = -1, bj = -1;
      double best = -tol;
      for (int i = 0; i < m_; ++i)
        for (int j = 0; j < n_; ++j) {
          if (cell_of_[idx(i, j)] >= 0) continue;
          const double r = cost_(i, j) - u[i] - v[j];
          if (r < best) {
            best = r;
            bi = i;
            bj = j;
          }
        }
      if (bi < 0) break;  // optimal
      pivot_step(bi, bj);
    }

    TransportPlan result;
    result.plan = Eigen::MatrixXd::Zero(m_, n_);
    for (const auto& c : basis_) result.plan(c.i, c.j) = std::max(0.0, c.flow);
    result.objective = 0.0;
    for (const auto& c : basis_)
      if (c.flow > 0.0) result.objective += c.flow * cost_(c.i, c.j);
    return result;
  }

  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(i) * n_ + j;
  }

  void add_basic(int i, int j, double flow) {
    cell_of_[idx(i, j)] = static_cast<int>(basis_.size());
    adj_[i].push_back(static_cast<int>(basis_.size()));
    adj_[m_ + j].push_back(static_cast<int>(basis_.size()));
    basis_.push_back({i, j, flow});
  }

  void northwest_corner(Eigen::VectorXd a, Eigen::VectorXd b) {
    int i = 0, j = 0;
    while (true) {
      const double f = std::min(a[i], b[j]);
      add_basic(i, j, f);
      a[i] -= f;
      b[j] -= f;
      if (i == m_ - 1 && j == n_ - 1) break;
      // Advance along the exhausted marginal; prefer rows on ties unless at
      // the last row (keeps exactly m+n-1 basic cells).
      if (a[i] <= b[j] && i < m_ - 1)
        ++i;
      else
        ++j;
    }
  }

  void compute_duals(Eigen::VectorXd& u, Eigen::VectorXd& v) const {
    std::vector<char> seen(m_ + n_, 0);
    std::vector<int> stack = {0};
    u[0] = 0.0;
    seen[0] = 1;
    while (!stack.empty()) {
      const int node = stack.back();
      stack.pop_back();
      for (int ci : adj_[node]) {
        const auto& c = basis_[ci];
        const int other = (node < m_) ? m_ + c.j : c.i;
        if (seen[other]) continue;
        seen[other] = 1;
        if (other >= m_)
          v[other - m_] = cost_(c.i, c.j) - u[c.i];
        else
          u[other] = cost_(c.i, c.j) - v[c.j];
        stack.push_back(other);
      }
    }
  }

  // Entering cell (bi, bj) closes a unique cycle with the tree path from
  // row-node bi to column-node bj. Flow alternates +/- around the cycle.
  void pivot_step(int bi, int bj) {
    const int nodes = m_ + n_;
    std::vector<int> parent_cell(nodes, -1), parent_node(nodes, -1);
    std::vector<char> seen(nodes, 0);
    std::vector<int> stack = {bi};
    seen[bi] = 1;
    while (!stack.empty()) {
      const int node = stack.back();
      stack.pop_back();
      if (node == m_ + bj) break;
      for (int ci : adj_[node]) {
        const auto& c = basis_[ci];
        const int other = (node < m_) ? m_ + c.j : c.i;
        if (seen[other]) continue;
        seen[other] = 1;
        parent_cell[other] = ci;
        parent_node[other] = node;
        stack.push_back(other);
      }
    }

    // Walk back from the column node to the row node collecting the path
    // cells; even path positions lose flow.
    std::vector<int> path;
    for (int node = m_ + bj; node != bi; node = parent_node[node])
      path.push_back(parent_cell[node]);

    double theta = std::numeric_limits<double>::infinity();
    int leaving = -1;
    for (std::size_t k = 0; k < path.size(); k += 2) {
      if (basis_[path[k]].flow < theta) {
        theta = basis_[path[k]].flow;
        leaving = path[k];
      }
    }

    for (std::size_t k = 0; k < path.size(); ++k)
      basis_[path[k]].flow += (k % 2 == 0) ? -theta : theta;

    // Replace the leaving cell with the entering one in place.
    const auto old = basis_[leaving];
    detach(old.i, leaving);
    detach(m_ + old.j, leaving);
    cell_of_[idx(old.i, old.j)] = -1;
    basis_[leaving] = {bi, bj, theta};
    cell_of_[idx(bi, bj)] = leaving;
    adj_[bi].push_back(leaving);
    adj_[m_ + bj].push_back(leaving);
  }

  void detach(int node, int cell) {
    auto& lst = adj_[node];
    lst.erase(std::find(lst.begin(), lst.end(), cell));
  }

  const Eigen::MatrixXd& cost_;
  int m_, n_;
  Eigen::VectorXd supply_, demand_;
  std::vector<BasicCell> basis_;
  std::vector<int> cell_of_;
  std::vector<std::vector<int>> adj_;
};

// Replaces +inf by a large finite sentinel; throws if a whole row is
// infinite (no feasible assignment for that state portfolio).
Eigen::MatrixXd sanitize_cost(const Eigen::MatrixXd& cost) {
  Eigen::MatrixXd c = cost;
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    bool any_finite = false;
    for (Eigen::Index j = 0; j < c.cols(); ++j) {
      if (std::isfinite(c(i, j))) {
        any_finite = true;
      } else {
        c(i, j) = kInfeasibleSentinel;
      }
    }
    if (!any_finite)
      throw std::runtime_error(
          "transport: row " + std::to_string(i) +
          " has no finite cost (every particle aborted on this pair)");
  }
  return c;
}

void check_sentinel_support(const Eigen::MatrixXd& cost,
                            const Eigen::MatrixXd& plan) {
  for (Eigen::Index i = 0; i < cost.rows(); ++i)
    for (Eigen::Index j = 0; j < cost.cols(); ++j)
      if (!std::isfinite(cost(i, j)) && plan(i, j) > 1e-12)
        throw std::runtime_error(
            "transport: optimal plan requires an infeasible cell at row " +
            std::to_string(i));
}

}  // namespace

TransportPlan solve_transportation(const Eigen::MatrixXd& cost,
                                   const Eigen::VectorXd& supply,
                                   const Eigen::VectorXd& demand) {
  if (cost.rows() != supply.size() || cost.cols() != demand.size())
    throw std::invalid_argument("solve_transportation: dimension mismatch");
  if (cost.rows() == 0 || cost.cols() == 0)
    throw std::invalid_argument("solve_transportation: empty problem");
  if (std::abs(supply.sum() - demand.sum()) >
      1e-9 * std::max(1.0, supply.sum()))
    throw std::invalid_argument("solve_transportation: unbalanced marginals");
  if ((supply.array() < 0).any() || (demand.array() < 0).any())
    throw std::invalid_argument("solve_transportation: negative marginal");
  TransportationSimplex simplex(cost, supply, demand);
  return simplex.solve();
}

TransportPlan wasserstein(const Eigen::MatrixXd& cost) {
  const Eigen::MatrixXd c = sanitize_cost(cost);
  const Eigen::Index m = c.rows(), n = c.cols();
  const Eigen::VectorXd supply =
      Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
  const Eigen::VectorXd demand =
      Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  TransportPlan result = solve_transportation(c, supply, demand);
  check_sentinel_support(cost, result.plan);
  return result;
}

TransportPlan beta_wasserstein(const Eigen::MatrixXd& cost, double beta) {
  if (!(beta > 0.0) || beta > 1.0)
    throw std::invalid_argument("beta_wasserstein: beta must be in (0, 1]");
  const Eigen::MatrixXd c = sanitize_cost(cost);
  const Eigen::Index m = c.rows(), n = c.cols();

  // Column lower bounds reduce to a balanced problem: each column keeps an
  // exact demand of beta/n and the slack mass 1-beta flows to a dummy column
  // priced at each row's cheapest real column (where surplus mass would sit
  // in any optimum).
  Eigen::MatrixXd ext(m, n + 1);
  ext.leftCols(n) = c;
  Eigen::VectorXi argmin(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    Eigen::Index j;
    ext(i, n) = c.row(i).minCoeff(&j);
    argmin[i] = static_cast<int>(j);
  }

  const Eigen::VectorXd supply =
      Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
  Eigen::VectorXd demand(n + 1);
  demand.head(n).setConstant(beta / static_cast<double>(n));
  demand[n] = 1.0 - beta;

  TransportPlan reduced = solve_transportation(ext, supply, demand);

  TransportPlan result;
  result.objective = reduced.objective;
  result.plan = reduced.plan.leftCols(n);
  for (Eigen::Index i = 0; i < m; ++i)
    result.plan(i, argmin[i]) += reduced.plan(i, n);
  check_sentinel_support(cost, result.plan);
  return result;
}

double minimum_distance(const Eigen::MatrixXd& cost) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < cost.rows(); ++i) {
    const double row_min = cost.row(i).minCoeff();
    if (!std::isfinite(row_min))
      throw std::runtime_error(
          "minimum_distance: row " + std::to_string(i) +
          " has no finite cost");
    total += row_min;
  }
  return total / static_cast<double>(cost.rows());
}

Eigen::MatrixXd normalize_metrics(const Eigen::MatrixXd& table) {
  Eigen::MatrixXd out(table.rows(), table.cols());
  for (Eigen::Index j = 0; j < table.cols(); ++j) {
    const double lo = table.col(j).minCoeff();
    const double hi = table.col(j).maxCoeff();
    if (hi == lo)
      out.col(j).setOnes();
    else
      out.col(j) = (hi - table.col(j).array()) / (hi - lo);
  }
  return out;
}

}  // namespace cfabc
