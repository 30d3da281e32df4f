#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "cfabc/rng.hpp"
#include "cfabc/transport.hpp"

using namespace cfabc;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Oracle 1: exhaustive vertex enumeration for tiny balanced transportation
// problems. Repeatedly picking any (row, column) cell and saturating the
// smaller marginal enumerates every basic feasible solution, and the optimum
// of an LP is attained at one of them.
// ---------------------------------------------------------------------------
void enum_recurse(const Eigen::MatrixXd& cost, Eigen::VectorXd& supply,
                  Eigen::VectorXd& demand, double acc, double& best) {
  constexpr double eps = 1e-12;
  if (supply.maxCoeff() <= eps) {
    best = std::min(best, acc);
    return;
  }
  for (Eigen::Index i = 0; i < supply.size(); ++i) {
    if (supply[i] <= eps) continue;
    for (Eigen::Index j = 0; j < demand.size(); ++j) {
      if (demand[j] <= eps) continue;
      const double f = std::min(supply[i], demand[j]);
      supply[i] -= f;
      demand[j] -= f;
      enum_recurse(cost, supply, demand, acc + f * cost(i, j), best);
      supply[i] += f;
      demand[j] += f;
    }
  }
}

double enum_oracle(const Eigen::MatrixXd& cost, Eigen::VectorXd supply,
                   Eigen::VectorXd demand) {
  double best = kInf;
  enum_recurse(cost, supply, demand, 0.0, best);
  return best;
}

// ---------------------------------------------------------------------------
// Oracle 2: a small dense two-phase primal simplex (Bland's rule) for
//   min c.x  s.t.  A x = / >= b,  x >= 0,
// written independently of the library's transportation solver.
// ---------------------------------------------------------------------------
double lp_oracle(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                 const std::vector<bool>& is_ge, const Eigen::VectorXd& c) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  int n_ge = 0;
  for (bool g : is_ge) n_ge += g ? 1 : 0;
  const int n_total = n + n_ge + m;  // structural + surplus + artificial

  Eigen::MatrixXd T(m, n_total);
  T.setZero();
  T.leftCols(n) = A;
  Eigen::VectorXd rhs = b;
  int col = n;
  for (int i = 0; i < m; ++i)
    if (is_ge[i]) T(i, col++) = -1.0;
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) {
    T(i, n + n_ge + i) = 1.0;
    basis[i] = n + n_ge + i;
  }

  auto pivot = [&](int row, int column) {
    const double piv = T(row, column);
    T.row(row) /= piv;
    rhs[row] /= piv;
    for (int i = 0; i < m; ++i) {
      if (i == row) continue;
      const double f = T(i, column);
      if (f == 0.0) continue;
      T.row(i) -= f * T.row(row);
      rhs[i] -= f * rhs[row];
    }
    basis[row] = column;
  };

  auto run = [&](const Eigen::VectorXd& cost, int enter_limit) {
    for (int iter = 0; iter < 100000; ++iter) {
      Eigen::VectorXd cb(m);
      for (int i = 0; i < m; ++i) cb[i] = cost[basis[i]];
      int entering = -1;
      for (int j = 0; j < enter_limit; ++j) {
        const double red = cost[j] - cb.dot(T.col(j));
        if (red < -1e-9) {  // Bland: first improving index
          entering = j;
          break;
        }
      }
      if (entering < 0) return cb.dot(rhs);
      int leaving = -1;
      double best_ratio = kInf;
      for (int i = 0; i < m; ++i) {
        if (T(i, entering) > 1e-11) {
          const double r = rhs[i] / T(i, entering);
          if (r < best_ratio - 1e-12 ||
              (r < best_ratio + 1e-12 &&
               (leaving < 0 || basis[i] < basis[leaving]))) {
            best_ratio = r;
            leaving = i;
          }
        }
      }
      REQUIRE(leaving >= 0);  // our feasible regions are bounded
      pivot(leaving, entering);
    }
    FAIL("simplex oracle did not terminate");
    return 0.0;
  };

  Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(n_total);
  phase1.tail(m).setOnes();
  const double infeas = run(phase1, n_total);
  REQUIRE(infeas < 1e-8);

  // Drive any artificial left basic at level zero out of the basis; phase 2
  // never prices artificial columns, so a basic artificial could otherwise
  // drift away from zero and make the final point infeasible.
  for (int i = 0; i < m; ++i) {
    if (basis[i] < n + n_ge) continue;
    for (int j = 0; j < n + n_ge; ++j) {
      if (std::abs(T(i, j)) > 1e-9) {
        pivot(i, j);
        break;
      }
    }
    // If the row is zero across all real columns it is redundant and the
    // artificial stays harmlessly basic at zero.
  }

  Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(n_total);
  phase2.head(n) = c;
  return run(phase2, n + n_ge);
}

// Uniform-marginal Wasserstein as an explicit LP.
double ws_lp_oracle(const Eigen::MatrixXd& cost) {
  const int m = static_cast<int>(cost.rows());
  const int n = static_cast<int>(cost.cols());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m + n, m * n);
  Eigen::VectorXd b(m + n), c(m * n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      A(i, i * n + j) = 1.0;
      A(m + j, i * n + j) = 1.0;
      c[i * n + j] = cost(i, j);
    }
  b.head(m).setConstant(1.0 / m);
  b.tail(n).setConstant(1.0 / n);
  return lp_oracle(A, b, std::vector<bool>(m + n, false), c);
}

// Relaxed-column variant: column mass only bounded below by beta/n.
double bws_lp_oracle(const Eigen::MatrixXd& cost, double beta) {
  const int m = static_cast<int>(cost.rows());
  const int n = static_cast<int>(cost.cols());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m + n, m * n);
  Eigen::VectorXd b(m + n), c(m * n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      A(i, i * n + j) = 1.0;
      A(m + j, i * n + j) = 1.0;
      c[i * n + j] = cost(i, j);
    }
  b.head(m).setConstant(1.0 / m);
  b.tail(n).setConstant(beta / n);
  std::vector<bool> ge(m + n, false);
  for (int j = 0; j < n; ++j) ge[m + j] = true;
  return lp_oracle(A, b, ge, c);
}

Eigen::MatrixXd random_cost(Rng& rng, int m, int n, double hi = 10.0) {
  Eigen::MatrixXd c(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) c(i, j) = rng.uniform(0.0, hi);
  return c;
}

}  // namespace

TEST_CASE("transportation solver matches exhaustive enumeration") {
  Rng rng(101);
  for (int trial = 0; trial < 500; ++trial) {
    const int m = 1 + static_cast<int>(rng.uniform_index(3));
    const int n = 1 + static_cast<int>(rng.uniform_index(3));
    const Eigen::MatrixXd cost = random_cost(rng, m, n);
    Eigen::VectorXd supply(m), demand(n);
    for (int i = 0; i < m; ++i) supply[i] = rng.uniform(0.1, 2.0);
    for (int j = 0; j < n; ++j) demand[j] = rng.uniform(0.1, 2.0);
    demand *= supply.sum() / demand.sum();

    const TransportPlan plan = solve_transportation(cost, supply, demand);
    CHECK(plan.objective ==
          doctest::Approx(enum_oracle(cost, supply, demand)).epsilon(1e-9));
    CHECK(plan.plan.minCoeff() >= -1e-12);
    CHECK((plan.plan.rowwise().sum() - supply).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((plan.plan.colwise().sum().transpose() - demand)
              .cwiseAbs()
              .maxCoeff() < 1e-9);
  }
}

TEST_CASE("transportation solver handles degenerate marginals") {
  Rng rng(505);
  for (int trial = 0; trial < 200; ++trial) {
    // Integer marginals force many exact supply == demand ties.
    const int m = 2 + static_cast<int>(rng.uniform_index(2));
    const int n = 2 + static_cast<int>(rng.uniform_index(2));
    const Eigen::MatrixXd cost = random_cost(rng, m, n, 5.0);
    Eigen::VectorXd supply(m), demand(n);
    for (int i = 0; i < m; ++i)
      supply[i] = 1.0 + static_cast<double>(rng.uniform_index(3));
    double total = supply.sum();
    for (int j = 0; j < n - 1; ++j) {
      demand[j] = std::min(total, static_cast<double>(rng.uniform_index(4)));
      total -= demand[j];
    }
    demand[n - 1] = total;
    const TransportPlan plan = solve_transportation(cost, supply, demand);
    CHECK(plan.objective ==
          doctest::Approx(enum_oracle(cost, supply, demand)).epsilon(1e-9));
  }
}

TEST_CASE("Wasserstein distance: worked examples") {
  Eigen::MatrixXd sep(2, 2);
  sep << 0.0, 10.0, 10.0, 0.0;
  CHECK(wasserstein(sep).objective == doctest::Approx(0.0));

  Eigen::MatrixXd c(2, 2);
  c << 1.0, 2.0, 3.0, 4.0;
  CHECK(wasserstein(c).objective == doctest::Approx(2.5));
  CHECK(minimum_distance(c) == doctest::Approx(2.0));
}

TEST_CASE("Wasserstein matches the LP oracle") {
  Rng rng(202);
  for (int trial = 0; trial < 150; ++trial) {
    const int m = 2 + static_cast<int>(rng.uniform_index(4));
    const int n = 2 + static_cast<int>(rng.uniform_index(5));
    const Eigen::MatrixXd cost = random_cost(rng, m, n);
    const TransportPlan plan = wasserstein(cost);
    CHECK(plan.objective == doctest::Approx(ws_lp_oracle(cost)).epsilon(1e-8));
    CHECK((plan.plan.rowwise().sum().array() - 1.0 / m).abs().maxCoeff() <
          1e-9);
    CHECK((plan.plan.colwise().sum().array() - 1.0 / n).abs().maxCoeff() <
          1e-9);
  }
}

TEST_CASE("beta-Wasserstein matches the LP oracle") {
  Rng rng(303);
  for (int trial = 0; trial < 150; ++trial) {
    const int m = 2 + static_cast<int>(rng.uniform_index(3));
    const int n = 2 + static_cast<int>(rng.uniform_index(4));
    const Eigen::MatrixXd cost = random_cost(rng, m, n);
    for (double beta : {0.1, 0.15, 0.4, 0.75, 1.0}) {
      const TransportPlan plan = beta_wasserstein(cost, beta);
      CHECK(plan.objective ==
            doctest::Approx(bws_lp_oracle(cost, beta)).epsilon(1e-8));
      // Feasibility of the relaxed marginals.
      CHECK((plan.plan.rowwise().sum().array() - 1.0 / m).abs().maxCoeff() <
            1e-9);
      CHECK((plan.plan.colwise().sum().array() - beta / n).minCoeff() >
            -1e-9);
      CHECK(plan.plan.minCoeff() >= -1e-12);
    }
  }
}

TEST_CASE("distance ordering and limits in beta") {
  Rng rng(404);
  for (int trial = 0; trial < 60; ++trial) {
    const Eigen::MatrixXd cost = random_cost(rng, 4, 6);
    const double ws = wasserstein(cost).objective;
    const double md = minimum_distance(cost);
    CHECK(md <= ws + 1e-10);
    double prev = md;
    for (double beta : {1e-9, 0.2, 0.5, 0.8, 1.0}) {
      const double bw = beta_wasserstein(cost, beta).objective;
      CHECK(bw >= md - 1e-10);
      CHECK(bw <= ws + 1e-10);
      CHECK(bw >= prev - 1e-10);  // nondecreasing in beta
      prev = bw;
    }
    CHECK(beta_wasserstein(cost, 1.0).objective ==
          doctest::Approx(ws).epsilon(1e-10));
    CHECK(beta_wasserstein(cost, 1e-12).objective ==
          doctest::Approx(md).epsilon(1e-9));
  }
}

TEST_CASE("distances scale linearly and ignore label order") {
  Rng rng(606);
  const Eigen::MatrixXd cost = random_cost(rng, 3, 5);
  const double ws = wasserstein(cost).objective;
  CHECK(wasserstein(3.5 * cost).objective == doctest::Approx(3.5 * ws));

  Eigen::MatrixXd shuffled = cost;
  shuffled.row(0).swap(shuffled.row(2));
  shuffled.col(1).swap(shuffled.col(4));
  CHECK(wasserstein(shuffled).objective == doctest::Approx(ws));
  CHECK(beta_wasserstein(shuffled, 0.3).objective ==
        doctest::Approx(beta_wasserstein(cost, 0.3).objective));
  CHECK(minimum_distance(shuffled) == doctest::Approx(minimum_distance(cost)));
}

TEST_CASE("infinite costs are avoided when possible and rejected otherwise") {
  Eigen::MatrixXd c(2, 2);
  c << 1.0, kInf, kInf, 1.0;
  const TransportPlan plan = wasserstein(c);
  CHECK(plan.objective == doctest::Approx(1.0));
  CHECK(plan.plan(0, 1) < 1e-12);
  CHECK(plan.plan(1, 0) < 1e-12);

  Eigen::MatrixXd dead(2, 2);
  dead << kInf, kInf, 1.0, 2.0;
  CHECK_THROWS(wasserstein(dead));
  CHECK_THROWS(beta_wasserstein(dead, 0.5));
  CHECK_THROWS(minimum_distance(dead));
}

TEST_CASE("beta-Wasserstein with an unusable column stays feasible via others") {
  Eigen::MatrixXd c(2, 3);
  c << 1.0, kInf, 2.0, 0.5, kInf, 4.0;
  // Column 1 must absorb beta/3 mass, which is impossible at finite cost.
  CHECK_THROWS(beta_wasserstein(c, 0.5));
  // With no lower bound pressure (beta tiny) the column is simply unused.
  CHECK(std::isfinite(beta_wasserstein(c, 1e-12).objective));
}

TEST_CASE("solver validates shapes and balance") {
  Eigen::MatrixXd c(2, 2);
  c << 1.0, 2.0, 3.0, 4.0;
  Eigen::VectorXd s(2), d(2);
  s << 1.0, 1.0;
  d << 1.0, 0.5;  // unbalanced
  CHECK_THROWS(solve_transportation(c, s, d));
  Eigen::VectorXd wrong(3);
  wrong << 1.0, 0.5, 0.5;
  CHECK_THROWS(solve_transportation(c, wrong, d));
  CHECK_THROWS(beta_wasserstein(c, 0.0));
  CHECK_THROWS(beta_wasserstein(c, 1.5));
}

TEST_CASE("large instance satisfies marginals and simple bounds") {
  Rng rng(707);
  const Eigen::MatrixXd cost = random_cost(rng, 30, 50);
  const TransportPlan plan = wasserstein(cost);
  CHECK((plan.plan.rowwise().sum().array() - 1.0 / 30).abs().maxCoeff() <
        1e-9);
  CHECK((plan.plan.colwise().sum().array() - 1.0 / 50).abs().maxCoeff() <
        1e-9);
  CHECK(plan.objective >= minimum_distance(cost) - 1e-9);
  CHECK(plan.objective <= cost.mean() + 1e-9);  // uniform plan is feasible
}

TEST_CASE("normalize_metrics maps best to 1 and worst to 0 per column") {
  Eigen::MatrixXd t(2, 2);
  t << 2.0, 7.0, 4.0, 7.0;
  const Eigen::MatrixXd n = normalize_metrics(t);
  CHECK(n(0, 0) == doctest::Approx(1.0));
  CHECK(n(1, 0) == doctest::Approx(0.0));
  // Constant column: everything is equally best.
  CHECK(n(0, 1) == doctest::Approx(1.0));
  CHECK(n(1, 1) == doctest::Approx(1.0));
}
