#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace cfabc {

/// Time-indexed position/speed/acceleration profile of one vehicle,
/// uniformly sampled at dt starting at t0.
struct StatePortfolio {
  Eigen::VectorXd positions;      // m
  Eigen::VectorXd speeds;         // m/s
  Eigen::VectorXd accelerations;  // m/s^2
  double dt = 0.1;                // s
  double t0 = 0.0;                // s

  Eigen::Index size() const { return positions.size(); }
  void validate() const;  // throws std::invalid_argument on violation
};

/// A leader trajectory plus the observed follower trajectory; the unit of
/// scoring. Portfolios share dt, t0 and length.
struct CFPair {
  std::string pair_id;
  StatePortfolio leader;
  StatePortfolio follower;
  double leader_length = 5.0;  // m

  void validate() const;
};

struct Dataset {
  std::vector<CFPair> pairs;
  std::string name;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
};

/// Builds a full portfolio from positions alone: speeds by central
/// differences (first-order one-sided at both ends), accelerations by the
/// same stencil applied to the speeds. Exact for quadratic positions at
/// interior samples.
StatePortfolio derive_kinematics(const Eigen::VectorXd& positions, double dt,
                                 double t0 = 0.0);

/// Central/one-sided finite differences of a sampled signal.
Eigen::VectorXd finite_difference(const Eigen::VectorXd& values, double dt);

/// Leader position minus follower position at step k; subtracts the leader
/// vehicle length when subtract_length is set (front-to-rear gap).
double gap(const CFPair& pair, Eigen::Index k, bool subtract_length);

/// Deterministic k-fold split: shuffled by seed, test folds disjoint and
/// near-equal (sizes differ by at most 1), train = complement.
struct FoldSplit {
  Dataset train;
  Dataset test;
};
std::vector<FoldSplit> split_folds(const Dataset& dataset, int k,
                                   std::uint64_t seed);

/// Diagnostics produced while loading (rejected pairs, defaulted fields).
struct LoadDiagnostics {
  std::vector<std::string> warnings;
  std::vector<std::string> rejected_pairs;
};

/// Reads the trajectory CSV schema:
///   pair_id,t,leader_pos,follower_pos[,leader_speed,follower_speed]
///     [,leader_accel,follower_accel][,leader_length]
/// Speeds/accelerations absent -> derived by finite differences. Pairs with
/// non-uniform timestamps or non-finite values are rejected, not repaired.
Dataset load_dataset(const std::string& path,
                     LoadDiagnostics* diag = nullptr);
Dataset load_dataset(std::istream& in, const std::string& name,
                     LoadDiagnostics* diag = nullptr);

/// Writes a Dataset in the same CSV schema (with speed/accel columns, so a
/// round-trip preserves channels verbatim). Full double precision.
void save_dataset(const Dataset& dataset, const std::string& path);
void save_dataset(const Dataset& dataset, std::ostream& out);

}  // namespace cfabc
