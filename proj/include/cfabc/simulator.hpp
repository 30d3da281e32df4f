#pragma once

#include "cfabc/controllers.hpp"
#include "cfabc/models.hpp"
#include "cfabc/trajectory.hpp"

namespace cfabc {

struct SimOptions {
  /// Integration sub-steps per data interval for the continuous-time HDV
  /// laws (1 = step at the data dt).
  int substeps = 1;
  /// Subtract the leader length when converting controller spacing to
  /// positions; clear for datasets whose positions are already
  /// gap-referenced.
  bool controller_subtract_length = true;
};

struct SimulatedPortfolio {
  StatePortfolio portfolio;
  bool negative_gap_encountered = false;
  bool speed_clamped = false;
  bool aborted = false;  // non-finite state; score as infinitely bad
};

/// Rolls out the follower trajectory for one particle against the observed
/// leader. Initial follower position/speed (and, for HL, acceleration) come
/// from the observed follower at t0. Deterministic.
SimulatedPortfolio simulate_follower(const Params& particle,
                                     const CFPair& pair,
                                     const SimOptions& opts = {});

}  // namespace cfabc
