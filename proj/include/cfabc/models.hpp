#pragma once

#include "cfabc/params.hpp"

namespace cfabc {

/// Instantaneous kinematic inputs to an acceleration law. raw_spacing is
/// leader position minus follower position; each model applies its own gap
/// convention (with or without the leader length).
struct KinematicContext {
  double follower_speed = 0.0;  // m/s
  double leader_speed = 0.0;    // m/s
  double raw_spacing = 0.0;     // m
  double leader_length = 0.0;   // m
};

/// Acceleration returned by IDM when the raw spacing is non-positive; keeps
/// the simulator finite, ABC rejection discards such particles by score.
inline constexpr double kIdmHardBrakingFloor = -10.0;  // m/s^2

// Optimal-velocity family. OVM and GFM measure the gap front-to-rear
// (leader length subtracted); FVDM subtracts the length inside its tanh
// argument instead.
double ovm_accel(const KinematicContext& ctx, const Params& p);
double gfm_accel(const KinematicContext& ctx, const Params& p);
double fvdm_accel(const KinematicContext& ctx, const Params& p);
double idm_accel(const KinematicContext& ctx, const Params& p);

/// Dispatch over the four HDV laws.
double hdv_accel(const KinematicContext& ctx, const Params& p);

}  // namespace cfabc
