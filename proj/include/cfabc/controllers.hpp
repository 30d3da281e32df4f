#pragma once

#include <Eigen/Dense>

#include "cfabc/models.hpp"
#include "cfabc/params.hpp"

namespace cfabc {

/// Controller state: [spacing deviation, relative speed] and, for the
/// higher-order lag controller, the realized acceleration as third entry.
using ControllerState = Eigen::Vector3d;  // unused tail entries are 0

int controller_state_dim(ModelId m);  // 3 for HL, else 2

/// Discretized follower dynamics x_{t+1} = A x_t + B u_t + D a_leader,t.
struct DiscreteSystem {
  Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
  Eigen::Vector3d B = Eigen::Vector3d::Zero();
  Eigen::Vector3d D = Eigen::Vector3d::Zero();
  int n = 2;
  double t_s = 0.1;  // s
};

/// Builds the discrete state-space matrices for LLCTG, LLCS, HL or MPC at
/// control interval t_s.
DiscreteSystem build_discrete_system(const Params& p, double t_s);

/// Linear feedback u = k . x (k_s, k_v and, for HL, k_a).
double linear_control(const ControllerState& state, const Params& p);

/// One-step receding-horizon control: minimizes
///   (A x + B u + D a_l)^T Q (A x + B u + D a_l) + R u^2,  Q = diag(1, alpha),
/// clipped to [a_min, a_max].
double mpc_control(const ControllerState& state, double leader_accel,
                   const DiscreteSystem& sys, const Params& p);

/// Desired spacing for the controller's policy (CTG: v*tau + l, CS: s0).
double desired_spacing(double follower_speed, const Params& p);

/// Initial controller state from observed kinematics. Spacing uses the
/// front-to-rear gap; observed_accel seeds the third component for HL.
ControllerState controller_state_from_kinematics(const KinematicContext& ctx,
                                                 double observed_accel,
                                                 const Params& p);

}  // namespace cfabc
