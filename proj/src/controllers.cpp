#include "cfabc/controllers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cfabc {

int controller_state_dim(ModelId m) { return m == ModelId::HL ? 3 : 2; }

DiscreteSystem build_discrete_system(const Params& p, double t_s) {
  DiscreteSystem sys;
  sys.t_s = t_s;
  const double ts2 = t_s * t_s / 2.0;
  switch (p.model) {
    case ModelId::LLCTG: {
      const double tau = p[llctg::kTauStar];
      sys.n = 2;
      sys.A.topLeftCorner<2, 2>() << 1.0, t_s, 0.0, 1.0;
      sys.B.head<2>() << -t_s * tau - ts2, -t_s;
      sys.D.head<2>() << t_s + ts2, t_s;
      break;
    }
    case ModelId::LLCS: {
      sys.n = 2;
      sys.A.topLeftCorner<2, 2>() << 1.0, t_s, 0.0, 1.0;
      sys.B.head<2>() << -ts2, -t_s;
      sys.D.head<2>() << ts2, t_s;
      break;
    }
    case ModelId::HL: {
      const double tau = p[hl::kTauStar];
      const double TT = p[hl::kTT];
      const double e = std::exp(-t_s / TT);
      sys.n = 3;
      sys.A << 1.0, t_s, TT * (tau - TT) * (e - 1.0) - t_s * TT,
               0.0, 1.0, TT * (e - 1.0),
               0.0, 0.0, e;
      sys.B << -TT * (tau - TT) * (e + t_s / TT - 1.0) - ts2,
               TT * (1.0 - e) - t_s,
               1.0 - e;
      sys.D << ts2, t_s, 0.0;
      break;
    }
    case ModelId::MPC: {
      const double tau = p[mpc::kTauStar];
      sys.n = 2;
      sys.A.topLeftCorner<2, 2>() << 1.0, t_s, 0.0, 1.0;
      // B carries the published extra -t_s term.
      sys.B.head<2>() << -tau * t_s - t_s - ts2, -t_s;
      sys.D.head<2>() << t_s + ts2, t_s;
      break;
    }
    default:
      throw std::invalid_argument("build_discrete_system: not a controller");
  }
  return sys;
}

double linear_control(const ControllerState& state, const Params& p) {
  switch (p.model) {
    case ModelId::LLCTG:
      return p[llctg::kKs] * state[0] + p[llctg::kKv] * state[1];
    case ModelId::LLCS:
      return p[llcs::kKs] * state[0] + p[llcs::kKv] * state[1];
    case ModelId::HL:
      return p[hl::kKs] * state[0] + p[hl::kKv] * state[1] +
             p[hl::kKa] * state[2];
    default:
      throw std::invalid_argument("linear_control: not a linear controller");
  }
}

double mpc_control(const ControllerState& state, double leader_accel,
                   const DiscreteSystem& sys, const Params& p) {
  if (p.model != ModelId::MPC)
    throw std::invalid_argument("mpc_control: wrong model");
  const Eigen::Vector2d x = state.head<2>();
  const Eigen::Vector2d b = sys.B.head<2>();
  const Eigen::Vector2d drift =
      sys.A.topLeftCorner<2, 2>() * x + sys.D.head<2>() * leader_accel;
  const Eigen::Vector2d q(1.0, p[mpc::kAlpha]);
  const double denom = b.cwiseProduct(q).dot(b) + p[mpc::kR];
  const double u = -b.cwiseProduct(q).dot(drift) / denom;
  return std::clamp(u, p[mpc::kAmin], p[mpc::kAmax]);
}

double desired_spacing(double follower_speed, const Params& p) {
  switch (p.model) {
    case ModelId::LLCTG:
      return follower_speed * p[llctg::kTauStar] + p[llctg::kL];
    case ModelId::LLCS:
      return p[llcs::kS0];
    case ModelId::HL:
      return follower_speed * p[hl::kTauStar] + p[hl::kL];
    case ModelId::MPC:
      return follower_speed * p[mpc::kTauStar] + p[mpc::kL];
    default:
      throw std::invalid_argument("desired_spacing: not a controller");
  }
}

ControllerState controller_state_from_kinematics(const KinematicContext& ctx,
                                                 double observed_accel,
                                                 const Params& p) {
  const double s = ctx.raw_spacing - ctx.leader_length;
  ControllerState x = ControllerState::Zero();
  x[0] = s - desired_spacing(ctx.follower_speed, p);
  x[1] = ctx.leader_speed - ctx.follower_speed;
  if (controller_state_dim(p.model) == 3) x[2] = observed_accel;
  return x;
}

}  // namespace cfabc
