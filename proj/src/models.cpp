#include "cfabc/models.hpp"

#include <cmath>

namespace cfabc {

double ovm_accel(const KinematicContext& ctx, const Params& p) {
  const double s = ctx.raw_spacing - ctx.leader_length;
  const double v_opt = p[ovm::kV1] +
                       p[ovm::kV2] * std::tanh(p[ovm::kC1] * s - p[ovm::kC2]);
  return p[ovm::kKappa] * (v_opt - ctx.follower_speed);
}

double gfm_accel(const KinematicContext& ctx, const Params& p) {
  const double s = ctx.raw_spacing - ctx.leader_length;
  const double v_opt = p[gfm::kV1] +
                       p[gfm::kV2] * std::tanh(p[gfm::kC1] * s - p[gfm::kC2]);
  double accel = p[gfm::kGain] * (v_opt - ctx.follower_speed);
  // Speed-difference term acts only when the follower is closing in
  // (dv = v_leader - v_follower < 0).
  const double dv = ctx.leader_speed - ctx.follower_speed;
  if (-dv > 0.0) accel += p[gfm::kLambda] * dv;
  return accel;
}

double fvdm_accel(const KinematicContext& ctx, const Params& p) {
  const double arg =
      (ctx.raw_spacing - ctx.leader_length) / p[fvdm::kLint] - p[fvdm::kBeta];
  const double v_opt = p[fvdm::kV1] + p[fvdm::kV2] * std::tanh(arg);
  const double dv = ctx.leader_speed - ctx.follower_speed;
  return (v_opt - ctx.follower_speed) / p[fvdm::kTau] + p[fvdm::kLambda] * dv;
}

double idm_accel(const KinematicContext& ctx, const Params& p) {
  const double s = ctx.raw_spacing;
  if (s <= 0.0) return kIdmHardBrakingFloor;
  const double v = ctx.follower_speed;
  // IDM's dv is follower minus leader: positive while approaching.
  const double dv = v - ctx.leader_speed;
  const double s_star = p[idm::kS0] + v * p[idm::kT] +
                        v * dv / (2.0 * std::sqrt(p[idm::kA] * p[idm::kB]));
  const double free_term = std::pow(v / p[idm::kVmax], p[idm::kDelta]);
  const double interaction = s_star / s;
  return p[idm::kA] * (1.0 - free_term - interaction * interaction);
}

double hdv_accel(const KinematicContext& ctx, const Params& p) {
  switch (p.model) {
    case ModelId::OVM: return ovm_accel(ctx, p);
    case ModelId::GFM: return gfm_accel(ctx, p);
    case ModelId::FVDM: return fvdm_accel(ctx, p);
    case ModelId::IDM: return idm_accel(ctx, p);
    default: throw std::invalid_argument("hdv_accel: not an HDV model");
  }
}

}  // namespace cfabc
