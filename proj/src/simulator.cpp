#include "cfabc/simulator.hpp"

#include <cmath>

namespace cfabc {

namespace {

SimulatedPortfolio simulate_hdv(const Params& particle, const CFPair& pair,
                                const SimOptions& opts) {
  const auto& leader = pair.leader;
  const auto& follower = pair.follower;
  const Eigen::Index n = leader.size();
  const double dt = leader.dt;
  const int sub = std::max(1, opts.substeps);
  const double h = dt / static_cast<double>(sub);

  SimulatedPortfolio out;
  out.portfolio.dt = dt;
  out.portfolio.t0 = leader.t0;
  out.portfolio.positions.resize(n);
  out.portfolio.speeds.resize(n);
  out.portfolio.accelerations.resize(n);

  double pos = follower.positions[0];
  double speed = follower.speeds[0];

  for (Eigen::Index k = 0; k < n; ++k) {
    KinematicContext ctx{speed, leader.speeds[k],
                         leader.positions[k] - pos, pair.leader_length};
    const double u = hdv_accel(ctx, particle);
    if (!std::isfinite(u) || !std::isfinite(pos) || !std::isfinite(speed)) {
      out.aborted = true;
      return out;
    }
    if (ctx.raw_spacing <= 0.0) out.negative_gap_encountered = true;
    out.portfolio.positions[k] = pos;
    out.portfolio.speeds[k] = speed;
    out.portfolio.accelerations[k] = u;
    if (k + 1 == n) break;

    // Semi-implicit Euler; leader state interpolated linearly when
    // sub-stepping.
    for (int s = 0; s < sub; ++s) {
      double a;
      if (s == 0) {
        a = u;
      } else {
        const double w = static_cast<double>(s) / sub;
        KinematicContext sub_ctx{
            speed,
            (1.0 - w) * leader.speeds[k] + w * leader.speeds[k + 1],
            (1.0 - w) * leader.positions[k] + w * leader.positions[k + 1] -
                pos,
            pair.leader_length};
        a = hdv_accel(sub_ctx, particle);
      }
      double next_speed = speed + a * h;
      if (next_speed < 0.0) {
        next_speed = 0.0;
        out.speed_clamped = true;
      }
      speed = next_speed;
      pos += speed * h;
    }
    if (!std::isfinite(pos) || !std::isfinite(speed)) {
      out.aborted = true;
      return out;
    }
  }
  return out;
}

SimulatedPortfolio simulate_controller(const Params& particle,
                                       const CFPair& pair,
                                       const SimOptions& opts) {
  const auto& leader = pair.leader;
  const auto& follower = pair.follower;
  const Eigen::Index n = leader.size();
  const double dt = leader.dt;
  const DiscreteSystem sys = build_discrete_system(particle, dt);
  const double offset =
      opts.controller_subtract_length ? pair.leader_length : 0.0;

  SimulatedPortfolio out;
  out.portfolio.dt = dt;
  out.portfolio.t0 = leader.t0;
  out.portfolio.positions.resize(n);
  out.portfolio.speeds.resize(n);
  out.portfolio.accelerations.resize(n);

  KinematicContext ctx0{follower.speeds[0], leader.speeds[0],
                        leader.positions[0] - follower.positions[0], offset};
  ControllerState x =
      controller_state_from_kinematics(ctx0, follower.accelerations[0],
                                       particle);

  for (Eigen::Index k = 0; k < n; ++k) {
    if (!x.allFinite()) {
      out.aborted = true;
      return out;
    }
    // Reconstruct follower kinematics from the deviation state.
    double v_f = leader.speeds[k] - x[1];
    if (v_f < 0.0) {
      v_f = 0.0;
      out.speed_clamped = true;
    }
    const double s = desired_spacing(v_f, particle) + x[0];
    const double p_f = leader.positions[k] - s - offset;
    if (leader.positions[k] - p_f <= 0.0) out.negative_gap_encountered = true;

    const double u = particle.model == ModelId::MPC
                         ? mpc_control(x, leader.accelerations[k], sys,
                                       particle)
                         : linear_control(x, particle);
    out.portfolio.positions[k] = p_f;
    out.portfolio.speeds[k] = v_f;
    out.portfolio.accelerations[k] =
        particle.model == ModelId::HL ? x[2] : u;
    if (k + 1 == n) break;

    x.head(sys.n) = sys.A.topLeftCorner(sys.n, sys.n) * x.head(sys.n) +
                    sys.B.head(sys.n) * u +
                    sys.D.head(sys.n) * leader.accelerations[k];
  }
  return out;
}

}  // namespace

SimulatedPortfolio simulate_follower(const Params& particle,
                                     const CFPair& pair,
                                     const SimOptions& opts) {
  return is_hdv(particle.model) ? simulate_hdv(particle, pair, opts)
                                : simulate_controller(particle, pair, opts);
}

}  // namespace cfabc
