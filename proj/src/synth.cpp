#include "cfabc/synth.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "cfabc/rng.hpp"
#include "cfabc/simulator.hpp"

namespace cfabc {

namespace {

constexpr std::uint64_t kSynthStream = 0x73796e74;  // "synt"

// Piecewise-constant-acceleration leader: random segments alternating
// through accelerate / cruise / brake regimes, speed kept in a sane band.
StatePortfolio generate_leader(Rng& rng, double horizon, double dt) {
  const auto n = static_cast<Eigen::Index>(std::lround(horizon / dt));
  StatePortfolio leader;
  leader.dt = dt;
  leader.positions.resize(n);
  leader.speeds.resize(n);
  leader.accelerations.resize(n);

  double pos = 200.0;
  double speed = rng.uniform(8.0, 25.0);
  double accel = 0.0;
  Eigen::Index segment_end = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (k == segment_end) {
      const double duration = rng.uniform(3.0, 8.0);
      segment_end = k + static_cast<Eigen::Index>(std::lround(duration / dt));
      switch (rng.uniform_index(3)) {
        case 0: accel = rng.uniform(0.3, 1.5); break;   // accelerate
        case 1: accel = 0.0; break;                     // cruise
        default: accel = rng.uniform(-2.0, -0.3); break;  // brake
      }
    }
    // Saturate the segment when the speed band is hit.
    if ((speed <= 2.0 && accel < 0.0) || (speed >= 33.0 && accel > 0.0))
      accel = 0.0;
    leader.positions[k] = pos;
    leader.speeds[k] = speed;
    leader.accelerations[k] = accel;
    speed = std::clamp(speed + accel * dt, 0.0, 35.0);
    pos += speed * dt;
  }
  return leader;
}

}  // namespace

Dataset generate_synth_dataset(const SynthConfig& config) {
  Dataset ds;
  ds.name = std::string("synth_") + std::string(model_name(config.true_params.model));
  for (int i = 0; i < config.n_pairs; ++i) {
    Rng rng(derive_seed(config.seed, kSynthStream,
                        static_cast<std::uint64_t>(i)));
    CFPair pair;
    pair.pair_id = "synth_" + std::to_string(i);
    pair.leader_length = config.leader_length;
    pair.leader = generate_leader(rng, config.horizon, config.dt);

    // Follower starts at the leader's speed behind a speed-dependent gap;
    // the true particle generates the rest.
    const double v0 = pair.leader.speeds[0];
    const double gap0 = v0 * rng.uniform(1.0, 1.6) + rng.uniform(6.0, 12.0);
    const auto n = pair.leader.size();
    pair.follower.dt = config.dt;
    pair.follower.positions = Eigen::VectorXd::Constant(
        n, pair.leader.positions[0] - gap0 - config.leader_length);
    pair.follower.speeds = Eigen::VectorXd::Constant(n, v0);
    pair.follower.accelerations = Eigen::VectorXd::Zero(n);

    SimulatedPortfolio sim = simulate_follower(config.true_params, pair);
    pair.follower = sim.portfolio;

    if (config.noise_position > 0.0 || config.noise_speed > 0.0 ||
        config.noise_accel > 0.0) {
      for (Eigen::Index k = 0; k < n; ++k) {
        pair.follower.positions[k] += config.noise_position * rng.normal();
        pair.follower.speeds[k] += config.noise_speed * rng.normal();
        pair.follower.accelerations[k] += config.noise_accel * rng.normal();
      }
    }
    ds.pairs.push_back(std::move(pair));
  }
  return ds;
}

std::string synth_ground_truth_json(const SynthConfig& config) {
  nlohmann::ordered_json j;
  j["model"] = std::string(model_name(config.true_params.model));
  nlohmann::ordered_json values;
  const auto& names = param_names(config.true_params.model);
  for (std::size_t i = 0; i < names.size(); ++i)
    values[names[i]] = config.true_params.values[static_cast<Eigen::Index>(i)];
  j["params"] = values;
  j["n_pairs"] = config.n_pairs;
  j["horizon"] = config.horizon;
  j["dt"] = config.dt;
  j["noise"] = {{"position", config.noise_position},
                {"speed", config.noise_speed},
                {"accel", config.noise_accel}};
  j["leader_length"] = config.leader_length;
  j["seed"] = config.seed;
  return j.dump(2);
}

}  // namespace cfabc
