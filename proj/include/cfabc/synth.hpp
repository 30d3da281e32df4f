#pragma once

#include <cstdint>
#include <string>

#include "cfabc/params.hpp"
#include "cfabc/trajectory.hpp"

namespace cfabc {

/// Synthetic data generator: piecewise-constant-acceleration leader
/// profiles (accelerate / cruise / brake segments) with the follower rolled
/// out by the true particle, plus optional per-channel Gaussian noise on
/// the follower.
struct SynthConfig {
  Params true_params;
  int n_pairs = 30;
  double horizon = 60.0;  // s
  double dt = 0.1;        // s
  double noise_position = 0.0;  // m, std dev
  double noise_speed = 0.0;     // m/s
  double noise_accel = 0.0;     // m/s^2
  double leader_length = 5.0;   // m
  std::uint64_t seed = 0;
};

Dataset generate_synth_dataset(const SynthConfig& config);

/// Sidecar ground-truth record (JSON): model, parameter values, noise,
/// seed.
std::string synth_ground_truth_json(const SynthConfig& config);

}  // namespace cfabc
