#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cfabc/priors.hpp"
#include "cfabc/simulator.hpp"
#include "cfabc/trajectory.hpp"

namespace cfabc {

/// Weights of the position/speed/acceleration error channels; must sum to 1.
struct ScoreWeights {
  double position = 0.5;
  double speed = 0.3;
  double accel = 0.2;
};

/// Trajectory norm used for the per-channel deviation.
enum class TrajectoryNorm { RMS, MeanAbsolute };

/// Per-channel deviations between a simulated and an observed follower.
struct ChannelErrors {
  double position = 0.0;
  double speed = 0.0;
  double accel = 0.0;

  double weighted(const ScoreWeights& w) const {
    return w.position * position + w.speed * speed + w.accel * accel;
  }
};

ChannelErrors channel_errors(const SimulatedPortfolio& sim,
                             const StatePortfolio& observed,
                             TrajectoryNorm norm);

/// Simulates the particle on the pair and returns the weighted deviation
/// score; +inf if the simulation aborted.
double score_particle(const Params& particle, const CFPair& pair,
                      const ScoreWeights& weights,
                      TrajectoryNorm norm = TrajectoryNorm::RMS,
                      const SimOptions& opts = {});

/// A sampled parameter vector with the pair it was scored on.
struct Particle {
  Params params;
  std::uint64_t draw_index = 0;
  int pair_index = -1;
  std::string pair_id;
  double score = std::numeric_limits<double>::infinity();
};

/// Orders particles by score; draw order breaks ties so runs are
/// reproducible byte-for-byte.
inline bool particle_less(const Particle& a, const Particle& b) {
  if (a.score != b.score) return a.score < b.score;
  return a.draw_index < b.draw_index;
}

/// Per-pair buckets of accepted particles, ascending by score.
struct PosteriorSet {
  ModelId model = ModelId::OVM;
  int keep_per_pair = 0;  // N
  std::vector<std::vector<Particle>> buckets;  // one per dataset pair

  std::size_t total_particles() const;
  std::vector<const Particle*> all_particles() const;
  /// Same scored stream truncated to a smaller N per pair.
  PosteriorSet truncated(int n) const;
};

struct AbcConfig {
  std::size_t n_particles = 100000;
  int keep_per_pair = 5;  // N
  ScoreWeights weights;
  TrajectoryNorm norm = TrajectoryNorm::RMS;
  SimOptions sim;
  std::uint64_t seed = 0;
  int threads = 1;
  /// Optional absolute pre-filter; particles at or above it are never kept.
  double score_threshold = std::numeric_limits<double>::infinity();
  bool collect_scores = false;
};

struct AbcResult {
  PosteriorSet posterior;
  std::vector<double> all_scores;  // filled when collect_scores is set
  std::vector<std::string> warnings;
};

/// ABC rejection sampling: draws n_particles from the model prior, scores
/// each on one uniformly assigned pair, keeps the N best per pair. The
/// result is a deterministic function of (dataset, config, seed) regardless
/// of thread count (seeds are derived per particle index).
AbcResult run_abc_rs(ModelId model, const Dataset& dataset,
                     const PriorTable& priors, const AbcConfig& config);

/// The best particles pooled across models, with per-model counting shares.
struct HybridPosterior {
  std::vector<Particle> particles;
  std::map<ModelId, std::size_t> counts;
  std::size_t total = 0;
  int per_pair_quota = 0;  // 0 in global mode
  std::vector<std::string> warnings;

  double share(ModelId m) const {
    auto it = counts.find(m);
    return it == counts.end() || total == 0
               ? 0.0
               : static_cast<double>(it->second) / static_cast<double>(total);
  }
};

enum class MergeMode { PerPairBalanced, Global };

/// Merges model posteriors and keeps the best n_hybrid particles. In the
/// balanced mode (default) selection stays per-pair: each pair contributes
/// round(n_hybrid / |pairs|) slots, competed across models.
HybridPosterior merge_hybrid(const std::vector<PosteriorSet>& posteriors,
                             std::size_t n_hybrid,
                             MergeMode mode = MergeMode::PerPairBalanced);

/// Default hybrid size: M * N * |pairs| / 2, keeping n_hybrid >> N.
std::size_t default_hybrid_size(std::size_t n_models, int keep_per_pair,
                                std::size_t n_pairs);

/// Head-to-head shares of two models obtained by merging just their
/// posteriors; returns (share_a, share_b), summing to 1.
std::pair<double, double> pairwise_comparison(const PosteriorSet& a,
                                              const PosteriorSet& b,
                                              std::size_t n_hybrid,
                                              MergeMode mode =
                                                  MergeMode::PerPairBalanced);

/// Uniform draw over retained particles.
const Particle& sample_posterior(const PosteriorSet& posterior, Rng& rng);
const Particle& sample_posterior(const HybridPosterior& hybrid, Rng& rng);

}  // namespace cfabc
