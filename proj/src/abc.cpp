#include "cfabc/abc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace cfabc {

namespace {

// Seed sub-stream tags (arbitrary fixed salts).
constexpr std::uint64_t kParticleStream = 0x70617274;  // "part"

double channel_norm(const Eigen::VectorXd& sim, const Eigen::VectorXd& obs,
                    TrajectoryNorm norm) {
  const Eigen::ArrayXd diff = (sim - obs).array();
  if (norm == TrajectoryNorm::RMS)
    return std::sqrt(diff.square().mean());
  return diff.abs().mean();
}

// Keeps a bucket sorted ascending and capped at n.
void bucket_insert(std::vector<Particle>& bucket, Particle p, int n) {
  if (bucket.size() == static_cast<std::size_t>(n) &&
      !particle_less(p, bucket.back()))
    return;
  auto pos = std::upper_bound(bucket.begin(), bucket.end(), p, particle_less);
  bucket.insert(pos, std::move(p));
  if (bucket.size() > static_cast<std::size_t>(n)) bucket.pop_back();
}

}  // namespace

ChannelErrors channel_errors(const SimulatedPortfolio& sim,
                             const StatePortfolio& observed,
                             TrajectoryNorm norm) {
  ChannelErrors e;
  if (sim.aborted) {
    e.position = e.speed = e.accel =
        std::numeric_limits<double>::infinity();
    return e;
  }
  e.position = channel_norm(sim.portfolio.positions, observed.positions, norm);
  e.speed = channel_norm(sim.portfolio.speeds, observed.speeds, norm);
  e.accel =
      channel_norm(sim.portfolio.accelerations, observed.accelerations, norm);
  return e;
}

double score_particle(const Params& particle, const CFPair& pair,
                      const ScoreWeights& weights, TrajectoryNorm norm,
                      const SimOptions& opts) {
  const SimulatedPortfolio sim = simulate_follower(particle, pair, opts);
  if (sim.aborted) return std::numeric_limits<double>::infinity();
  return channel_errors(sim, pair.follower, norm).weighted(weights);
}

std::size_t PosteriorSet::total_particles() const {
  std::size_t n = 0;
  for (const auto& b : buckets) n += b.size();
  return n;
}

std::vector<const Particle*> PosteriorSet::all_particles() const {
  std::vector<const Particle*> out;
  out.reserve(total_particles());
  for (const auto& b : buckets)
    for (const auto& p : b) out.push_back(&p);
  return out;
}

PosteriorSet PosteriorSet::truncated(int n) const {
  PosteriorSet out;
  out.model = model;
  out.keep_per_pair = n;
  out.buckets.resize(buckets.size());
  for (std::size_t i = 0; i < buckets.size(); ++i) {
    const auto take =
        std::min<std::size_t>(buckets[i].size(), static_cast<std::size_t>(n));
    out.buckets[i].assign(buckets[i].begin(), buckets[i].begin() + take);
  }
  return out;
}

AbcResult run_abc_rs(ModelId model, const Dataset& dataset,
                     const PriorTable& priors, const AbcConfig& config) {
  if (dataset.empty()) throw std::invalid_argument("run_abc_rs: empty dataset");
  if (config.keep_per_pair < 1)
    throw std::invalid_argument("run_abc_rs: keep_per_pair must be >= 1");

  AbcResult result;
  result.posterior.model = model;
  result.posterior.keep_per_pair = config.keep_per_pair;
  const std::size_t n_pairs = dataset.size();
  if (config.n_particles <
      static_cast<std::size_t>(config.keep_per_pair) * n_pairs)
    result.warnings.push_back(
        "n_particles below keep_per_pair * pair count; buckets may be "
        "under-full");

  if (config.collect_scores) result.all_scores.resize(config.n_particles);

  const std::uint64_t model_stream =
      kParticleStream ^ (static_cast<std::uint64_t>(model) << 32);

  const int n_threads = std::max(1, config.threads);
  std::vector<std::vector<std::vector<Particle>>> worker_buckets(
      n_threads, std::vector<std::vector<Particle>>(n_pairs));

  auto worker = [&](int t) {
    auto& buckets = worker_buckets[t];
    const std::size_t begin = config.n_particles * t / n_threads;
    const std::size_t end = config.n_particles * (t + 1) / n_threads;
    for (std::size_t idx = begin; idx < end; ++idx) {
      Rng rng(derive_seed(config.seed, model_stream, idx));
      Particle p;
      p.params = priors.sample(model, rng);
      p.draw_index = idx;
      p.pair_index = static_cast<int>(rng.uniform_index(n_pairs));
      p.score = score_particle(p.params, dataset.pairs[p.pair_index],
                               config.weights, config.norm, config.sim);
      if (config.collect_scores) result.all_scores[idx] = p.score;
      if (std::isfinite(p.score) && p.score < config.score_threshold) {
        p.pair_id = dataset.pairs[p.pair_index].pair_id;
        bucket_insert(buckets[p.pair_index], std::move(p),
                      config.keep_per_pair);
      }
    }
  };

  if (n_threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker, t);
    for (auto& th : threads) th.join();
  }

  result.posterior.buckets.resize(n_pairs);
  for (std::size_t i = 0; i < n_pairs; ++i) {
    auto& merged = result.posterior.buckets[i];
    for (auto& wb : worker_buckets)
      merged.insert(merged.end(), std::make_move_iterator(wb[i].begin()),
                    std::make_move_iterator(wb[i].end()));
    std::sort(merged.begin(), merged.end(), particle_less);
    if (merged.size() > static_cast<std::size_t>(config.keep_per_pair))
      merged.resize(config.keep_per_pair);
    if (merged.empty())
      result.warnings.push_back("pair " + dataset.pairs[i].pair_id +
                                ": no finite-score particle accepted");
  }
  return result;
}

namespace {

// Cross-model ordering for merging: score, then model, then draw order.
bool merge_less(const Particle& a, const Particle& b) {
  if (a.score != b.score) return a.score < b.score;
  if (a.params.model != b.params.model) return a.params.model < b.params.model;
  return a.draw_index < b.draw_index;
}

}  // namespace

std::size_t default_hybrid_size(std::size_t n_models, int keep_per_pair,
                                std::size_t n_pairs) {
  return std::max<std::size_t>(
      1, n_models * static_cast<std::size_t>(keep_per_pair) * n_pairs / 2);
}

HybridPosterior merge_hybrid(const std::vector<PosteriorSet>& posteriors,
                             std::size_t n_hybrid, MergeMode mode) {
  if (posteriors.empty())
    throw std::invalid_argument("merge_hybrid: no posteriors");
  const std::size_t n_pairs = posteriors.front().buckets.size();
  for (const auto& p : posteriors)
    if (p.buckets.size() != n_pairs)
      throw std::invalid_argument(
          "merge_hybrid: posteriors built on different datasets");

  HybridPosterior hybrid;
  for (const auto& p : posteriors) hybrid.counts[p.model] = 0;

  if (mode == MergeMode::PerPairBalanced) {
    std::size_t quota =
        std::max<std::size_t>(1, (n_hybrid + n_pairs / 2) / n_pairs);
    hybrid.per_pair_quota = static_cast<int>(quota);
    if (quota * n_pairs != n_hybrid)
      hybrid.warnings.push_back(
          "hybrid size rounded to " + std::to_string(quota * n_pairs) +
          " (quota " + std::to_string(quota) + " per pair)");
    for (std::size_t i = 0; i < n_pairs; ++i) {
      std::vector<Particle> pool;
      for (const auto& p : posteriors)
        pool.insert(pool.end(), p.buckets[i].begin(), p.buckets[i].end());
      std::sort(pool.begin(), pool.end(), merge_less);
      if (pool.size() > quota) pool.resize(quota);
      for (auto& p : pool) {
        ++hybrid.counts[p.params.model];
        hybrid.particles.push_back(std::move(p));
      }
    }
  } else {
    std::vector<Particle> pool;
    for (const auto& p : posteriors)
      for (const auto& b : p.buckets)
        pool.insert(pool.end(), b.begin(), b.end());
    std::sort(pool.begin(), pool.end(), merge_less);
    if (pool.size() > n_hybrid) pool.resize(n_hybrid);
    for (auto& p : pool) {
      ++hybrid.counts[p.params.model];
      hybrid.particles.push_back(std::move(p));
    }
  }
  hybrid.total = hybrid.particles.size();
  return hybrid;
}

std::pair<double, double> pairwise_comparison(const PosteriorSet& a,
                                              const PosteriorSet& b,
                                              std::size_t n_hybrid,
                                              MergeMode mode) {
  if (a.model == b.model)
    throw std::invalid_argument("pairwise_comparison: identical models");
  HybridPosterior h = merge_hybrid({a, b}, n_hybrid, mode);
  return {h.share(a.model), h.share(b.model)};
}

const Particle& sample_posterior(const PosteriorSet& posterior, Rng& rng) {
  auto all = posterior.all_particles();
  if (all.empty())
    throw std::invalid_argument("sample_posterior: empty particle set");
  return *all[rng.uniform_index(all.size())];
}

const Particle& sample_posterior(const HybridPosterior& hybrid, Rng& rng) {
  if (hybrid.particles.empty())
    throw std::invalid_argument("sample_posterior: empty particle set");
  return hybrid.particles[rng.uniform_index(hybrid.particles.size())];
}

}  // namespace cfabc
