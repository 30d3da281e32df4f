#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cfabc/abc.hpp"
#include "cfabc/metrics.hpp"

namespace cfabc {

/// Full run configuration; serialized as JSON. `threads` is an execution
/// detail: results are independent of it and it is excluded from the
/// provenance hash.
struct RunConfig {
  std::string dataset_path;
  std::vector<ModelId> models = {kAllModels.begin(), kAllModels.end()};
  std::size_t n_particles = 100000;
  int keep_per_pair = 5;     // N
  std::size_t n_hybrid = 0;  // N^A; 0 = M*N*|pairs|/2
  ScoreWeights weights;
  double beta = 0.15;
  int folds = 1;  // 1 = no cross-validation (train == test, warned)
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  bool controller_subtract_length = true;
  int substeps = 1;
  std::string prior_file;  // empty = built-in defaults
  MergeMode merge_mode = MergeMode::PerPairBalanced;
  TrajectoryNorm norm = TrajectoryNorm::RMS;
  std::vector<int> sensitivity_keep;  // e.g. {5, 10, 15}
  int threads = 1;

  static RunConfig from_json(const std::string& text);
  static RunConfig load(const std::string& path);
  std::string to_json() const;
  /// Stable FNV-1a hash of the canonical config text (threads excluded).
  std::uint64_t provenance_hash() const;
  void validate() const;

  AbcConfig abc_config(ModelId model) const;
  SimOptions sim_options() const;
};

struct FoldResult {
  std::map<ModelId, MetricRow> model_metrics;
  MetricRow hybrid_metrics;
  std::map<ModelId, std::size_t> hybrid_counts;
  std::size_t hybrid_total = 0;
  HybridPosterior hybrid;
  std::vector<PosteriorSet> posteriors;
};

/// Hybrid shares obtained when keeping a different number of particles per
/// pair (the N-sensitivity sweep).
struct SensitivityEntry {
  int keep_per_pair = 0;
  std::map<ModelId, double> averaged_shares;
  ModelId top_model = ModelId::OVM;
};

struct RunReport {
  std::vector<FoldResult> folds;
  std::map<ModelId, MetricRow> averaged_model_metrics;
  MetricRow averaged_hybrid_metrics;
  std::map<ModelId, double> averaged_shares;
  std::vector<SensitivityEntry> sensitivity;
  std::vector<std::string> warnings;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
};

/// Runs ABC per model on each training fold, merges the hybrid, evaluates
/// the six metrics for every single model and the hybrid on the test fold,
/// and (when out_dir is nonempty) writes the report files.
RunReport run_calibration(const RunConfig& config, const Dataset& dataset);

/// Pairwise model-selection matrix: cell (r, c) is the share of row model r
/// when merged head-to-head against column model c; diagonal is NaN.
Eigen::MatrixXd run_pairwise_matrix(const RunConfig& config,
                                    const Dataset& dataset,
                                    std::vector<PosteriorSet>* posteriors_out =
                                        nullptr);

void write_report_files(const RunConfig& config, const RunReport& report);
void write_pairwise_csv(const std::string& path,
                        const std::vector<ModelId>& models,
                        const Eigen::MatrixXd& matrix);
void write_evolution_csv(const std::string& path,
                         const Eigen::MatrixXd& errors, double dt, double t0);

/// Posterior archive: one CSV record per retained particle
/// (model, pair_id, score, named parameter values). Round-trips through
/// load_particle_archive.
void write_particle_archive(const std::string& path,
                            const std::vector<Particle>& particles);
std::vector<Particle> load_particle_archive(const std::string& path);

/// Library version stamped into provenance blocks.
extern const char* kVersion;

}  // namespace cfabc
