#include "cfabc/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace cfabc {

const char* kVersion = "0.1.0";

namespace {

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// `with_execution` controls whether execution details (out_dir, threads) that
// have no effect on the numerical results are serialized; they are kept for
// config-file round-trips but excluded from report bytes and the provenance
// hash.
nlohmann::ordered_json config_json(const RunConfig& c, bool with_execution) {
  nlohmann::ordered_json j;
  j["dataset"] = c.dataset_path;
  std::vector<std::string> names;
  for (ModelId m : c.models) names.emplace_back(model_name(m));
  j["models"] = names;
  j["n_particles"] = c.n_particles;
  j["keep_per_pair"] = c.keep_per_pair;
  j["n_hybrid"] = c.n_hybrid;
  j["weights"] = {c.weights.position, c.weights.speed, c.weights.accel};
  j["beta"] = c.beta;
  j["folds"] = c.folds;
  j["seed"] = c.seed;
  if (with_execution) j["out_dir"] = c.out_dir;
  j["controller_subtract_length"] = c.controller_subtract_length;
  j["substeps"] = c.substeps;
  j["prior_file"] = c.prior_file;
  j["merge_mode"] =
      c.merge_mode == MergeMode::PerPairBalanced ? "balanced" : "global";
  j["norm"] = c.norm == TrajectoryNorm::RMS ? "rms" : "mean_absolute";
  j["sensitivity_keep"] = c.sensitivity_keep;
  if (with_execution) j["threads"] = c.threads;
  return j;
}

MetricRow nan_row() {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  return {nan, nan, nan, nan, nan, nan};
}

void write_metric_table(std::ostream& out,
                        const std::vector<ModelId>& models,
                        const std::map<ModelId, MetricRow>& rows,
                        const MetricRow* hybrid) {
  out.precision(17);
  out << "model,avg_position,avg_speed,avg_accel,minimum,beta_ws,ws\n";
  auto emit = [&](const std::string& name, const MetricRow& r) {
    out << name << ',' << r.avg_position << ',' << r.avg_speed << ','
        << r.avg_accel << ',' << r.minimum << ',' << r.beta_ws << ',' << r.ws
        << '\n';
  };
  for (ModelId m : models) emit(std::string(model_name(m)), rows.at(m));
  if (hybrid) emit("hybrid", *hybrid);
}

}  // namespace

RunConfig RunConfig::from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  RunConfig c;
  c.dataset_path = j.value("dataset", "");
  if (j.contains("models")) {
    c.models.clear();
    for (const auto& name : j["models"])
      c.models.push_back(model_from_name(name.get<std::string>()));
  }
  c.n_particles = j.value("n_particles", c.n_particles);
  c.keep_per_pair = j.value("keep_per_pair", c.keep_per_pair);
  c.n_hybrid = j.value("n_hybrid", c.n_hybrid);
  if (j.contains("weights")) {
    auto w = j["weights"];
    c.weights = {w.at(0).get<double>(), w.at(1).get<double>(),
                 w.at(2).get<double>()};
  }
  c.beta = j.value("beta", c.beta);
  c.folds = j.value("folds", c.folds);
  c.seed = j.value("seed", c.seed);
  c.out_dir = j.value("out_dir", c.out_dir);
  c.controller_subtract_length =
      j.value("controller_subtract_length", c.controller_subtract_length);
  c.substeps = j.value("substeps", c.substeps);
  c.prior_file = j.value("prior_file", c.prior_file);
  if (j.value("merge_mode", "balanced") == std::string("global"))
    c.merge_mode = MergeMode::Global;
  if (j.value("norm", "rms") == std::string("mean_absolute"))
    c.norm = TrajectoryNorm::MeanAbsolute;
  if (j.contains("sensitivity_keep"))
    c.sensitivity_keep = j["sensitivity_keep"].get<std::vector<int>>();
  c.threads = j.value("threads", c.threads);
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::string RunConfig::to_json() const {
  return config_json(*this, /*with_execution=*/true).dump(2);
}

std::uint64_t RunConfig::provenance_hash() const {
  return fnv1a(config_json(*this, /*with_execution=*/false).dump());
}

void RunConfig::validate() const {
  const double wsum = weights.position + weights.speed + weights.accel;
  if (std::abs(wsum - 1.0) > 1e-9)
    throw std::invalid_argument("weights must sum to 1");
  if (weights.position < 0 || weights.speed < 0 || weights.accel < 0)
    throw std::invalid_argument("weights must be nonnegative");
  if (folds < 1) throw std::invalid_argument("folds must be >= 1");
  if (n_particles == 0) throw std::invalid_argument("n_particles must be > 0");
  if (keep_per_pair < 1)
    throw std::invalid_argument("keep_per_pair must be >= 1");
  if (!(beta > 0.0) || beta > 1.0)
    throw std::invalid_argument("beta must be in (0, 1]");
  if (models.empty()) throw std::invalid_argument("no models selected");
}

AbcConfig RunConfig::abc_config(ModelId) const {
  AbcConfig a;
  a.n_particles = n_particles;
  a.keep_per_pair = keep_per_pair;
  a.weights = weights;
  a.norm = norm;
  a.sim = sim_options();
  a.seed = seed;
  a.threads = threads;
  return a;
}

SimOptions RunConfig::sim_options() const {
  return {substeps, controller_subtract_length};
}

namespace {

std::vector<Particle> owned_particles(const PosteriorSet& p) {
  std::vector<Particle> out;
  for (const auto& b : p.buckets) out.insert(out.end(), b.begin(), b.end());
  return out;
}

MetricRow safe_metrics(const std::vector<Particle>& particles,
                       const Dataset& test, const RunConfig& config,
                       std::vector<std::string>& warnings,
                       const std::string& label) {
  if (particles.empty()) {
    warnings.push_back(label + ": empty particle set, metrics unavailable");
    return nan_row();
  }
  try {
    return evaluate_metrics(particles, test, config.weights, config.beta,
                            config.norm, config.sim_options());
  } catch (const std::exception& e) {
    warnings.push_back(label + ": " + e.what());
    return nan_row();
  }
}

}  // namespace

RunReport run_calibration(const RunConfig& config, const Dataset& dataset) {
  config.validate();
  if (dataset.empty()) throw std::invalid_argument("empty dataset");
  const PriorTable priors = config.prior_file.empty()
                                ? PriorTable()
                                : PriorTable::load(config.prior_file);

  RunReport report;
  report.seed = config.seed;
  report.config_hash = config.provenance_hash();

  std::vector<FoldSplit> splits;
  if (config.folds == 1) {
    report.warnings.push_back("folds = 1: training and testing on the same data");
    splits.push_back({dataset, dataset});
  } else {
    splits = split_folds(dataset, config.folds, config.seed);
  }

  // One scoring pass at the deepest requested N; shallower posteriors are
  // exact truncations of the same scored stream.
  int run_keep = config.keep_per_pair;
  for (int n : config.sensitivity_keep) run_keep = std::max(run_keep, n);

  // Per-fold, per-sensitivity-N shares accumulated across folds.
  std::map<int, std::map<ModelId, double>> sensitivity_shares;

  for (std::size_t f = 0; f < splits.size(); ++f) {
    const Dataset& train = splits[f].train;
    const Dataset& test = splits[f].test;
    FoldResult fold;

    std::vector<PosteriorSet> deep_posteriors;
    for (ModelId m : config.models) {
      AbcConfig abc = config.abc_config(m);
      abc.keep_per_pair = run_keep;
      AbcResult res = run_abc_rs(m, train, priors, abc);
      for (auto& w : res.warnings)
        report.warnings.push_back(std::string(model_name(m)) + ": " + w);
      deep_posteriors.push_back(std::move(res.posterior));
      fold.posteriors.push_back(
          run_keep == config.keep_per_pair
              ? deep_posteriors.back()
              : deep_posteriors.back().truncated(config.keep_per_pair));
    }

    const std::size_t n_hybrid =
        config.n_hybrid ? config.n_hybrid
                        : default_hybrid_size(config.models.size(),
                                              config.keep_per_pair,
                                              train.size());
    fold.hybrid = merge_hybrid(fold.posteriors, n_hybrid, config.merge_mode);
    for (auto& w : fold.hybrid.warnings) report.warnings.push_back(w);
    fold.hybrid_counts = fold.hybrid.counts;
    fold.hybrid_total = fold.hybrid.total;

    for (int n : config.sensitivity_keep) {
      std::vector<PosteriorSet> trimmed;
      for (const auto& p : deep_posteriors) trimmed.push_back(p.truncated(n));
      const std::size_t nh =
          config.n_hybrid
              ? config.n_hybrid
              : default_hybrid_size(config.models.size(), n, train.size());
      HybridPosterior h = merge_hybrid(trimmed, nh, config.merge_mode);
      for (ModelId m : config.models)
        sensitivity_shares[n][m] += h.share(m) / static_cast<double>(splits.size());
    }

    for (std::size_t i = 0; i < config.models.size(); ++i) {
      const ModelId m = config.models[i];
      fold.model_metrics[m] =
          safe_metrics(owned_particles(fold.posteriors[i]), test, config,
                       report.warnings,
                       "fold " + std::to_string(f) + " " +
                           std::string(model_name(m)));
    }
    fold.hybrid_metrics =
        safe_metrics(fold.hybrid.particles, test, config, report.warnings,
                     "fold " + std::to_string(f) + " hybrid");
    report.folds.push_back(std::move(fold));
  }

  // Fold averages (arithmetic mean).
  const double nf = static_cast<double>(report.folds.size());
  auto add = [](MetricRow& acc, const MetricRow& r) {
    acc.avg_position += r.avg_position;
    acc.avg_speed += r.avg_speed;
    acc.avg_accel += r.avg_accel;
    acc.minimum += r.minimum;
    acc.beta_ws += r.beta_ws;
    acc.ws += r.ws;
  };
  auto scale = [nf](MetricRow& acc) {
    acc.avg_position /= nf;
    acc.avg_speed /= nf;
    acc.avg_accel /= nf;
    acc.minimum /= nf;
    acc.beta_ws /= nf;
    acc.ws /= nf;
  };
  for (ModelId m : config.models) {
    MetricRow acc{};
    for (const auto& fold : report.folds) add(acc, fold.model_metrics.at(m));
    scale(acc);
    report.averaged_model_metrics[m] = acc;
    double share = 0.0;
    for (const auto& fold : report.folds) share += fold.hybrid.share(m);
    report.averaged_shares[m] = share / nf;
  }
  MetricRow acc{};
  for (const auto& fold : report.folds) add(acc, fold.hybrid_metrics);
  scale(acc);
  report.averaged_hybrid_metrics = acc;

  for (const auto& [n, shares] : sensitivity_shares) {
    SensitivityEntry entry;
    entry.keep_per_pair = n;
    entry.averaged_shares = shares;
    entry.top_model =
        std::max_element(shares.begin(), shares.end(),
                         [](const auto& a, const auto& b) {
                           return a.second < b.second;
                         })
            ->first;
    report.sensitivity.push_back(std::move(entry));
  }

  if (!config.out_dir.empty()) write_report_files(config, report);
  return report;
}

Eigen::MatrixXd run_pairwise_matrix(const RunConfig& config,
                                    const Dataset& dataset,
                                    std::vector<PosteriorSet>* posteriors_out) {
  config.validate();
  const PriorTable priors = config.prior_file.empty()
                                ? PriorTable()
                                : PriorTable::load(config.prior_file);
  std::vector<PosteriorSet> posteriors;
  for (ModelId m : config.models) {
    AbcConfig abc = config.abc_config(m);
    posteriors.push_back(run_abc_rs(m, dataset, priors, abc).posterior);
  }
  const std::size_t n = config.models.size();
  const std::size_t n_hybrid =
      config.n_hybrid ? config.n_hybrid
                      : default_hybrid_size(2, config.keep_per_pair,
                                            dataset.size());
  Eigen::MatrixXd matrix =
      Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n),
                                static_cast<Eigen::Index>(n),
                                std::numeric_limits<double>::quiet_NaN());
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = r + 1; c < n; ++c) {
      auto [share_r, share_c] = pairwise_comparison(
          posteriors[r], posteriors[c], n_hybrid, config.merge_mode);
      matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          share_r;
      matrix(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r)) =
          share_c;
    }
  if (posteriors_out) *posteriors_out = std::move(posteriors);
  return matrix;
}

void write_report_files(const RunConfig& config, const RunReport& report) {
  namespace fs = std::filesystem;
  fs::create_directories(config.out_dir);
  const fs::path dir(config.out_dir);

  {
    // out_dir and threads are execution details; keep report bytes independent.
    std::ofstream out(dir / "config.json");
    out << config_json(config, /*with_execution=*/false).dump(2) << '\n';
  }
  for (std::size_t f = 0; f < report.folds.size(); ++f) {
    std::ofstream out(dir / ("metrics_fold" + std::to_string(f) + ".csv"));
    write_metric_table(out, config.models, report.folds[f].model_metrics,
                       &report.folds[f].hybrid_metrics);
  }
  {
    std::ofstream out(dir / "metrics_avg.csv");
    write_metric_table(out, config.models, report.averaged_model_metrics,
                       &report.averaged_hybrid_metrics);
  }
  {
    // Normalized table over the averaged metrics (models + hybrid).
    const Eigen::Index rows =
        static_cast<Eigen::Index>(config.models.size()) + 1;
    Eigen::MatrixXd table(rows, 6);
    auto fill = [&](Eigen::Index r, const MetricRow& m) {
      table.row(r) << m.avg_position, m.avg_speed, m.avg_accel, m.minimum,
          m.beta_ws, m.ws;
    };
    for (std::size_t i = 0; i < config.models.size(); ++i)
      fill(static_cast<Eigen::Index>(i),
           report.averaged_model_metrics.at(config.models[i]));
    fill(rows - 1, report.averaged_hybrid_metrics);
    const Eigen::MatrixXd norm = normalize_metrics(table);
    std::ofstream out(dir / "normalized_avg.csv");
    out.precision(17);
    out << "model,avg_position,avg_speed,avg_accel,minimum,beta_ws,ws\n";
    for (Eigen::Index r = 0; r < rows; ++r) {
      out << (r + 1 == rows
                  ? std::string("hybrid")
                  : std::string(model_name(
                        config.models[static_cast<std::size_t>(r)])));
      for (Eigen::Index c = 0; c < 6; ++c) out << ',' << norm(r, c);
      out << '\n';
    }
  }
  {
    std::ofstream out(dir / "shares.csv");
    out.precision(17);
    out << "model,fold,count,total,share\n";
    for (std::size_t f = 0; f < report.folds.size(); ++f)
      for (ModelId m : config.models) {
        const auto& counts = report.folds[f].hybrid_counts;
        const std::size_t c = counts.count(m) ? counts.at(m) : 0;
        out << model_name(m) << ',' << f << ',' << c << ','
            << report.folds[f].hybrid_total << ','
            << report.folds[f].hybrid.share(m) << '\n';
      }
    for (ModelId m : config.models)
      out << model_name(m) << ",avg,,," << report.averaged_shares.at(m)
          << '\n';
  }
  for (std::size_t f = 0; f < report.folds.size(); ++f)
    write_particle_archive(
        (dir / ("posterior_fold" + std::to_string(f) + ".csv")).string(),
        report.folds[f].hybrid.particles);
  if (!report.sensitivity.empty()) {
    std::ofstream out(dir / "sensitivity.csv");
    out.precision(17);
    out << "keep_per_pair,top_model";
    for (ModelId m : config.models) out << ',' << model_name(m);
    out << '\n';
    for (const auto& e : report.sensitivity) {
      out << e.keep_per_pair << ',' << model_name(e.top_model);
      for (ModelId m : config.models)
        out << ',' << e.averaged_shares.at(m);
      out << '\n';
    }
  }
  {
    std::ofstream out(dir / "summary.txt");
    out << "version: " << kVersion << '\n';
    out << "config_hash: " << std::hex << report.config_hash << std::dec
        << '\n';
    out << "seed: " << report.seed << '\n';
    out << "folds: " << report.folds.size() << '\n';
    out.precision(17);
    out << "shares (fold-averaged):\n";
    for (ModelId m : config.models)
      out << "  " << model_name(m) << ": " << report.averaged_shares.at(m)
          << '\n';
    if (!report.warnings.empty()) {
      out << "warnings:\n";
      for (const auto& w : report.warnings) out << "  " << w << '\n';
    }
  }
}

void write_pairwise_csv(const std::string& path,
                        const std::vector<ModelId>& models,
                        const Eigen::MatrixXd& matrix) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  out << "model";
  for (ModelId m : models) out << ',' << model_name(m);
  out << '\n';
  for (std::size_t r = 0; r < models.size(); ++r) {
    out << model_name(models[r]);
    for (std::size_t c = 0; c < models.size(); ++c) {
      out << ',';
      if (r != c)
        out << matrix(static_cast<Eigen::Index>(r),
                      static_cast<Eigen::Index>(c));
    }
    out << '\n';
  }
}

void write_particle_archive(const std::string& path,
                            const std::vector<Particle>& particles) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  out << "model,pair_id,score,params\n";
  for (const auto& p : particles) {
    out << model_name(p.params.model) << ',' << p.pair_id << ',' << p.score
        << ',';
    const auto& names = param_names(p.params.model);
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (i) out << ';';
      out << names[i] << '=' << p.params.values[static_cast<Eigen::Index>(i)];
    }
    out << '\n';
  }
}

std::vector<Particle> load_particle_archive(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open particle archive: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "model,pair_id,score,params")
    throw std::runtime_error("bad particle archive header in " + path);
  std::vector<Particle> out;
  std::uint64_t idx = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string model, pair_id, score, params;
    std::getline(ss, model, ',');
    std::getline(ss, pair_id, ',');
    std::getline(ss, score, ',');
    std::getline(ss, params);
    Particle p;
    p.params.model = model_from_name(model);
    p.pair_id = pair_id;
    p.score = std::stod(score);
    p.draw_index = idx++;
    const auto& names = param_names(p.params.model);
    p.params.values.resize(static_cast<Eigen::Index>(names.size()));
    std::stringstream ps(params);
    std::string item;
    std::size_t i = 0;
    while (std::getline(ps, item, ';')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos || i >= names.size() ||
          item.substr(0, eq) != names[i])
        throw std::runtime_error("bad particle archive record: " + line);
      p.params.values[static_cast<Eigen::Index>(i)] =
          std::stod(item.substr(eq + 1));
      ++i;
    }
    if (i != names.size())
      throw std::runtime_error("bad particle archive record: " + line);
    out.push_back(std::move(p));
  }
  return out;
}

void write_evolution_csv(const std::string& path,
                         const Eigen::MatrixXd& errors, double dt, double t0) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  out << "t";
  for (Eigen::Index j = 0; j < errors.cols(); ++j) out << ",particle" << j;
  out << '\n';
  for (Eigen::Index k = 0; k < errors.rows(); ++k) {
    out << t0 + static_cast<double>(k) * dt;
    for (Eigen::Index j = 0; j < errors.cols(); ++j) out << ',' << errors(k, j);
    out << '\n';
  }
}

}  // namespace cfabc
