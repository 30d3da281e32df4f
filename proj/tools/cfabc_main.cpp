#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cfabc/report.hpp"
#include "cfabc/synth.hpp"

namespace {

using namespace cfabc;

std::vector<ModelId> parse_models(const std::vector<std::string>& names) {
  std::vector<ModelId> out;
  for (const auto& n : names) out.push_back(model_from_name(n));
  return out;
}

// Shared --config + override plumbing for the run-style subcommands.
struct RunArgs {
  std::string config_path;
  std::string dataset;
  std::vector<std::string> models;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::size_t particles = 0;
  int n_keep = 0;
  double beta = 0.0;
  int folds = 0;
  std::string out;
  int threads = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Run configuration JSON file");
    cmd->add_option("--dataset", dataset, "Trajectory CSV path");
    cmd->add_option("--models", models, "Model subset (e.g. OVM IDM MPC)");
    cmd->add_option("--seed", seed, "Root seed")->each([this](std::string) {
      seed_set = true;
    });
    cmd->add_option("--particles", particles, "Particles sampled per model");
    cmd->add_option("--n-keep", n_keep, "Particles kept per pair (N)");
    cmd->add_option("--beta", beta, "Beta for the partial Wasserstein distance");
    cmd->add_option("--folds", folds, "Cross-validation folds (1 = none)");
    cmd->add_option("--out", out, "Output directory");
    cmd->add_option("--threads", threads, "Worker threads (does not affect results)");
  }

  RunConfig resolve() const {
    RunConfig c =
        config_path.empty() ? RunConfig() : RunConfig::load(config_path);
    if (!dataset.empty()) c.dataset_path = dataset;
    if (!models.empty()) c.models = parse_models(models);
    if (seed_set) c.seed = seed;
    if (particles) c.n_particles = particles;
    if (n_keep) c.keep_per_pair = n_keep;
    if (beta > 0.0) c.beta = beta;
    if (folds) c.folds = folds;
    if (!out.empty()) c.out_dir = out;
    if (threads) c.threads = threads;
    return c;
  }
};

int cmd_calibrate(const RunArgs& args) {
  RunConfig config = args.resolve();
  LoadDiagnostics diag;
  Dataset dataset = load_dataset(config.dataset_path, &diag);
  for (const auto& r : diag.rejected_pairs)
    std::cerr << "warning: rejected pair " << r << '\n';
  RunReport report = run_calibration(config, dataset);
  std::cout << "calibrated " << dataset.size() << " pairs over "
            << report.folds.size() << " fold(s); reports in " << config.out_dir
            << '\n';
  for (ModelId m : config.models)
    std::cout << "  share " << model_name(m) << ": "
              << report.averaged_shares.at(m) << '\n';
  return 0;
}

int cmd_pairwise(const RunArgs& args) {
  RunConfig config = args.resolve();
  Dataset dataset = load_dataset(config.dataset_path);
  Eigen::MatrixXd matrix = run_pairwise_matrix(config, dataset);
  std::filesystem::create_directories(config.out_dir);
  const std::string path =
      (std::filesystem::path(config.out_dir) / "pairwise.csv").string();
  write_pairwise_csv(path, config.models, matrix);
  std::cout << "pairwise matrix (" << config.models.size() << " models) -> "
            << path << '\n';
  return 0;
}

int cmd_evolution(const RunArgs& args, const std::string& pair_id,
                  double top_fraction) {
  RunConfig config = args.resolve();
  Dataset dataset = load_dataset(config.dataset_path);
  RunConfig no_files = config;
  no_files.out_dir.clear();
  no_files.folds = 1;
  RunReport report = run_calibration(no_files, dataset);
  const HybridPosterior& hybrid = report.folds.front().hybrid;

  auto it = std::find_if(dataset.pairs.begin(), dataset.pairs.end(),
                         [&](const CFPair& p) { return p.pair_id == pair_id; });
  if (it == dataset.pairs.end())
    throw std::runtime_error("unknown pair id: " + pair_id);

  std::vector<Particle> sorted = hybrid.particles;
  std::sort(sorted.begin(), sorted.end(), particle_less);
  const auto n_top = std::max<std::size_t>(
      1, static_cast<std::size_t>(top_fraction *
                                  static_cast<double>(sorted.size())));
  std::vector<Particle> top(sorted.begin(),
                            sorted.begin() + std::min(n_top, sorted.size()));

  std::filesystem::create_directories(config.out_dir);
  const std::filesystem::path dir(config.out_dir);
  write_evolution_csv((dir / "evolution_full.csv").string(),
                      position_error_evolution(sorted, *it,
                                               config.sim_options()),
                      it->follower.dt, it->follower.t0);
  write_evolution_csv((dir / "evolution_top.csv").string(),
                      position_error_evolution(top, *it,
                                               config.sim_options()),
                      it->follower.dt, it->follower.t0);
  std::cout << "error evolution for pair " << pair_id << " ("
            << sorted.size() << " particles, top " << top.size() << ") -> "
            << config.out_dir << '\n';
  return 0;
}

int cmd_synth(const std::string& model, const std::vector<std::string>& kv,
              int pairs, double horizon, double dt,
              const std::vector<double>& noise, std::uint64_t seed,
              const std::string& out, const std::string& prior_file) {
  const PriorTable priors =
      prior_file.empty() ? PriorTable() : PriorTable::load(prior_file);
  SynthConfig sc;
  sc.true_params = prior_midpoint(priors, model_from_name(model));
  const auto& names = param_names(sc.true_params.model);
  for (const auto& item : kv) {
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("--param expects name=value, got: " + item);
    const std::string name = item.substr(0, eq);
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end())
      throw std::runtime_error("unknown parameter for " + model + ": " + name);
    sc.true_params.values[static_cast<Eigen::Index>(it - names.begin())] =
        std::stod(item.substr(eq + 1));
  }
  sc.n_pairs = pairs;
  sc.horizon = horizon;
  sc.dt = dt;
  if (!noise.empty()) {
    if (noise.size() != 3)
      throw std::runtime_error("--noise expects three values (m, m/s, m/s^2)");
    sc.noise_position = noise[0];
    sc.noise_speed = noise[1];
    sc.noise_accel = noise[2];
  }
  sc.seed = seed;

  Dataset ds = generate_synth_dataset(sc);
  save_dataset(ds, out);
  std::ofstream truth(out + ".truth.json");
  truth << synth_ground_truth_json(sc) << '\n';
  std::cout << "wrote " << ds.size() << " synthetic pairs to " << out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic hybrid car-following calibration"};
  app.require_subcommand(1);

  RunArgs cal_args, pw_args, evo_args;
  auto* cal = app.add_subcommand("calibrate",
                                 "ABC calibration, hybrid merge, metrics");
  cal_args.attach(cal);

  auto* pw = app.add_subcommand("pairwise", "Head-to-head model comparison matrix");
  pw_args.attach(pw);

  auto* evo = app.add_subcommand("evolution", "Position-error evolution series");
  evo_args.attach(evo);
  std::string evo_pair;
  double evo_fraction = 0.05;
  evo->add_option("--pair", evo_pair, "Pair id to evaluate")->required();
  evo->add_option("--top-fraction", evo_fraction,
                  "Best-fitted fraction for the subset file");

  auto* synth = app.add_subcommand("synth", "Generate synthetic trajectory data");
  std::string sy_model = "IDM", sy_out = "synth.csv", sy_priors;
  std::vector<std::string> sy_params;
  std::vector<double> sy_noise;
  int sy_pairs = 30;
  double sy_horizon = 60.0, sy_dt = 0.1;
  std::uint64_t sy_seed = 0;
  synth->add_option("--model", sy_model, "True model");
  synth->add_option("--param", sy_params,
                    "Override a true parameter (name=value, repeatable)");
  synth->add_option("--pairs", sy_pairs, "Number of CF pairs");
  synth->add_option("--horizon", sy_horizon, "Duration per pair (s)");
  synth->add_option("--dt", sy_dt, "Sampling interval (s)");
  synth->add_option("--noise", sy_noise,
                    "Gaussian noise std devs: position speed accel");
  synth->add_option("--seed", sy_seed, "Seed");
  synth->add_option("--out", sy_out, "Output CSV path");
  synth->add_option("--priors", sy_priors, "Prior bounds JSON (for midpoints)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cal->parsed()) return cmd_calibrate(cal_args);
    if (pw->parsed()) return cmd_pairwise(pw_args);
    if (evo->parsed()) return cmd_evolution(evo_args, evo_pair, evo_fraction);
    if (synth->parsed())
      return cmd_synth(sy_model, sy_params, sy_pairs, sy_horizon, sy_dt,
                       sy_noise, sy_seed, sy_out, sy_priors);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
