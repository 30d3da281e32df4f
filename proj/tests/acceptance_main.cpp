// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// nonzero if any gating criterion fails. Criterion 12 needs external field
// data and never gates the build.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <vector>

#include "cfabc/report.hpp"
#include "cfabc/synth.hpp"

using namespace cfabc;
namespace fs = std::filesystem;

namespace {

const PriorTable kPriors;
bool g_all_ok = true;
std::map<int, std::string> g_lines;

void report(int criterion, bool ok, const std::string& detail,
            bool gating = true) {
  if (gating) g_all_ok = g_all_ok && ok;
  g_lines[criterion] = std::string(ok ? "PASS" : "FAIL") + " - " + detail;
}

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const clock::time_point start = clock::now();
  return std::chrono::duration<double>(clock::now() - start).count();
}

fs::path scratch_dir(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() / ("cfabc_acceptance_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// --- shared helpers ---------------------------------------------------------

Params make(ModelId m, std::initializer_list<double> vals) {
  Params p;
  p.model = m;
  p.values.resize(static_cast<Eigen::Index>(vals.size()));
  Eigen::Index i = 0;
  for (double v : vals) p.values[i++] = v;
  return p;
}

CFPair steady_pair(double speed, double raw_spacing, Eigen::Index n,
                   double dt = 0.1, double length = 5.0) {
  CFPair pair;
  pair.pair_id = "steady";
  pair.leader_length = length;
  Eigen::VectorXd lead(n), foll(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    lead[k] = 300.0 + speed * dt * static_cast<double>(k);
    foll[k] = lead[k] - raw_spacing;
  }
  pair.leader = derive_kinematics(lead, dt);
  pair.follower = derive_kinematics(foll, dt);
  return pair;
}

// Brute-force optimum of a tiny balanced transportation problem: saturating
// any (row, column) cell and recursing visits every basic feasible solution.
void enum_recurse(const Eigen::MatrixXd& cost, Eigen::VectorXd& supply,
                  Eigen::VectorXd& demand, double acc, double& best) {
  constexpr double eps = 1e-12;
  if (supply.maxCoeff() <= eps) {
    best = std::min(best, acc);
    return;
  }
  for (Eigen::Index i = 0; i < supply.size(); ++i) {
    if (supply[i] <= eps) continue;
    for (Eigen::Index j = 0; j < demand.size(); ++j) {
      if (demand[j] <= eps) continue;
      const double f = std::min(supply[i], demand[j]);
      supply[i] -= f;
      demand[j] -= f;
      enum_recurse(cost, supply, demand, acc + f * cost(i, j), best);
      supply[i] += f;
      demand[j] += f;
    }
  }
}

double enum_oracle(const Eigen::MatrixXd& cost) {
  Eigen::VectorXd supply =
      Eigen::VectorXd::Constant(cost.rows(), 1.0 / cost.rows());
  Eigen::VectorXd demand =
      Eigen::VectorXd::Constant(cost.cols(), 1.0 / cost.cols());
  double best = std::numeric_limits<double>::infinity();
  enum_recurse(cost, supply, demand, 0.0, best);
  return best;
}

// --- criteria ---------------------------------------------------------------

void criterion_1() {
  const double t0 = now_seconds();
  Rng rng(1001);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const int m = 1 + static_cast<int>(rng.uniform_index(3));
    const int n = 1 + static_cast<int>(rng.uniform_index(3));
    Eigen::MatrixXd cost(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        cost(i, j) = static_cast<double>(rng.uniform_index(11));
    worst = std::max(worst, std::abs(wasserstein(cost).objective -
                                     enum_oracle(cost)));
  }
  const double dt = now_seconds() - t0;
  std::ostringstream ss;
  ss << "500 instances vs vertex enumeration, max |diff| = " << worst
     << ", " << dt << " s";
  report(1, worst < 1e-6 && dt < 10.0, ss.str());
}

void criterion_2() {
  Rng rng(1002);
  bool ok = true;
  double worst_b1 = 0.0;
  for (int trial = 0; trial < 200 && ok; ++trial) {
    const int m = 2 + static_cast<int>(rng.uniform_index(19));   // up to 20
    const int n = 2 + static_cast<int>(rng.uniform_index(49));   // up to 50
    Eigen::MatrixXd cost(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) cost(i, j) = rng.uniform(0.0, 10.0);
    const double ws = wasserstein(cost).objective;
    const double md = minimum_distance(cost);
    const double b015 = beta_wasserstein(cost, 0.15).objective;
    ok = ok && md <= b015 + 1e-9 && b015 <= ws + 1e-9;
    double prev = -std::numeric_limits<double>::infinity();
    for (double beta : {0.05, 0.15, 0.5, 0.95}) {
      const double b = beta_wasserstein(cost, beta).objective;
      ok = ok && b >= prev - 1e-9;
      prev = b;
    }
    worst_b1 = std::max(
        worst_b1, std::abs(beta_wasserstein(cost, 1.0).objective - ws));
  }
  std::ostringstream ss;
  ss << "200 instances up to 20x50: ordering + monotonicity hold, "
     << "max |bw(1)-ws| = " << worst_b1;
  report(2, ok && worst_b1 < 1e-6, ss.str());
}

void criterion_3() {
  Rng rng(1003);
  double worst = 0.0;
  bool in_box = true;
  for (int trial = 0; trial < 1000; ++trial) {
    const Params p = kPriors.sample(ModelId::MPC, rng);
    const DiscreteSystem sys = build_discrete_system(p, 0.1);
    ControllerState x(rng.uniform(-10.0, 10.0), rng.uniform(-5.0, 5.0), 0.0);
    const double a_l = rng.uniform(-3.0, 3.0);
    const double u = mpc_control(x, a_l, sys, p);
    in_box = in_box && u >= p[mpc::kAmin] && u <= p[mpc::kAmax];

    auto objective = [&](double v) {
      const Eigen::Vector2d next =
          sys.A.topLeftCorner<2, 2>() * x.head<2>() + sys.B.head<2>() * v +
          sys.D.head<2>() * a_l;
      return next[0] * next[0] + p[mpc::kAlpha] * next[1] * next[1] +
             p[mpc::kR] * v * v;
    };
    double best_u = p[mpc::kAmin], best_j = objective(best_u);
    for (double v = p[mpc::kAmin]; v <= p[mpc::kAmax] + 1e-12; v += 1e-3) {
      const double j = objective(v);
      if (j < best_j) {
        best_j = j;
        best_u = v;
      }
    }
    worst = std::max(worst, std::abs(u - best_u));
  }
  std::ostringstream ss;
  ss << "1000 instances vs 1e-3 grid search, max |diff| = " << worst
     << ", bounds respected = " << (in_box ? "yes" : "no");
  report(3, worst < 1e-3 && in_box, ss.str());
}

void criterion_4() {
  // 30 s horizon at dt = 0.1 s; every deviation in meters.
  const Eigen::Index n = 301;
  double worst = 0.0;
  auto check = [&](const Params& p, double v, double raw) {
    const CFPair pair = steady_pair(v, raw, n);
    const SimulatedPortfolio sim = simulate_follower(p, pair);
    if (sim.aborted) {
      worst = std::numeric_limits<double>::infinity();
      return;
    }
    worst = std::max(
        worst,
        (sim.portfolio.positions - pair.follower.positions).cwiseAbs()
            .maxCoeff());
  };
  check(make(ModelId::OVM, {1.2, 6.0, 22.0, 0.1, 1.6}), 15.0,
        (std::atanh(9.0 / 22.0) + 1.6) / 0.1 + 5.0);
  check(make(ModelId::GFM, {0.8, 0.5, 5.0, 20.0, 0.1, 1.5}), 14.0,
        (std::atanh(9.0 / 20.0) + 1.5) / 0.1 + 5.0);
  check(make(ModelId::FVDM, {1.0, 0.6, 10.0, 15.0, 20.0, 1.2}), 12.0,
        5.0 + 20.0 * (std::atanh(2.0 / 15.0) + 1.2));
  check(make(ModelId::IDM, {30.0, 1.5, 2.0, 1.0, 2.0, 4.0}), 15.0,
        (2.0 + 15.0 * 1.5) / std::sqrt(1.0 - std::pow(0.5, 4.0)));
  check(make(ModelId::LLCTG, {1.0, 1.0, 1.0, 5.0}), 12.0, 17.0 + 5.0);
  check(make(ModelId::LLCS, {15.0, 1.0, 0.8}), 12.0, 15.0 + 5.0);
  check(make(ModelId::HL, {1.0, 0.3, 1.0, 1.0, -1.0, 5.0}), 12.0, 17.0 + 5.0);
  std::ostringstream ss;
  ss << "7 model equilibria over 30 s, max position deviation = " << worst
     << " m";
  report(4, worst < 1e-6, ss.str());
}

void criterion_5() {
  const fs::path dir = scratch_dir("synth");
  double worst = 0.0;
  for (ModelId m : kAllModels) {
    SynthConfig sc;
    sc.true_params = prior_midpoint(kPriors, m);
    sc.n_pairs = 5;
    sc.horizon = 20.0;
    sc.seed = 40 + static_cast<std::uint64_t>(m);
    const Dataset ds = generate_synth_dataset(sc);
    const std::string path =
        (dir / (std::string(model_name(m)) + ".csv")).string();
    save_dataset(ds, path);
    const Dataset loaded = load_dataset(path);
    for (const auto& pair : loaded.pairs)
      worst = std::max(
          worst, score_particle(sc.true_params, pair, ScoreWeights{}));
  }
  std::ostringstream ss;
  ss << "true particle on noiseless synth data (all 8 models, via CSV), "
     << "max score = " << worst;
  report(5, worst < 1e-9, ss.str());
}

// Shared state between criteria 6, 9 and 10.
struct RecoveryRun {
  std::vector<PosteriorSet> deep;       // keep 15 per pair
  double idm_share5 = 0.0;              // hybrid share at N = 5
  bool idm_wins_pairwise = true;
  std::map<int, ModelId> top_by_keep;   // N -> top-share model
  bool counts_exact5 = false;           // model counts sum to the hybrid size
};

RecoveryRun recovery_run(std::uint64_t seed) {
  SynthConfig sc;
  sc.true_params = prior_midpoint(kPriors, ModelId::IDM);
  sc.n_pairs = 30;
  sc.noise_position = 0.1;
  sc.noise_speed = 0.05;
  sc.noise_accel = 0.05;
  sc.seed = seed;
  const Dataset ds = generate_synth_dataset(sc);

  RecoveryRun run;
  for (ModelId m : kAllModels) {
    AbcConfig abc;
    abc.n_particles = 100000;
    abc.keep_per_pair = 15;  // deepest N needed; smaller N by truncation
    abc.seed = seed;
    run.deep.push_back(run_abc_rs(m, ds, kPriors, abc).posterior);
  }

  for (int keep : {5, 10, 15}) {
    std::vector<PosteriorSet> cut;
    for (const auto& p : run.deep) cut.push_back(p.truncated(keep));
    // Hybrid size N_A = keep * |pairs| (quota = keep per pair). The default
    // M*keep*|pairs|/2 caps any single model's share at 2/M = 0.25 (a model
    // only has keep particles per pair to contribute), which would make a
    // dominance gate at 0.5 unsatisfiable; a quota of keep leaves room for
    // one model to take anywhere from 0 to 100% while still keeping the
    // hybrid much larger than keep.
    const HybridPosterior h =
        merge_hybrid(cut, static_cast<std::size_t>(keep) * ds.size());
    ModelId top = kAllModels[0];
    for (ModelId m : kAllModels)
      if (h.share(m) > h.share(top)) top = m;
    run.top_by_keep[keep] = top;
    if (keep == 5) {
      run.idm_share5 = h.share(ModelId::IDM);
      // Share exactness is a counting property: the per-model counts must
      // partition the hybrid exactly (floating shares are count / total).
      std::size_t count_sum = 0;
      for (const auto& [model, count] : h.counts) count_sum += count;
      run.counts_exact5 =
          count_sum == h.total && h.total == h.particles.size();
      const std::size_t n2 = default_hybrid_size(2, 5, ds.size());
      const auto idm = std::find_if(
          run.deep.begin(), run.deep.end(),
          [](const PosteriorSet& p) { return p.model == ModelId::IDM; });
      for (const auto& p : run.deep) {
        if (p.model == ModelId::IDM) continue;
        const auto [si, so] =
            pairwise_comparison(idm->truncated(5), p.truncated(5), n2);
        (void)so;
        run.idm_wins_pairwise = run.idm_wins_pairwise && si > 0.5;
      }
    }
  }
  return run;
}

void criteria_6_9_10(std::vector<RecoveryRun>& runs) {
  int share_hits = 0, pairwise_hits = 0, stable_hits = 0;
  bool share_sum_exact = true;
  std::ostringstream shares;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const double t0 = now_seconds();
    runs.push_back(recovery_run(seed));
    const RecoveryRun& r = runs.back();
    share_hits += r.idm_share5 >= 0.5 ? 1 : 0;
    pairwise_hits += r.idm_wins_pairwise ? 1 : 0;
    const bool stable = r.top_by_keep.at(5) == r.top_by_keep.at(10) &&
                        r.top_by_keep.at(10) == r.top_by_keep.at(15);
    stable_hits += stable ? 1 : 0;
    share_sum_exact = share_sum_exact && r.counts_exact5;
    shares << (seed > 1 ? ", " : "") << r.idm_share5;
    std::cout << "  [recovery seed " << seed << "] IDM share " << r.idm_share5
              << ", pairwise sweep " << (r.idm_wins_pairwise ? "won" : "lost")
              << ", top model stable over N in {5,10,15}: "
              << (stable ? "yes" : "no") << " ("
              << now_seconds() - t0 << " s)" << std::endl;
  }
  {
    std::ostringstream ss;
    ss << "IDM hybrid share >= 0.5 on " << share_hits
       << "/5 seeds (shares: " << shares.str() << "); pairwise sweep on "
       << pairwise_hits << "/5";
    report(6, share_hits >= 4 && pairwise_hits >= 4, ss.str());
  }
  {
    std::ostringstream ss;
    ss << "top-share model identical for N in {5,10,15} on " << stable_hits
       << "/5 seeds";
    report(9, stable_hits >= 4, ss.str());
  }
  // Criterion 10 second half: exact pairwise complements on a real matrix.
  SynthConfig sc;
  sc.true_params = prior_midpoint(kPriors, ModelId::IDM);
  sc.n_pairs = 4;
  sc.horizon = 10.0;
  sc.seed = 77;
  const Dataset ds = generate_synth_dataset(sc);
  RunConfig pc;
  pc.models = {ModelId::OVM, ModelId::IDM, ModelId::LLCS, ModelId::MPC};
  pc.n_particles = 4000;
  pc.seed = 7;
  pc.out_dir.clear();
  const Eigen::MatrixXd m = run_pairwise_matrix(pc, ds);
  bool complements = true;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      if (r != c) complements = complements && m(r, c) + m(c, r) == 1.0;
  std::ostringstream ss;
  ss << "shares partition the hybrid exactly (counting) on all 5 runs: "
     << (share_sum_exact ? "yes" : "no")
     << "; pairwise m(r,c)+m(c,r) == 1 exactly: "
     << (complements ? "yes" : "no");
  report(10, share_sum_exact && complements, ss.str());
}

void criterion_7() {
  SynthConfig sc;
  sc.true_params = prior_midpoint(kPriors, ModelId::OVM);
  sc.n_pairs = 20;
  sc.seed = 404;
  const Dataset ds = generate_synth_dataset(sc);

  AbcConfig abc;
  abc.n_particles = 200000;
  abc.keep_per_pair = 5;
  abc.seed = 404;
  const AbcResult res = run_abc_rs(ModelId::OVM, ds, kPriors, abc);

  double kappa_sum = 0.0;
  std::size_t n = 0;
  for (const auto* p : res.posterior.all_particles()) {
    kappa_sum += p->params[ovm::kKappa];
    ++n;
  }
  const double kappa_mean = kappa_sum / static_cast<double>(n);
  const double truth = sc.true_params[ovm::kKappa];

  // Scores are only comparable within a pair (pairs differ in difficulty),
  // so build an independent prior score distribution per pair and compare
  // each kept particle against the 1st percentile of its own pair.
  std::vector<double> p1(ds.size());
  Rng prior_rng(99404);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    std::vector<double> scores(5000);
    for (double& s : scores)
      s = score_particle(kPriors.sample(ModelId::OVM, prior_rng), ds.pairs[i],
                         ScoreWeights{});
    std::sort(scores.begin(), scores.end());
    p1[i] = scores[scores.size() / 100];
  }
  bool below = true;
  double worst_margin = -std::numeric_limits<double>::infinity();
  for (const auto* p : res.posterior.all_particles()) {
    const double margin =
        p->score - p1[static_cast<std::size_t>(p->pair_index)];
    worst_margin = std::max(worst_margin, margin);
    below = below && margin < 0.0;
  }

  std::ostringstream ss;
  ss << "posterior mean kappa = " << kappa_mean << " (truth " << truth
     << "); all kept scores below their pair's 1st prior percentile: "
     << (below ? "yes" : "no") << " (worst margin " << worst_margin << ")";
  report(7, std::abs(kappa_mean - truth) <= 0.2 * truth && below, ss.str());
}

void criterion_8() {
  SynthConfig sc;
  sc.true_params = prior_midpoint(kPriors, ModelId::IDM);
  sc.n_pairs = 6;
  sc.horizon = 15.0;
  sc.noise_position = 0.1;
  sc.seed = 55;
  const Dataset ds = generate_synth_dataset(sc);

  auto run = [&](const fs::path& out, int threads) {
    RunConfig c;
    c.models = {ModelId::OVM, ModelId::IDM, ModelId::LLCTG, ModelId::MPC};
    c.n_particles = 5000;
    c.keep_per_pair = 5;
    c.folds = 2;
    c.seed = 9;
    c.sensitivity_keep = {3, 5};
    c.out_dir = out.string();
    c.threads = threads;
    run_calibration(c, ds);
  };
  const fs::path d1 = scratch_dir("det1");
  const fs::path d3 = scratch_dir("det3");
  run(d1, 1);
  run(d3, 3);

  bool identical = true;
  int files = 0;
  std::string first_diff;
  for (const auto& entry : fs::directory_iterator(d1)) {
    const fs::path other = d3 / entry.path().filename();
    std::ifstream a(entry.path(), std::ios::binary), b(other, std::ios::binary);
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    if (!fs::exists(other) || sa.str() != sb.str()) {
      identical = false;
      if (first_diff.empty()) first_diff = entry.path().filename().string();
    }
    ++files;
  }
  std::ostringstream ss;
  ss << files << " report files compared between 1-thread and 3-thread runs"
     << (identical ? ", all byte-identical"
                   : ", first difference in " + first_diff);
  report(8, identical && files >= 8, ss.str());
}

void criterion_11() {
  const double dt = 0.1;
  const Eigen::Index n = 101;
  Eigen::VectorXd pos(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double t = dt * static_cast<double>(k);
    pos[k] = 3.0 + 2.0 * t + 0.7 * t * t;
  }
  const StatePortfolio p = derive_kinematics(pos, dt);
  double worst_v = 0.0, worst_a = 0.0;
  for (Eigen::Index k = 1; k + 1 < n; ++k)
    worst_v = std::max(
        worst_v,
        std::abs(p.speeds[k] - (2.0 + 1.4 * dt * static_cast<double>(k))));
  for (Eigen::Index k = 2; k + 2 < n; ++k)
    worst_a = std::max(worst_a, std::abs(p.accelerations[k] - 1.4));
  std::ostringstream ss;
  ss << "quadratic input: interior speed error " << worst_v
     << ", interior acceleration error " << worst_a;
  report(11, worst_v < 1e-12 && worst_a < 1e-11, ss.str());
}

void criterion_12() {
  const char* env = std::getenv("CFABC_NGSIM_CSV");
  std::string path = env ? env : "data/ngsim_i80.csv";
  if (!fs::exists(path)) {
    report(12, true,
           "SKIPPED - no field dataset found (set CFABC_NGSIM_CSV or place "
           "data/ngsim_i80.csv); non-gating",
           /*gating=*/false);
    return;
  }
  try {
    LoadDiagnostics diag;
    const Dataset ds = load_dataset(path, &diag);
    RunConfig c;
    c.n_particles = 100000;
    c.keep_per_pair = 5;
    c.seed = 1;
    c.out_dir.clear();
    const RunReport rep = run_calibration(c, ds);
    double hdv_share = 0.0;
    for (ModelId m : kAllModels)
      if (is_hdv(m)) hdv_share += rep.averaged_shares.at(m);
    std::ostringstream ss;
    ss << "field data: HDV-family hybrid share = " << hdv_share
       << " (reference behavior > 0.97; reported, not gated)";
    report(12, true, ss.str(), /*gating=*/false);
  } catch (const std::exception& e) {
    report(12, true, std::string("SKIPPED - field run failed: ") + e.what(),
           /*gating=*/false);
  }
}

}  // namespace

int main() {
  std::cout.precision(12);
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  std::vector<RecoveryRun> runs;
  criteria_6_9_10(runs);
  criterion_7();
  criterion_8();
  criterion_11();
  criterion_12();
  for (const auto& [idx, line] : g_lines)
    std::cout << "criterion " << idx << ": " << line << '\n';
  std::cout << (g_all_ok ? "ALL GATING CRITERIA PASSED"
                         : "GATING FAILURES PRESENT")
            << std::endl;
  return g_all_ok ? 0 : 1;
}
