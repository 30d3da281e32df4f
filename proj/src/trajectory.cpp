#include "cfabc/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "cfabc/rng.hpp"

namespace cfabc {

void StatePortfolio::validate() const {
  const auto n = positions.size();
  if (n < 2) throw std::invalid_argument("portfolio needs >= 2 samples");
  if (speeds.size() != n || accelerations.size() != n)
    throw std::invalid_argument("portfolio channel lengths differ");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!positions.allFinite() || !speeds.allFinite() ||
      !accelerations.allFinite())
    throw std::invalid_argument("portfolio contains non-finite values");
}

void CFPair::validate() const {
  leader.validate();
  follower.validate();
  if (leader.size() != follower.size())
    throw std::invalid_argument(pair_id + ": leader/follower length mismatch");
  if (leader.dt != follower.dt || leader.t0 != follower.t0)
    throw std::invalid_argument(pair_id + ": leader/follower time base mismatch");
  if (leader_length < 0.0)
    throw std::invalid_argument(pair_id + ": negative leader_length");
  if (leader.positions[0] < follower.positions[0])
    throw std::invalid_argument(pair_id + ": leader behind follower at t0");
}

Eigen::VectorXd finite_difference(const Eigen::VectorXd& values, double dt) {
  const auto n = values.size();
  if (n < 3) throw std::invalid_argument("finite_difference needs >= 3 samples");
  Eigen::VectorXd d(n);
  d[0] = (values[1] - values[0]) / dt;
  d[n - 1] = (values[n - 1] - values[n - 2]) / dt;
  d.segment(1, n - 2) =
      (values.tail(n - 2) - values.head(n - 2)) / (2.0 * dt);
  return d;
}

StatePortfolio derive_kinematics(const Eigen::VectorXd& positions, double dt,
                                 double t0) {
  if (positions.size() < 3)
    throw std::invalid_argument("derive_kinematics needs >= 3 samples");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!positions.allFinite())
    throw std::invalid_argument("derive_kinematics: non-finite position");
  StatePortfolio p;
  p.positions = positions;
  p.speeds = finite_difference(positions, dt);
  p.accelerations = finite_difference(p.speeds, dt);
  p.dt = dt;
  p.t0 = t0;
  return p;
}

double gap(const CFPair& pair, Eigen::Index k, bool subtract_length) {
  double g = pair.leader.positions[k] - pair.follower.positions[k];
  return subtract_length ? g - pair.leader_length : g;
}

std::vector<FoldSplit> split_folds(const Dataset& dataset, int k,
                                   std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("split_folds requires k >= 2");
  const std::size_t n = dataset.size();
  if (static_cast<std::size_t>(k) > n)
    throw std::invalid_argument("split_folds: k exceeds pair count");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, /*stream=*/0x666f6c64));  // "fold"
  for (std::size_t i = n; i > 1; --i)
    std::swap(order[i - 1], order[rng.uniform_index(i)]);

  std::vector<FoldSplit> folds(k);
  // Fold f gets ceil/floor so test sizes differ by at most 1.
  std::size_t offset = 0;
  for (int f = 0; f < k; ++f) {
    std::size_t sz = n / k + (static_cast<std::size_t>(f) < n % k ? 1 : 0);
    auto& split = folds[f];
    split.test.name = dataset.name + "/fold" + std::to_string(f) + "/test";
    split.train.name = dataset.name + "/fold" + std::to_string(f) + "/train";
    std::vector<bool> in_test(n, false);
    for (std::size_t j = 0; j < sz; ++j) in_test[order[offset + j]] = true;
    for (std::size_t i = 0; i < n; ++i)
      (in_test[i] ? split.test : split.train).pairs.push_back(dataset.pairs[i]);
    offset += sz;
  }
  return folds;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s) {
  double v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw std::invalid_argument("bad numeric field: '" + s + "'");
  return v;
}

struct RawPair {
  std::vector<double> t, lp, fp, lv, fv, la, fa;
  double leader_length = std::numeric_limits<double>::quiet_NaN();
};

Eigen::VectorXd to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                           static_cast<Eigen::Index>(v.size()));
}

}  // namespace

Dataset load_dataset(std::istream& in, const std::string& name,
                     LoadDiagnostics* diag) {
  LoadDiagnostics local;
  LoadDiagnostics& d = diag ? *diag : local;

  std::string header;
  if (!std::getline(in, header))
    throw std::runtime_error("empty trajectory file");
  auto cols = split_csv_line(header);
  std::map<std::string, std::size_t> idx;
  for (std::size_t i = 0; i < cols.size(); ++i) idx[cols[i]] = i;
  for (const char* req : {"pair_id", "t", "leader_pos", "follower_pos"})
    if (!idx.count(req))
      throw std::runtime_error(std::string("missing required column: ") + req);
  const bool has_speed = idx.count("leader_speed") && idx.count("follower_speed");
  const bool has_accel = idx.count("leader_accel") && idx.count("follower_accel");
  const bool has_length = idx.count("leader_length");

  // Rows grouped by pair_id, sorted by t.
  std::vector<std::string> order;
  std::map<std::string, RawPair> raw;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() < cols.size())
      throw std::runtime_error("line " + std::to_string(lineno) +
                               ": expected " + std::to_string(cols.size()) +
                               " fields");
    const std::string& id = f[idx["pair_id"]];
    if (!raw.count(id)) order.push_back(id);
    RawPair& rp = raw[id];
    rp.t.push_back(parse_double(f[idx["t"]]));
    rp.lp.push_back(parse_double(f[idx["leader_pos"]]));
    rp.fp.push_back(parse_double(f[idx["follower_pos"]]));
    if (has_speed) {
      rp.lv.push_back(parse_double(f[idx["leader_speed"]]));
      rp.fv.push_back(parse_double(f[idx["follower_speed"]]));
    }
    if (has_accel) {
      rp.la.push_back(parse_double(f[idx["leader_accel"]]));
      rp.fa.push_back(parse_double(f[idx["follower_accel"]]));
    }
    if (has_length && std::isnan(rp.leader_length))
      rp.leader_length = parse_double(f[idx["leader_length"]]);
  }

  Dataset ds;
  ds.name = name;
  for (const auto& id : order) {
    const RawPair& rp = raw.at(id);
    try {
      if (rp.t.size() < 3) throw std::invalid_argument("fewer than 3 samples");
      // Timestamps must be uniformly spaced.
      double dt = rp.t[1] - rp.t[0];
      if (!(dt > 0.0)) throw std::invalid_argument("non-increasing timestamps");
      for (std::size_t i = 2; i < rp.t.size(); ++i)
        if (std::abs((rp.t[i] - rp.t[i - 1]) - dt) > 1e-6 * std::max(1.0, dt))
          throw std::invalid_argument("non-uniform timestamps");

      auto build = [&](const std::vector<double>& pos,
                       const std::vector<double>& spd,
                       const std::vector<double>& acc) {
        StatePortfolio p;
        p.positions = to_vec(pos);
        p.dt = dt;
        p.t0 = rp.t[0];
        if (!spd.empty()) {
          p.speeds = to_vec(spd);
          p.accelerations = acc.empty()
                                ? finite_difference(p.speeds, dt)
                                : to_vec(acc);
        } else {
          p.speeds = finite_difference(p.positions, dt);
          p.accelerations = finite_difference(p.speeds, dt);
        }
        return p;
      };

      CFPair pair;
      pair.pair_id = id;
      pair.leader = build(rp.lp, rp.lv, rp.la);
      pair.follower = build(rp.fp, rp.fv, rp.fa);
      if (std::isnan(rp.leader_length)) {
        pair.leader_length = 5.0;
        d.warnings.push_back(id + ": leader_length missing, defaulting to 5.0 m");
      } else {
        pair.leader_length = rp.leader_length;
      }
      pair.validate();
      ds.pairs.push_back(std::move(pair));
    } catch (const std::exception& e) {
      d.rejected_pairs.push_back(id + ": " + e.what());
    }
  }
  return ds;
}

Dataset load_dataset(const std::string& path, LoadDiagnostics* diag) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trajectory file: " + path);
  return load_dataset(in, path, diag);
}

void save_dataset(const Dataset& dataset, std::ostream& out) {
  out << "pair_id,t,leader_pos,follower_pos,leader_speed,follower_speed,"
         "leader_accel,follower_accel,leader_length\n";
  out.precision(17);
  for (const auto& p : dataset.pairs) {
    for (Eigen::Index k = 0; k < p.leader.size(); ++k) {
      out << p.pair_id << ',' << p.leader.t0 + static_cast<double>(k) * p.leader.dt
          << ',' << p.leader.positions[k] << ',' << p.follower.positions[k]
          << ',' << p.leader.speeds[k] << ',' << p.follower.speeds[k] << ','
          << p.leader.accelerations[k] << ',' << p.follower.accelerations[k]
          << ',' << p.leader_length << '\n';
    }
  }
}

void save_dataset(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trajectory file: " + path);
  save_dataset(dataset, out);
}

}  // namespace cfabc
