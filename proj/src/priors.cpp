#include "cfabc/priors.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace cfabc {

PriorTable::PriorTable() {
  auto set = [&](ModelId m, std::vector<ParamBound> b) {
    tables_[static_cast<int>(m)] = std::move(b);
  };
  set(ModelId::OVM, {{"kappa", 0.5, 2.0},
                     {"v1", 5.0, 8.0},
                     {"v2", 20.0, 25.0},
                     {"c1", 0.05, 0.2},
                     {"c2", 1.5, 1.7}});
  set(ModelId::GFM, {{"K", 0.0, 2.0},
                     {"lambda", 0.0, 2.0},
                     {"v1", 0.0, 10.0},
                     {"v2", 0.0, 30.0},
                     {"c1", 0.0, 0.2},
                     {"c2", 1.0, 2.0}});
  // FVDM relaxation time is published as 600-2000; read as milliseconds.
  set(ModelId::FVDM, {{"tau", 600.0, 2000.0, 0.001},
                      {"lambda", 0.0, 2.0},
                      {"V1", 0.0, 40.0},
                      {"V2", 0.0, 40.0},
                      {"l_int", 0.0, 40.0},
                      {"beta", 0.0, 40.0}});
  set(ModelId::IDM, {{"v_max", 20.0, 40.0},
                     {"T", 0.8, 2.5},
                     {"s0", 0.5, 3.0},
                     {"a", 0.5, 2.0},
                     {"b", 1.0, 4.0},
                     {"delta", 2.0, 5.0}});
  set(ModelId::LLCTG, {{"tau_star", 0.8, 1.2},
                       {"k_s", 0.3, 2.3},
                       {"k_v", 0.3, 2.3},
                       {"l", 1.0, 11.0}});
  set(ModelId::LLCS, {{"s0", 5.0, 25.0},
                      {"k_s", 0.3, 2.3},
                      {"k_v", 0.3, 2.3}});
  set(ModelId::HL, {{"tau_star", 0.8, 1.2},
                    {"TT", 0.1, 0.5},
                    {"k_s", 0.1, 2.3},
                    {"k_v", 0.1, 2.3},
                    {"k_a", -3.0, 0.0},
                    {"l", 3.0, 8.0}});
  set(ModelId::MPC, {{"tau_star", 0.6, 1.4},
                     {"R", 0.3, 1.7},
                     {"alpha", 0.3, 1.7},
                     {"l", 3.0, 7.0},
                     {"a_min", -5.0, -3.0},
                     {"a_max", 3.0, 5.0}});
}

const std::vector<ParamBound>& PriorTable::bounds(ModelId m) const {
  return tables_[static_cast<int>(m)];
}

std::vector<ParamBound>& PriorTable::bounds(ModelId m) {
  return tables_[static_cast<int>(m)];
}

Params PriorTable::sample(ModelId m, Rng& rng) const {
  const auto& b = bounds(m);
  Params p;
  p.model = m;
  p.values.resize(static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < b.size(); ++i)
    p.values[static_cast<Eigen::Index>(i)] =
        rng.uniform(b[i].lower, b[i].upper) * b[i].scale;
  return p;
}

bool PriorTable::contains(const Params& p) const {
  const auto& b = bounds(p.model);
  if (p.values.size() != static_cast<Eigen::Index>(b.size())) return false;
  for (std::size_t i = 0; i < b.size(); ++i) {
    double v = p.values[static_cast<Eigen::Index>(i)];
    if (v < b[i].lower * b[i].scale || v > b[i].upper * b[i].scale)
      return false;
  }
  return true;
}

std::string PriorTable::to_json() const {
  nlohmann::ordered_json j;
  for (ModelId m : kAllModels) {
    nlohmann::ordered_json rows = nlohmann::json::array();
    for (const auto& b : bounds(m)) {
      nlohmann::ordered_json row = {
          {"name", b.name}, {"lower", b.lower}, {"upper", b.upper}};
      if (b.scale != 1.0) row["scale"] = b.scale;
      rows.push_back(row);
    }
    j[std::string(model_name(m))] = rows;
  }
  return j.dump(2);
}

PriorTable PriorTable::from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  PriorTable t;
  for (auto& [key, rows] : j.items()) {
    ModelId m = model_from_name(key);
    std::vector<ParamBound> b;
    for (auto& row : rows) {
      ParamBound pb;
      pb.name = row.at("name").get<std::string>();
      pb.lower = row.at("lower").get<double>();
      pb.upper = row.at("upper").get<double>();
      pb.scale = row.value("scale", 1.0);
      if (pb.upper < pb.lower)
        throw std::invalid_argument("prior bound inverted for " + pb.name);
      b.push_back(std::move(pb));
    }
    if (b.size() != param_names(m).size())
      throw std::invalid_argument("wrong parameter count for " +
                                  std::string(model_name(m)));
    t.tables_[static_cast<int>(m)] = std::move(b);
  }
  return t;
}

PriorTable PriorTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open prior file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

Params prior_midpoint(const PriorTable& priors, ModelId m) {
  const auto& b = priors.bounds(m);
  Params p;
  p.model = m;
  p.values.resize(static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < b.size(); ++i)
    p.values[static_cast<Eigen::Index>(i)] =
        0.5 * (b[i].lower + b[i].upper) * b[i].scale;
  return p;
}

void PriorTable::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write prior file: " + path);
  out << to_json() << '\n';
}

}  // namespace cfabc
