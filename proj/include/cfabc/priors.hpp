#pragma once

#include <string>
#include <vector>

#include "cfabc/params.hpp"
#include "cfabc/rng.hpp"

namespace cfabc {

/// One uniform prior interval. `scale` converts the tabulated bound into the
/// formula unit (draw uniform in [lower, upper], multiply by scale); it is 1
/// everywhere except FVDM's relaxation time, whose published 600-2000 range
/// only makes physical sense read as milliseconds (scale 0.001).
struct ParamBound {
  std::string name;
  double lower = 0.0;
  double upper = 0.0;
  double scale = 1.0;
};

/// Uniform prior bounds for every model, keyed by ModelId.
class PriorTable {
 public:
  PriorTable();  // ships the default published bounds

  const std::vector<ParamBound>& bounds(ModelId m) const;
  std::vector<ParamBound>& bounds(ModelId m);

  /// Independent uniform draw of every parameter of model m.
  Params sample(ModelId m, Rng& rng) const;

  /// True iff every value of p lies within [lower*scale, upper*scale].
  bool contains(const Params& p) const;

  /// JSON round-trip: {"OVM":[{"name":...,"lower":...,"upper":...,
  /// "scale":...},...],...}. Scale defaults to 1 when omitted.
  static PriorTable load(const std::string& path);
  void save(const std::string& path) const;
  std::string to_json() const;
  static PriorTable from_json(const std::string& text);

 private:
  std::array<std::vector<ParamBound>, 8> tables_;
};

/// Midpoint of every prior interval (in formula units).
Params prior_midpoint(const PriorTable& priors, ModelId m);

}  // namespace cfabc
