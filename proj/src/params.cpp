#include "cfabc/params.hpp"

namespace cfabc {

std::string_view model_name(ModelId m) {
  switch (m) {
    case ModelId::OVM: return "OVM";
    case ModelId::GFM: return "GFM";
    case ModelId::FVDM: return "FVDM";
    case ModelId::IDM: return "IDM";
    case ModelId::LLCTG: return "LLCTG";
    case ModelId::LLCS: return "LLCS";
    case ModelId::HL: return "HL";
    case ModelId::MPC: return "MPC";
  }
  throw std::invalid_argument("bad ModelId");
}

ModelId model_from_name(std::string_view name) {
  for (ModelId m : kAllModels)
    if (model_name(m) == name) return m;
  throw std::invalid_argument("unknown model name: " + std::string(name));
}

bool is_hdv(ModelId m) {
  return m == ModelId::OVM || m == ModelId::GFM || m == ModelId::FVDM ||
         m == ModelId::IDM;
}

const std::vector<std::string>& param_names(ModelId m) {
  static const std::array<std::vector<std::string>, 8> names = {{
      {"kappa", "v1", "v2", "c1", "c2"},
      {"K", "lambda", "v1", "v2", "c1", "c2"},
      {"tau", "lambda", "V1", "V2", "l_int", "beta"},
      {"v_max", "T", "s0", "a", "b", "delta"},
      {"tau_star", "k_s", "k_v", "l"},
      {"s0", "k_s", "k_v"},
      {"tau_star", "TT", "k_s", "k_v", "k_a", "l"},
      {"tau_star", "R", "alpha", "l", "a_min", "a_max"},
  }};
  return names[static_cast<int>(m)];
}

}  // namespace cfabc
