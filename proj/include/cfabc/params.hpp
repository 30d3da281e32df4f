#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cfabc {

/// Candidate car-following models and controllers.
enum class ModelId : std::uint8_t { OVM, GFM, FVDM, IDM, LLCTG, LLCS, HL, MPC };

inline constexpr std::array<ModelId, 8> kAllModels = {
    ModelId::OVM,  ModelId::GFM,  ModelId::FVDM, ModelId::IDM,
    ModelId::LLCTG, ModelId::LLCS, ModelId::HL,   ModelId::MPC};

std::string_view model_name(ModelId m);
ModelId model_from_name(std::string_view name);
bool is_hdv(ModelId m);

/// A sampled parameter vector for one model. Values are stored in formula
/// units in a fixed per-model order (see param_names).
struct Params {
  ModelId model = ModelId::OVM;
  Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 6, 1> values;

  double operator[](int i) const { return values[i]; }
};

/// Parameter order per model, matching the prior table rows.
const std::vector<std::string>& param_names(ModelId m);

// Named indices into Params::values.
namespace ovm { enum : int { kKappa, kV1, kV2, kC1, kC2 }; }
namespace gfm { enum : int { kGain, kLambda, kV1, kV2, kC1, kC2 }; }
namespace fvdm { enum : int { kTau, kLambda, kV1, kV2, kLint, kBeta }; }
namespace idm { enum : int { kVmax, kT, kS0, kA, kB, kDelta }; }
namespace llctg { enum : int { kTauStar, kKs, kKv, kL }; }
namespace llcs { enum : int { kS0, kKs, kKv }; }
namespace hl { enum : int { kTauStar, kTT, kKs, kKv, kKa, kL }; }
namespace mpc { enum : int { kTauStar, kR, kAlpha, kL, kAmin, kAmax }; }

}  // namespace cfabc
