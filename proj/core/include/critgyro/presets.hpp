#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "critgyro/estimate.hpp"

namespace critgyro {

/// (g, A) pairs of the standard catalog: the two operating points plus
/// narrower curves for later tuning stages.
std::vector<std::pair<double, double>> default_catalog_pairs();

struct PresetVariant {
  std::string label;
  ProtocolConfig config;
};

/// Named protocol setups: "fig3", "fig4" (three tuning schedules) and "array".
/// Throws ParameterError for an unknown name.
std::vector<PresetVariant> preset(std::string_view name);

/// Ensemble-median sigma expected from the array preset, with its tolerance factor.
inline constexpr double kArraySigmaTarget = 1.8e-4;
inline constexpr double kArraySigmaFactor = 2.0;

}  // namespace critgyro
