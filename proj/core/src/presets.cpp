#include "critgyro/presets.hpp"

#include "critgyro/error.hpp"

namespace critgyro {

std::vector<std::pair<double, double>> default_catalog_pairs() {
  return {{0.5, 0.04},  {0.6, 0.025}, {0.5, 0.03},  {0.5, 0.02},
          {0.5, 0.015}, {0.5, 0.01},  {0.6, 0.0075}, {0.5, 0.005}};
}

std::vector<PresetVariant> preset(std::string_view name) {
  ProtocolConfig base;
  if (name == "fig3") {
    base.snapshots = {1, 10, 100};
    return {{"untuned", base}};
  }
  if (name == "fig4") {
    ProtocolConfig one = base, two = base;
    one.retune_at = {12};
    two.retune_at = {12, 32};
    return {{"untuned", base}, {"one-tune", one}, {"two-tunes", two}};
  }
  if (name == "array") {
    base.measurements = 400;
    base.batch_size = 200;
    base.retune_at = {200};
    return {{"array", base}};
  }
  throw ParameterError("unknown preset '" + std::string(name) + "' (expected fig3, fig4 or array)");
}

}  // namespace critgyro
