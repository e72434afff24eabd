#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "critgyro/model.hpp"
#include "critgyro/observables.hpp"

namespace critgyro {

/// How compute_curve places its Omega samples.
///
/// A coarse scan over [omega_lo, omega_hi] locates the P = 0.5 crossing; the
/// returned curve is a fine uniform grid over center +- half_window, where
/// half_window = max(window_factor * coarse width, min_half_window), clipped
/// to [omega_lo, omega_hi]. Without a coarse crossing the coarse scan is returned.
struct GridSpec {
  int coarse_points = 61;
  int fine_points = 601;
  double omega_lo = 0.0;
  double omega_hi = 0.99;
  double window_factor = 1.5;
  double min_half_window = 0.04;

  bool operator==(const GridSpec&) const = default;
};

/// n >= 2 evenly spaced points with exact endpoints.
std::vector<double> linspace(double lo, double hi, int n);

void validate(const GridSpec& grid);

/// Resonance curve sampled on an explicit ascending grid.
ResonanceCurve compute_curve_on(const Model& model, double g, double anisotropy, std::span<const double> omegas,
                                const SolverOptions& solver = {});

/// Coarse scan plus refinement around the transition, as described by GridSpec.
ResonanceCurve compute_curve(const Model& model, double g, double anisotropy, const GridSpec& grid = {},
                             const SolverOptions& solver = {});

struct CatalogProvenance {
  std::string version;
  int n_particles = 6;
  GridSpec grid;
  double solver_tol = 1e-10;
  std::size_t dense_threshold = 2000;
  std::uint64_t solver_seed = 0;

  bool operator==(const CatalogProvenance&) const = default;
};

/// Curves sorted by ascending width, unique in (g, A).
class CurveCatalog {
 public:
  CurveCatalog() = default;
  CurveCatalog(CatalogProvenance provenance, std::vector<ResonanceCurve> curves);

  const CatalogProvenance& provenance() const noexcept { return provenance_; }
  const std::vector<ResonanceCurve>& curves() const noexcept { return curves_; }
  std::size_t size() const noexcept { return curves_.size(); }
  bool empty() const noexcept { return curves_.empty(); }

  const ResonanceCurve* find(double g, double anisotropy) const;

  bool operator==(const CurveCatalog&) const = default;

 private:
  CatalogProvenance provenance_;
  std::vector<ResonanceCurve> curves_;
};

/// Library version tag stored in catalogs.
std::string version_string();

CatalogProvenance make_provenance(const Model& model, const GridSpec& grid, const SolverOptions& solver);

CurveCatalog catalog_build(const Model& model, std::span<const std::pair<double, double>> pairs,
                           const GridSpec& grid = {}, const SolverOptions& solver = {});

/// Catalog format revision; bumped whenever the JSON layout changes.
constexpr int kCatalogFormat = 1;

void catalog_save(const CurveCatalog& catalog, const std::filesystem::path& path);
std::string catalog_to_json(const CurveCatalog& catalog);

/// Throws StaleCatalogError on unreadable or malformed files, and when
/// `expected` is given and differs from the stored provenance.
CurveCatalog catalog_load(const std::filesystem::path& path, const CatalogProvenance* expected = nullptr);
CurveCatalog catalog_from_json(const std::string& text, const CatalogProvenance* expected = nullptr);

/// Curve minimizing |W - target|; ties go to the narrower curve.
const ResonanceCurve& lookup_by_width(const CurveCatalog& catalog, double target_width);

/// Columns omega,p0.
void write_curve_csv(std::ostream& out, const ResonanceCurve& curve);

}  // namespace critgyro
