#include "critgyro/curves.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "critgyro/error.hpp"

namespace critgyro {

using nlohmann::json;

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 2) throw ParameterError("linspace: need at least two points");
  std::vector<double> out(static_cast<std::size_t>(n));
  const double step = (hi - lo) / (n - 1);
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + step * i;
  out.back() = hi;
  return out;
}

void validate(const GridSpec& grid) {
  if (grid.coarse_points < 2 || grid.fine_points < 2) throw ParameterError("GridSpec: need at least two points");
  if (!(grid.omega_lo < grid.omega_hi)) throw ParameterError("GridSpec: omega_lo must be below omega_hi");
  if (!(grid.window_factor > 0.0) || !(grid.min_half_window > 0.0)) {
    throw ParameterError("GridSpec: window sizes must be positive");
  }
}

ResonanceCurve compute_curve_on(const Model& model, double g, double anisotropy, std::span<const double> omegas,
                                const SolverOptions& solver) {
  if (omegas.size() < 2) throw ParameterError("compute_curve: grid needs at least two points");
  const auto sweep = ground_state_sweep(model, g, anisotropy, omegas, {2, solver});
  ResonanceCurve c;
  c.g = g;
  c.anisotropy = anisotropy;
  c.omega.assign(omegas.begin(), omegas.end());
  for (const auto& p : sweep) c.p0.push_back(p.p0);
  try {
    refresh_metadata(c);
  } catch (const RangeError&) {
    c.center = 0.0;
    c.width = 0.0;
  }
  return c;
}

ResonanceCurve compute_curve(const Model& model, double g, double anisotropy, const GridSpec& grid,
                             const SolverOptions& solver) {
  validate(grid);
  const auto coarse_grid = linspace(grid.omega_lo, grid.omega_hi, grid.coarse_points);
  auto coarse = compute_curve_on(model, g, anisotropy, coarse_grid, solver);
  const auto center = first_downward_crossing(coarse.omega, coarse.p0, 0.5);
  if (!center) return coarse;

  double width = coarse.omega[1] - coarse.omega[0];
  const auto hi = first_downward_crossing(coarse.omega, coarse.p0, 0.9);
  const auto lo = first_downward_crossing(coarse.omega, coarse.p0, 0.1);
  if (hi && lo) width = std::max(width, *lo - *hi);
  const double half = std::max(grid.window_factor * width, grid.min_half_window);
  const double a = std::max(grid.omega_lo, *center - half);
  const double b = std::min(grid.omega_hi, *center + half);
  return compute_curve_on(model, g, anisotropy, linspace(a, b, grid.fine_points), solver);
}

CurveCatalog::CurveCatalog(CatalogProvenance provenance, std::vector<ResonanceCurve> curves)
    : provenance_(std::move(provenance)), curves_(std::move(curves)) {
  for (const auto& c : curves_) {
    if (!(c.width > 0.0)) throw ParameterError("CurveCatalog: widths must be positive");
    if (c.omega.size() != c.p0.size() || c.omega.size() < 2) throw StructuralError("CurveCatalog: malformed curve");
  }
  std::stable_sort(curves_.begin(), curves_.end(),
                   [](const ResonanceCurve& a, const ResonanceCurve& b) { return a.width < b.width; });
  for (std::size_t i = 0; i < curves_.size(); ++i) {
    for (std::size_t j = i + 1; j < curves_.size(); ++j) {
      if (curves_[i].g == curves_[j].g && curves_[i].anisotropy == curves_[j].anisotropy) {
        throw ParameterError("CurveCatalog: duplicate (g, A)");
      }
    }
  }
}

const ResonanceCurve* CurveCatalog::find(double g, double anisotropy) const {
  for (const auto& c : curves_) {
    if (std::abs(c.g - g) < 1e-12 && std::abs(c.anisotropy - anisotropy) < 1e-12) return &c;
  }
  return nullptr;
}

std::string version_string() {
#ifdef CRITGYRO_VERSION
  return CRITGYRO_VERSION;
#else
  return "unknown";
#endif
}

CatalogProvenance make_provenance(const Model& model, const GridSpec& grid, const SolverOptions& solver) {
  CatalogProvenance p;
  p.version = version_string();
  p.n_particles = model.n_particles();
  p.grid = grid;
  p.solver_tol = solver.tol;
  p.dense_threshold = solver.dense_threshold;
  p.solver_seed = solver.seed;
  return p;
}

CurveCatalog catalog_build(const Model& model, std::span<const std::pair<double, double>> pairs,
                           const GridSpec& grid, const SolverOptions& solver) {
  if (pairs.empty()) throw ParameterError("catalog_build: no (g, A) pairs");
  std::vector<ResonanceCurve> curves;
  for (const auto& [g, a] : pairs) {
    auto c = compute_curve(model, g, a, grid, solver);
    refresh_metadata(c);
    curves.push_back(std::move(c));
  }
  return CurveCatalog(make_provenance(model, grid, solver), std::move(curves));
}

namespace {

json grid_json(const GridSpec& g) {
  return {{"coarse_points", g.coarse_points}, {"fine_points", g.fine_points},
          {"omega_lo", g.omega_lo},           {"omega_hi", g.omega_hi},
          {"window_factor", g.window_factor}, {"min_half_window", g.min_half_window}};
}

GridSpec grid_from(const json& j) {
  GridSpec g;
  g.coarse_points = j.at("coarse_points").get<int>();
  g.fine_points = j.at("fine_points").get<int>();
  g.omega_lo = j.at("omega_lo").get<double>();
  g.omega_hi = j.at("omega_hi").get<double>();
  g.window_factor = j.at("window_factor").get<double>();
  g.min_half_window = j.at("min_half_window").get<double>();
  return g;
}

}  // namespace

std::string catalog_to_json(const CurveCatalog& catalog) {
  const auto& p = catalog.provenance();
  json curves = json::array();
  for (const auto& c : catalog.curves()) {
    curves.push_back({{"g", c.g},
                      {"A", c.anisotropy},
                      {"omega", c.omega},
                      {"p0", c.p0},
                      {"center", c.center},
                      {"width", c.width}});
  }
  json doc = {{"format", kCatalogFormat},
              {"version", p.version},
              {"n_particles", p.n_particles},
              {"grid", grid_json(p.grid)},
              {"solver", {{"tol", p.solver_tol}, {"dense_threshold", p.dense_threshold}, {"seed", p.solver_seed}}},
              {"curves", curves}};
  return doc.dump(1);
}

void catalog_save(const CurveCatalog& catalog, const std::filesystem::path& path) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("catalog_save: cannot open " + tmp.string());
    out << catalog_to_json(catalog) << '\n';
    if (!out) throw Error("catalog_save: write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

CurveCatalog catalog_from_json(const std::string& text, const CatalogProvenance* expected) {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) throw StaleCatalogError("catalog is empty");
  CatalogProvenance p;
  std::vector<ResonanceCurve> curves;
  try {
    const json doc = json::parse(text);
    if (doc.at("format").get<int>() != kCatalogFormat) throw StaleCatalogError("catalog format revision differs");
    p.version = doc.at("version").get<std::string>();
    p.n_particles = doc.at("n_particles").get<int>();
    p.grid = grid_from(doc.at("grid"));
    const auto& s = doc.at("solver");
    p.solver_tol = s.at("tol").get<double>();
    p.dense_threshold = s.at("dense_threshold").get<std::size_t>();
    p.solver_seed = s.at("seed").get<std::uint64_t>();
    for (const auto& jc : doc.at("curves")) {
      ResonanceCurve c;
      c.g = jc.at("g").get<double>();
      c.anisotropy = jc.at("A").get<double>();
      c.omega = jc.at("omega").get<std::vector<double>>();
      c.p0 = jc.at("p0").get<std::vector<double>>();
      c.center = jc.at("center").get<double>();
      c.width = jc.at("width").get<double>();
      curves.push_back(std::move(c));
    }
  } catch (const json::exception& e) {
    throw StaleCatalogError(std::string("catalog is malformed: ") + e.what());
  }
  if (expected != nullptr && !(*expected == p)) {
    throw StaleCatalogError("catalog was built with a different version, grid or solver setting");
  }
  for (const auto& c : curves) {
    for (std::size_t i = 1; i < c.omega.size(); ++i) {
      if (!(c.omega[i] > c.omega[i - 1])) throw StaleCatalogError("catalog curve grid is not ascending");
    }
  }
  try {
    return CurveCatalog(std::move(p), std::move(curves));
  } catch (const Error& e) {
    throw StaleCatalogError(std::string("catalog is inconsistent: ") + e.what());
  }
}

CurveCatalog catalog_load(const std::filesystem::path& path, const CatalogProvenance* expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StaleCatalogError("cannot open catalog " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return catalog_from_json(buf.str(), expected);
}

const ResonanceCurve& lookup_by_width(const CurveCatalog& catalog, double target_width) {
  if (catalog.empty()) throw ParameterError("lookup_by_width: empty catalog");
  const auto& curves = catalog.curves();
  std::size_t best = 0;
  for (std::size_t i = 1; i < curves.size(); ++i) {
    const double d = std::abs(curves[i].width - target_width);
    const double db = std::abs(curves[best].width - target_width);
    if (d < db || (d == db && curves[i].width < curves[best].width)) best = i;
  }
  return curves[best];
}

void write_curve_csv(std::ostream& out, const ResonanceCurve& curve) {
  const auto prec = out.precision(17);
  out << "omega,p0\n";
  for (std::size_t i = 0; i < curve.omega.size(); ++i) out << curve.omega[i] << ',' << curve.p0[i] << '\n';
  out.precision(prec);
}

}  // namespace critgyro
