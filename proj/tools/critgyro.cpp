// critgyro: curves, catalogs, estimation runs and offset studies from the command line.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "critgyro/curves.hpp"
#include "critgyro/error.hpp"
#include "critgyro/estimate.hpp"
#include "critgyro/output.hpp"
#include "critgyro/presets.hpp"
#include "critgyro/spectrum.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace critgyro;

namespace {

enum Exit : int { kOk = 0, kUsage = 2, kNumerical = 3, kPresetMismatch = 4 };

class Run {
 public:
  Run(std::string command, fs::path manifest) : manifest_(std::move(manifest)) {
    m_.command = std::move(command);
    m_.version = version_string();
  }

  void write(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    atomic_write(path, content);
    m_.outputs.push_back(path.string());
  }

  void record(const fs::path& path) { m_.outputs.push_back(path.string()); }

  void set_config(const json& j) { m_.config = j.dump(); }
  void set_seed(std::uint64_t s) { m_.seed = s; }

  void finish() {
    m_.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    if (manifest_.has_parent_path()) fs::create_directories(manifest_.parent_path());
    atomic_write(manifest_, to_json(m_));
  }

 private:
  RunManifest m_;
  fs::path manifest_;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

fs::path manifest_for(const fs::path& out, const std::string& override_path) {
  if (!override_path.empty()) return override_path;
  return fs::path(out.string() + ".manifest.json");
}

fs::path with_extension(fs::path p, const char* ext) { return p.replace_extension(ext); }

json grid_to_json(const GridSpec& g) {
  return {{"coarse_points", g.coarse_points}, {"fine_points", g.fine_points}, {"omega_lo", g.omega_lo},
          {"omega_hi", g.omega_hi}};
}

// Loads the catalog, rebuilding it when absent or built with other settings.
CurveCatalog obtain_catalog(const fs::path& path, int n_particles, bool rebuild) {
  const Model model(n_particles);
  const GridSpec grid;
  const SolverOptions solver;
  const auto expected = make_provenance(model, grid, solver);
  if (!rebuild) {
    try {
      return catalog_load(path, &expected);
    } catch (const StaleCatalogError& e) {
      std::cerr << "catalog " << path.string() << ": " << e.what() << "; rebuilding\n";
    }
  }
  const auto pairs = default_catalog_pairs();
  std::cerr << "building catalog of " << pairs.size() << " curves at N=" << n_particles << "\n";
  auto cat = catalog_build(model, pairs, grid, solver);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  catalog_save(cat, path);
  return cat;
}

std::string csv_of_curves(const std::vector<ResonanceCurve>& curves) {
  std::ostringstream s;
  if (curves.size() == 1) {
    write_curve_csv(s, curves.front());
    return s.str();
  }
  s.precision(17);
  s << "g,A,omega,p0\n";
  for (const auto& c : curves)
    for (std::size_t i = 0; i < c.omega.size(); ++i) s << c.g << ',' << c.anisotropy << ',' << c.omega[i] << ',' << c.p0[i] << '\n';
  return s.str();
}

std::string label_of(double g, double a) {
  std::ostringstream s;
  s << "g=" << g << " A=" << a;
  return s.str();
}

// ---------------------------------------------------------------- curve

struct CurveArgs {
  std::vector<double> g, a;
  int n = 6;
  std::string out = "curve.csv";
  std::string catalog;
  std::string manifest;
  GridSpec grid;
};

int cmd_curve(const CurveArgs& args) {
  if (args.g.size() != args.a.size()) throw ParameterError("--g and --A need the same number of values");
  Run run("curve", manifest_for(args.out, args.manifest));
  std::vector<ResonanceCurve> curves;
  std::optional<CurveCatalog> cat;
  if (!args.catalog.empty()) cat = catalog_load(args.catalog);
  const Model model(args.n);
  for (std::size_t i = 0; i < args.g.size(); ++i) {
    if (cat) {
      const auto* c = cat->find(args.g[i], args.a[i]);
      if (c == nullptr) throw ParameterError("catalog has no curve for " + label_of(args.g[i], args.a[i]));
      curves.push_back(*c);
    } else {
      curves.push_back(compute_curve(model, args.g[i], args.a[i], args.grid));
    }
    const auto& c = curves.back();
    std::printf("%-18s points=%zu center=%.9f width=%.9f\n", label_of(c.g, c.anisotropy).c_str(), c.omega.size(),
                c.center, c.width);
  }
  std::vector<Series> series;
  for (const auto& c : curves) series.push_back({label_of(c.g, c.anisotropy), c.omega, c.p0});
  run.set_config({{"g", args.g}, {"A", args.a}, {"n_particles", args.n}, {"grid", grid_to_json(args.grid)},
                  {"catalog", args.catalog}});
  run.write(args.out, csv_of_curves(curves));
  run.write(with_extension(args.out, ".svg"),
            svg_line_chart(series, {"P(0 | Omega)", "Omega / omega_perp", "P(0)", false, false, 640, 420}));
  run.finish();
  return kOk;
}

// ---------------------------------------------------------------- catalog

struct CatalogArgs {
  std::string out = "catalog.json";
  int n = 6;
  std::string manifest;
};

int cmd_catalog(const CatalogArgs& args) {
  Run run("catalog", manifest_for(args.out, args.manifest));
  const auto cat = obtain_catalog(args.out, args.n, true);
  for (const auto& c : cat.curves())
    std::printf("%-18s center=%.9f width=%.9f\n", label_of(c.g, c.anisotropy).c_str(), c.center, c.width);
  json pairs = json::array();
  for (const auto& [g, a] : default_catalog_pairs()) pairs.push_back({g, a});
  run.set_config({{"n_particles", args.n}, {"pairs", pairs}, {"grid", grid_to_json(GridSpec{})}});
  run.record(args.out);
  run.finish();
  return kOk;
}

// ---------------------------------------------------------------- estimate

struct EstimateArgs {
  std::string config;
  std::string preset_name;
  std::string catalog = "catalog.json";
  std::string out_dir = "estimate";
  std::string manifest;
  int n = 6;
  int trajectories = 1;
  std::uint64_t master_seed = 1;
};

std::string posterior_csv(const Posterior& p) {
  std::ostringstream s;
  write_posterior_csv(s, p);
  return s.str();
}

int cmd_estimate(const EstimateArgs& args) {
  std::vector<PresetVariant> variants;
  if (!args.config.empty()) {
    std::ifstream in(args.config);
    if (!in) throw ParameterError("cannot read config " + args.config);
    std::ostringstream text;
    text << in.rdbuf();
    variants.push_back({fs::path(args.config).stem().string(), protocol_from_json(text.str())});
  } else {
    variants = preset(args.preset_name);
  }
  std::uint64_t master = args.master_seed;
  for (auto& v : variants) {
    if (apply_seed_override(v.config)) master = v.config.seed;
  }

  const fs::path dir = args.out_dir;
  Run run("estimate", args.manifest.empty() ? dir / "manifest.json" : fs::path(args.manifest));
  run.set_seed(args.trajectories > 1 ? master : variants.front().config.seed);
  const auto cat = obtain_catalog(args.catalog, args.n, false);

  json cfg = {{"preset", args.preset_name}, {"config_file", args.config}, {"catalog", args.catalog},
              {"trajectories", args.trajectories}, {"master_seed", master}, {"variants", json::array()}};
  std::vector<Series> series;
  std::vector<double> final_sigma;
  for (const auto& v : variants) {
    cfg["variants"].push_back({{"label", v.label}, {"config", json::parse(to_json(v.config))}});
    const auto single = run_protocol(v.config, cat);
    std::ostringstream traj;
    write_trajectory_csv(traj, single.trajectory);
    run.write(dir / ("trajectory_" + v.label + ".csv"), traj.str());
    std::vector<Series> posts;
    for (const auto& [mu, post] : single.snapshots) {
      run.write(dir / ("posterior_" + v.label + "_mu" + std::to_string(mu) + ".csv"), posterior_csv(post));
      posts.push_back({"mu=" + std::to_string(mu), post.grid(), {post.mass().begin(), post.mass().end()}});
    }
    if (!posts.empty()) {
      run.write(dir / ("posterior_" + v.label + ".svg"),
                svg_line_chart(posts, {"Posterior", "Omega / omega_perp", "probability", false, false, 640, 420}));
    }

    std::vector<double> sigma;
    if (args.trajectories > 1) {
      const auto ens = run_ensemble(v.config, cat, args.trajectories, master);
      if (ens.sigma.empty()) throw DegenerateUpdateError("every trajectory of " + v.label + " degenerated");
      if (ens.failures > 0) std::cerr << v.label << ": " << ens.failures << " degenerate trajectories dropped\n";
      sigma = median_sigma_series(ens);
    } else {
      for (const auto& r : single.trajectory) sigma.push_back(r.sigma);
    }
    Series s{v.label, {}, sigma};
    for (std::size_t i = 0; i < sigma.size(); ++i) s.x.push_back(static_cast<double>(i + 1));
    series.push_back(std::move(s));
    final_sigma.push_back(sigma.back());
    std::printf("%-10s final sigma = %.6g after %d measurements%s\n", v.label.c_str(), sigma.back(),
                v.config.measurements, args.trajectories > 1 ? " (ensemble median)" : "");
  }
  run.set_config(cfg);

  std::ostringstream csv;
  csv.precision(17);
  csv << "mu";
  for (const auto& s : series) csv << ',' << s.label;
  csv << '\n';
  std::size_t rows = 0;
  for (const auto& s : series) rows = std::max(rows, s.y.size());
  for (std::size_t i = 0; i < rows; ++i) {
    csv << i + 1;
    for (const auto& s : series) {
      csv << ',';
      if (i < s.y.size()) csv << s.y[i];
    }
    csv << '\n';
  }
  run.write(dir / "sigma.csv", csv.str());
  run.write(dir / "sigma.svg", svg_line_chart(series, {"Posterior sigma", "measurements", "sigma / omega_perp",
                                                       true, true, 640, 420}));
  run.finish();

  int status = kOk;
  if (args.preset_name == "array") {
    const double ratio = final_sigma.front() / kArraySigmaTarget;
    std::printf("array: sigma / %.2g = %.3f (accepted within a factor %.0f)\n", kArraySigmaTarget, ratio,
                kArraySigmaFactor);
    if (ratio > kArraySigmaFactor || ratio < 1.0 / kArraySigmaFactor) status = kPresetMismatch;
  } else if (args.preset_name == "fig4") {
    const auto& s = series;
    const double u = s[0].y[99], one = s[1].y[99], two = s[2].y[99];
    std::printf("fig4: sigma(100) untuned %.4g, one tune %.4g, two tunes %.4g; improvement %.2fx\n", u, one, two,
                u / two);
    if (!(two < one && one < u)) status = kPresetMismatch;
  }
  return status;
}

// ---------------------------------------------------------------- offset

struct OffsetArgs {
  double g = 0.5;
  double a = 0.04;
  int n = 6;
  double omega_perp_hz = 200.0;
  double eps = 0.1;
  double lo = -0.1;
  double hi = 0.0;
  int points = 11;
  int trajectories = 50;
  int measurements = 100;
  std::uint64_t master_seed = 1;
  int profile_points = 199;
  std::string out = "offset.csv";
  std::string manifest;
};

int cmd_offset(const OffsetArgs& args) {
  if (!(args.omega_perp_hz > 0.0)) throw ParameterError("--omega-perp-hz must be positive");
  Run run("offset", manifest_for(args.out, args.manifest));
  run.set_seed(args.master_seed);
  const Model model(args.n);
  const auto curve = compute_curve(model, args.g, args.a);
  if (!(curve.width > 0.0)) throw RangeError("P(0|Omega) never crosses 0.5 for " + label_of(args.g, args.a));
  const CurveCatalog cat({}, {curve});
  const auto profile = gap_profile(model, args.g, args.a, linspace(0.0, GridSpec{}.omega_hi, args.profile_points));

  ProtocolConfig cfg;
  cfg.initial_g = args.g;
  cfg.initial_A = args.a;
  cfg.measurements = args.measurements;
  apply_seed_override(cfg);

  const double to_seconds = 1.0 / (2.0 * std::numbers::pi * args.omega_perp_hz);
  std::ostringstream csv;
  csv.precision(17);
  csv << "offset,hwhm,hwhm_hz,time_trap_units,time_seconds\n";
  Series hw{"HWHM", {}, {}}, tm{"time (s)", {}, {}};
  for (double off : linspace(args.lo, args.hi, args.points)) {
    const double h = hwhm_proxy(cfg, cat, off, args.trajectories, args.master_seed);
    const double t = adiabatic_time(profile, curve.center, off, args.eps);
    csv << off << ',' << h << ',' << h * args.omega_perp_hz << ',' << t << ',' << t * to_seconds << '\n';
    hw.x.push_back(off);
    hw.y.push_back(h);
    tm.x.push_back(off);
    tm.y.push_back(t * to_seconds);
    std::printf("offset %+.4f  hwhm %.4g  time %.4g s\n", off, h, t * to_seconds);
  }
  run.set_config({{"g", args.g}, {"A", args.a}, {"n_particles", args.n}, {"omega_perp_hz", args.omega_perp_hz},
                  {"eps", args.eps}, {"offsets", {args.lo, args.hi, args.points}}, {"trajectories", args.trajectories},
                  {"measurements", args.measurements}, {"master_seed", args.master_seed},
                  {"omega_c", curve.center}});
  run.write(args.out, csv.str());
  const auto stem = fs::path(args.out).replace_extension("").string();
  run.write(stem + "_hwhm.svg", svg_line_chart({hw}, {"Final HWHM", "Omega - Omega_c", "HWHM / omega_perp"}));
  run.write(stem + "_time.svg", svg_line_chart({tm}, {"Adiabatic ramp time", "Omega - Omega_c", "seconds", false, true}));
  run.finish();
  return kOk;
}

// ---------------------------------------------------------------- basis

struct BasisArgs {
  int n = 6;
  int n_ll = 2;
  int l_max = -1;
  double g = 0.5;
  double a = 0.04;
  double omega = 0.0;
  std::string dump_basis, dump_elements, dump_matrix;
  std::string manifest = "basis.manifest.json";
};

int cmd_basis(const BasisArgs& args) {
  Run run("basis", args.manifest);
  const Model model(args.n, args.n_ll, args.l_max < 0 ? args.n + 2 : args.l_max);
  std::printf("modes %zu  dimension %zu\n", model.basis().modes().size(), model.basis().size());
  if (!args.dump_basis.empty()) {
    std::ostringstream s;
    write_basis_csv(s, model.basis());
    run.write(args.dump_basis, s.str());
  }
  if (!args.dump_elements.empty()) {
    std::ostringstream s;
    write_elements_csv(s, model.cache());
    run.write(args.dump_elements, s.str());
  }
  if (!args.dump_matrix.empty()) {
    std::ostringstream s;
    write_matrix_coo(s, model.assemble(args.g, args.a, args.omega));
    run.write(args.dump_matrix, s.str());
  }
  run.set_config({{"n_particles", args.n}, {"n_ll", args.n_ll}, {"l_max", args.l_max}, {"g", args.g}, {"A", args.a},
                  {"omega", args.omega}});
  run.finish();
  return kOk;
}

// ---------------------------------------------------------------- selftest

int cmd_selftest() {
  int failed = 0;
  auto check = [&](const char* what, bool ok) {
    std::printf("%s %s\n", ok ? "ok  " : "FAIL", what);
    failed += ok ? 0 : 1;
  };
  {
    const Model m(1);
    const auto r = lowest_k(m.assemble(0.5, 0.0, 0.3), 3);
    check("single particle spectrum", std::abs(r.energies[0] - 1.0) < 1e-10 && std::abs(r.energies[1] - 1.7) < 1e-10);
  }
  {
    const Model m(4);
    const auto h = m.assemble(0.5, 0.04, 0.8);
    SolverOptions dense, sparse;
    sparse.dense_threshold = 0;
    const auto a = lowest_k(h, 2, dense);
    const auto b = lowest_k(h, 2, sparse);
    check("Lanczos agrees with dense", std::abs(a.energies[0] - b.energies[0]) < 1e-9);
    const auto rho = spdm(a.vectors[0], m.basis());
    check("SPDM trace equals N", std::abs(rho.trace() - 4.0) < 1e-10);
  }
  {
    ResonanceCurve c;
    c.omega = {0.0, 1.0};
    c.p0 = {0.8, 0.2};
    const auto p = bayes_update(init_prior(0.0, 1.0, 101), c, 0.0, Outcome::zero);
    double s = 0.0;
    for (double v : p.mass()) s += v;
    check("posterior normalized", std::abs(s - 1.0) < 1e-12);
  }
  return failed == 0 ? kOk : kNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"critgyro: rotation sensing at a critical point, exact diagonalization and Bayesian estimation"};
  app.require_subcommand(1);

  CurveArgs curve;
  auto* c = app.add_subcommand("curve", "P(0|Omega) curve for one or more (g, A) pairs");
  c->add_option("--g", curve.g, "interaction strength(s)")->required();
  c->add_option("--A", curve.a, "anisotropy value(s)")->required();
  c->add_option("--n", curve.n, "particle number")->check(CLI::Range(1, 12));
  c->add_option("--out", curve.out, "CSV path; the SVG goes next to it");
  c->add_option("--catalog", curve.catalog, "take curves from this catalog instead of computing them");
  c->add_option("--coarse-points", curve.grid.coarse_points);
  c->add_option("--fine-points", curve.grid.fine_points);
  c->add_option("--manifest", curve.manifest);

  CatalogArgs catalog;
  auto* k = app.add_subcommand("catalog", "build and save the standard curve catalog");
  k->add_option("--out", catalog.out);
  k->add_option("--n", catalog.n)->check(CLI::Range(1, 12));
  k->add_option("--manifest", catalog.manifest);

  EstimateArgs est;
  auto* e = app.add_subcommand("estimate", "run the sequential Bayesian protocol");
  auto* cfg_opt = e->add_option("--config", est.config, "protocol config JSON")->check(CLI::ExistingFile);
  auto* preset_opt = e->add_option("--preset", est.preset_name, "fig3, fig4 or array")
                         ->check(CLI::IsMember({"fig3", "fig4", "array"}));
  cfg_opt->excludes(preset_opt);
  e->add_option("--catalog", est.catalog, "catalog JSON, built when missing or stale");
  e->add_option("--out-dir", est.out_dir);
  e->add_option("--trajectories", est.trajectories, "ensemble size; medians are reported when > 1")
      ->check(CLI::PositiveNumber);
  e->add_option("--master-seed", est.master_seed);
  e->add_option("--n", est.n)->check(CLI::Range(1, 12));
  e->add_option("--manifest", est.manifest);

  OffsetArgs off;
  auto* o = app.add_subcommand("offset", "precision and ramp time against the final rotation offset");
  o->add_option("--g", off.g);
  o->add_option("--A", off.a);
  o->add_option("--n", off.n)->check(CLI::Range(1, 12));
  o->add_option("--omega-perp-hz", off.omega_perp_hz, "trap frequency for the seconds column");
  o->add_option("--eps", off.eps, "adiabaticity constant");
  o->add_option("--from", off.lo);
  o->add_option("--to", off.hi);
  o->add_option("--points", off.points)->check(CLI::Range(2, 1000));
  o->add_option("--trajectories", off.trajectories)->check(CLI::PositiveNumber);
  o->add_option("--measurements", off.measurements)->check(CLI::PositiveNumber);
  o->add_option("--master-seed", off.master_seed);
  o->add_option("--profile-points", off.profile_points, "gap profile samples on [0, 0.99]")->check(CLI::Range(3, 5000));
  o->add_option("--out", off.out);
  o->add_option("--manifest", off.manifest);

  BasisArgs basis;
  auto* b = app.add_subcommand("basis", "basis size and debugging dumps");
  b->add_option("--n", basis.n)->check(CLI::Range(0, 12));
  b->add_option("--n-ll", basis.n_ll)->check(CLI::Range(1, 4));
  b->add_option("--l-max", basis.l_max);
  b->add_option("--g", basis.g);
  b->add_option("--A", basis.a);
  b->add_option("--omega", basis.omega);
  b->add_option("--dump-basis", basis.dump_basis, "CSV: index,L,occupations");
  b->add_option("--dump-elements", basis.dump_elements, "CSV of V and U elements");
  b->add_option("--dump-matrix", basis.dump_matrix, "coordinate text: row col value");
  b->add_option("--manifest", basis.manifest);

  auto* s = app.add_subcommand("selftest", "quick internal consistency checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex);
    return kUsage;
  }

  try {
    if (*c) return cmd_curve(curve);
    if (*k) return cmd_catalog(catalog);
    if (*e) {
      if (est.config.empty() && est.preset_name.empty()) {
        std::cerr << "estimate: one of --config or --preset is required\n";
        return kUsage;
      }
      return cmd_estimate(est);
    }
    if (*o) return cmd_offset(off);
    if (*b) return cmd_basis(basis);
    if (*s) return cmd_selftest();
  } catch (const ParameterError& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kUsage;
  } catch (const StaleCatalogError& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kUsage;
  } catch (const Error& ex) {
    std::cerr << "numerical failure: " << ex.what() << '\n';
    return kNumerical;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kNumerical;
  }
  return kUsage;
}
