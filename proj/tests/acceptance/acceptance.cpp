// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "critgyro/curves.hpp"
#include "critgyro/error.hpp"
#include "critgyro/estimate.hpp"
#include "critgyro/presets.hpp"
#include "critgyro/spectrum.hpp"
#include "oracle.hpp"

using namespace critgyro;

namespace {

// Regression constants from our own N = 6 computation.
constexpr double kOmegaC = 0.760550613560;
constexpr double kOmegaCTol = 1e-9;

constexpr double kMaxWidth = 0.06;
constexpr double kSigma100 = 0.0037;
constexpr double kSigma10k = 3.8e-4;
constexpr double kSlope = -0.5;
constexpr double kSlopeTol = 0.05;
constexpr double kTuningGain = 5.0;
constexpr double kTimeRatio = 10.0;
constexpr double kHwhmChange = 0.20;

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Context {
  std::filesystem::path catalog_path;
  int trajectories = 200;
  std::uint64_t master_seed = 2024;
  std::optional<CurveCatalog> catalog;
  std::optional<Model> model6;

  const Model& model() {
    if (!model6) model6.emplace(6);
    return *model6;
  }

  const CurveCatalog& cat() {
    if (catalog) return *catalog;
    const auto expected = make_provenance(model(), GridSpec{}, SolverOptions{});
    try {
      catalog = catalog_load(catalog_path, &expected);
      std::printf("  (catalog loaded from %s)\n", catalog_path.string().c_str());
    } catch (const StaleCatalogError& e) {
      std::printf("  (building catalog: %s)\n", e.what());
      catalog = catalog_build(model(), default_catalog_pairs(), GridSpec{}, SolverOptions{});
      catalog_save(*catalog, catalog_path);
    }
    return *catalog;
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

oracle::ModeNM nm(Mode m) { return {m.n, m.m}; }

double rel_err(double got, double want) {
  if (want == 0.0) return std::abs(got);
  return std::abs(got - want) / std::abs(want);
}

// ------------------------------------------------------------------ AC1

// Relative error is taken literally: an integral that is exactly zero must come out as exactly zero.
// Zeros are tallied separately so the report shows where any shortfall comes from.
struct IntegralTally {
  double worst_nonzero = 0.0;
  double worst_zero_abs = 0.0;
  std::size_t count = 0;
  std::size_t zeros = 0;
  std::size_t zeros_missed = 0;

  void add(double got, double want) {
    ++count;
    if (want == 0.0) {
      ++zeros;
      if (got != 0.0) ++zeros_missed;
      worst_zero_abs = std::max(worst_zero_abs, std::abs(got));
    } else {
      worst_nonzero = std::max(worst_nonzero, rel_err(got, want));
    }
  }
  bool ok(double tol) const { return worst_nonzero <= tol && zeros_missed == 0; }
};

Verdict ac1(Context&) {
  const auto modes = enumerate_modes(2, 8);
  IntegralTally i1, i2;
  double worst_q = 0.0;
  for (std::size_t a = 0; a < modes.size(); ++a)
    for (std::size_t b = a; b < modes.size(); ++b) {
      if ((std::abs(modes[a].m) + std::abs(modes[b].m)) % 2 != 0) continue;
      i1.add(I1(modes[a], modes[b]), oracle::integral_I1(nm(modes[a]), nm(modes[b])));
    }
  for (std::size_t a = 0; a < modes.size(); ++a)
    for (std::size_t b = a; b < modes.size(); ++b)
      for (std::size_t c = b; c < modes.size(); ++c)
        for (std::size_t d = c; d < modes.size(); ++d) {
          const int s = std::abs(modes[a].m) + std::abs(modes[b].m) + std::abs(modes[c].m) + std::abs(modes[d].m);
          if (s % 2 != 0) continue;
          i2.add(I2(modes[a], modes[b], modes[c], modes[d]),
                 oracle::integral_I2(nm(modes[a]), nm(modes[b]), nm(modes[c]), nm(modes[d])));
        }
  for (int q = 1; q <= 40; ++q) {
    const auto r = gauss_laguerre(q);
    double fact = 1.0;
    for (int k = 0; k <= r.max_exact_degree(); ++k) {
      if (k > 0) fact *= k;
      worst_q = std::max(worst_q, rel_err(r.integrate([k](double x) { return std::pow(x, k); }), fact));
    }
  }
  const bool ok = i1.ok(1e-9) && i2.ok(1e-9) && worst_q <= 1e-10;
  return {ok, fmt("I1: %zu integrals, worst rel %.2e, %zu/%zu exact zeros missed (max |value| %.2e); "
                  "I2: %zu integrals, worst rel %.2e, %zu/%zu exact zeros missed (max |value| %.2e); tol 1e-9; "
                  "quadrature Q=1..40 worst %.2e (tol 1e-10)",
                  i1.count, i1.worst_nonzero, i1.zeros_missed, i1.zeros, i1.worst_zero_abs, i2.count, i2.worst_nonzero,
                  i2.zeros_missed, i2.zeros, i2.worst_zero_abs, worst_q)};
}

// ------------------------------------------------------------------ AC2

Verdict ac2(Context&) {
  double worst_entry = 0.0, worst_eig = 0.0;
  for (int n : {2, 3}) {
    const Model model(n);
    const auto& b = model.basis();
    for (auto [g, a, om] : {std::tuple{0.5, 0.04, 0.0}, {0.5, 0.04, 0.85}, {0.6, 0.025, 0.5}, {1.3, 0.1, 0.95}}) {
      const auto sys = oracle::dense_hamiltonian(n, g, a, om);
      const auto h = model.assemble(g, a, om);
      std::vector<int> perm(b.size());
      for (std::size_t i = 0; i < b.size(); ++i) {
        oracle::Occupation occ;
        const auto& o = b.state(i).occupations;
        for (std::size_t k = 0; k < o.size(); ++k)
          if (o[k] > 0) occ[{b.modes()[k].n, b.modes()[k].m}] = o[k];
        perm[i] = sys.index.at(occ);
      }
      if (sys.states.size() != b.size()) return {false, fmt("N=%d basis size %zu vs oracle %zu", n, b.size(), sys.states.size())};
      const Eigen::MatrixXd d = h.to_dense();
      for (Eigen::Index i = 0; i < d.rows(); ++i)
        for (Eigen::Index j = 0; j < d.cols(); ++j)
          worst_entry = std::max(worst_entry, std::abs(d(i, j) - sys.h(perm[static_cast<std::size_t>(i)],
                                                                          perm[static_cast<std::size_t>(j)])));
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sys.h);
      const auto r = lowest_k(h, 2);
      for (int k = 0; k < 2; ++k) worst_eig = std::max(worst_eig, std::abs(r.energies[static_cast<std::size_t>(k)] - es.eigenvalues()(k)));
    }
  }
  return {worst_entry <= 1e-12 && worst_eig <= 1e-10,
          fmt("N=2,3 at four (g, A, Omega): max entry diff %.2e (tol 1e-12), max eigenvalue diff %.2e (tol 1e-10)",
              worst_entry, worst_eig)};
}

// ------------------------------------------------------------------ AC3

Verdict ac3(Context& ctx) {
  const auto& model = ctx.model();
  const auto& b = model.basis();
  std::size_t cross = 0;
  for (double om : {0.0, 0.5, 0.9}) {
    const auto h = model.assemble(0.5, 0.0, om);
    for (const auto& e : h.entries())
      if (b.total_L(e.row) != b.total_L(e.col)) ++cross;
  }
  double min_p0 = 1.0, worst_trace = 0.0;
  std::string low;
  const auto grid = linspace(0.0, 0.99, 34);
  for (const auto& [g, a] : default_catalog_pairs()) {
    const auto sweep = ground_state_sweep(model, g, a, grid);
    if (sweep.front().p0 < min_p0) {
      min_p0 = sweep.front().p0;
      low = fmt("g=%.2f A=%.4f", g, a);
    }
    for (const auto& p : sweep) worst_trace = std::max(worst_trace, std::abs(spdm(p.ground, b).trace() - 6.0));
  }
  const bool ok = cross == 0 && min_p0 > 0.99 && worst_trace <= 1e-10;
  return {ok, fmt("A=0 cross-L entries %zu; min P(0|Omega=0) over catalog %.6f at %s (need > 0.99); "
                  "max |tr rho - N| %.2e (tol 1e-10)",
                  cross, min_p0, low.c_str(), worst_trace)};
}

// ------------------------------------------------------------------ AC4

Verdict ac4(Context& ctx) {
  const auto& model = ctx.model();
  const auto t0 = std::chrono::steady_clock::now();
  const auto curve = compute_curve(model, 0.5, 0.04);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto hi = first_downward_crossing(curve.omega, curve.p0, 0.9);
  const auto lo = first_downward_crossing(curve.omega, curve.p0, 0.1);
  const auto sweep = ground_state_sweep(model, 0.5, 0.04, linspace(0.5, 0.99, 491));
  const auto cross = spdm_crossing(model, sweep);
  const bool center_ok = std::abs(curve.center - kOmegaC) <= kOmegaCTol;
  const bool width_ok = curve.width <= kMaxWidth;
  const bool spdm_ok = cross && hi && lo && *cross >= *hi && *cross <= *lo;
  return {center_ok && width_ok && spdm_ok,
          fmt("Omega_c %.9f (pinned %.9f, %s); width %.4f (need <= %.2f); SPDM crossing %.4f vs width interval "
              "[%.4f, %.4f] (%s); refined sweep %zu points in %.1f s",
              curve.center, kOmegaC, center_ok ? "ok" : "off", curve.width, kMaxWidth, cross.value_or(NAN),
              hi.value_or(NAN), lo.value_or(NAN), spdm_ok ? "inside" : "outside", curve.omega.size(), secs)};
}

// ------------------------------------------------------------------ AC5

Verdict ac5(Context& ctx) {
  ProtocolConfig cfg;
  cfg.measurements = 10000;
  const auto ens = run_ensemble(cfg, ctx.cat(), ctx.trajectories, ctx.master_seed);
  if (ens.sigma.empty()) return {false, "every trajectory degenerated"};
  const double s100 = median_sigma(ens, 100);
  const double s10k = median_sigma(ens, 10000);
  const double slope = sigma_scaling(median_sigma_series(ens));
  const bool a = std::abs(s100 / kSigma100 - 1.0) <= 0.5;
  const bool b = s10k <= 2.0 * kSigma10k && s10k >= kSigma10k / 2.0;
  const bool c = std::abs(slope - kSlope) <= kSlopeTol;
  return {a && b && c,
          fmt("%zu trajectories (%d degenerate): median sigma(100) %.3e vs %.1e +-50%% (%s); sigma(1e4) %.3e vs %.1e x2 "
              "(%s); tail slope %.3f vs %.2f +- %.2f (%s)",
              ens.sigma.size(), ens.failures, s100, kSigma100, a ? "ok" : "off", s10k, kSigma10k, b ? "ok" : "off",
              slope, kSlope, kSlopeTol, c ? "ok" : "off")};
}

// ------------------------------------------------------------------ AC6

double median_final(const ProtocolConfig& cfg, Context& ctx) {
  const auto ens = run_ensemble(cfg, ctx.cat(), ctx.trajectories, ctx.master_seed);
  if (ens.sigma.empty()) throw DegenerateUpdateError("every trajectory degenerated");
  return median_sigma(ens, cfg.measurements);
}

Verdict ac6(Context& ctx) {
  const auto variants = preset("fig4");
  const double u = median_final(variants[0].config, ctx);
  const double one = median_final(variants[1].config, ctx);
  const double two = median_final(variants[2].config, ctx);
  std::string kappa;
  for (double k : {2.0, 4.0, 6.0}) {
    auto c = variants[2].config;
    c.kappa = k;
    kappa += fmt(" k=%.0f:%.2fx", k, u / median_final(c, ctx));
  }
  const double gain = u / two;
  const bool ok = gain >= kTuningGain && two < one && one < u;
  return {ok, fmt("median sigma(100) untuned %.3e, one tune %.3e, two tunes %.3e; improvement %.2fx (need >= %.0fx), "
                  "ordering %s; kappa sensitivity%s",
                  u, one, two, gain, kTuningGain, (two < one && one < u) ? "ok" : "violated", kappa.c_str())};
}

// ------------------------------------------------------------------ AC7

Verdict ac7(Context& ctx) {
  const auto cfg = preset("array").front().config;
  const double s = median_final(cfg, ctx);
  const double ratio = s / kArraySigmaTarget;
  const bool ok = ratio <= kArraySigmaFactor && ratio >= 1.0 / kArraySigmaFactor;
  return {ok, fmt("two batches of 200 with one retune: median final sigma %.3e vs %.1e (ratio %.2f, need within x%.0f)",
                  s, kArraySigmaTarget, ratio, kArraySigmaFactor)};
}

// ------------------------------------------------------------------ AC8

Verdict ac8(Context& ctx) {
  const auto& model = ctx.model();
  const auto* curve = ctx.cat().find(0.5, 0.04);
  const auto profile = gap_profile(model, 0.5, 0.04, linspace(0.0, 0.99, 199));
  const double t0 = adiabatic_time(profile, curve->center, 0.0);
  const double t1 = adiabatic_time(profile, curve->center, -0.1);
  ProtocolConfig cfg;
  std::vector<double> h;
  for (double off : linspace(-0.1, 0.0, 11)) h.push_back(hwhm_proxy(cfg, ctx.cat(), off, ctx.trajectories, ctx.master_seed));
  double change = 0.0;
  for (double v : h) change = std::max(change, std::abs(v - h.back()) / h.back());
  const bool a = t0 / t1 > kTimeRatio;
  const bool b = change < kHwhmChange;
  return {a && b, fmt("T(0)/T(-0.1) = %.2f (need > %.0f); HWHM proxy %.3e at 0, %.3e at -0.1, max relative change %.1f%% "
                      "(need < %.0f%%)",
                      t0 / t1, kTimeRatio, h.back(), h.front(), 100.0 * change, 100.0 * kHwhmChange)};
}

// ------------------------------------------------------------------ AC9

std::string trajectory_csv(const ProtocolConfig& cfg, const CurveCatalog& cat) {
  std::ostringstream s;
  write_trajectory_csv(s, run_protocol(cfg, cat).trajectory);
  return s.str();
}

Verdict ac9(Context& ctx) {
  auto cfg = preset("fig4")[2].config;
  cfg.seed = 99;
  const bool same = trajectory_csv(cfg, ctx.cat()) == trajectory_csv(cfg, ctx.cat());

  // The physical curve on a dyadic grid, translated by dyadic constants.
  const auto grid = linspace(0.5, 1.0, 513);
  const auto base = compute_curve_on(ctx.model(), 0.5, 0.04, grid);
  std::size_t mismatches = 0;
  std::size_t steps = 0;
  for (double shift : {0.125, -0.125}) {
    auto moved = base;
    for (double& w : moved.omega) w += shift;
    refresh_metadata(moved);
    ProtocolConfig a;
    a.true_omega = 0.7578125;
    a.prior_lo = 0.7265625;
    a.prior_hi = 0.7890625;
    a.measurements = 1000;
    a.seed = 5;
    auto b = a;
    b.true_omega += shift;
    b.prior_lo += shift;
    b.prior_hi += shift;
    const auto ra = run_protocol(a, CurveCatalog({}, {base}));
    const auto rb = run_protocol(b, CurveCatalog({}, {moved}));
    for (std::size_t i = 0; i < ra.trajectory.size(); ++i, ++steps)
      if (ra.trajectory[i].sigma != rb.trajectory[i].sigma) ++mismatches;
  }
  return {same && mismatches == 0,
          fmt("repeated run CSV %s; shifted runs differ in %zu of %zu sigma values", same ? "byte-identical" : "DIFFERS",
              mismatches, steps)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"critgyro acceptance suite"};
  Context ctx;
  std::string catalog = "acceptance_catalog.json";
  std::vector<std::string> only;
  app.add_option("--catalog", catalog, "cached catalog, rebuilt when missing or stale");
  app.add_option("--trajectories", ctx.trajectories)->check(CLI::Range(1, 100000));
  app.add_option("--seed", ctx.master_seed);
  app.add_option("--only", only, "run a subset, e.g. AC1 AC9");
  CLI11_PARSE(app, argc, argv);
  ctx.catalog_path = catalog;

  const std::vector<std::pair<std::string, std::function<Verdict(Context&)>>> checks = {
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5},
      {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9}};
  int failed = 0;
  for (const auto& [name, fn] : checks) {
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict r;
    try {
      r = fn(ctx);
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %s  %s [%.1f s]\n", name.c_str(), r.pass ? "PASS" : "FAIL", r.detail.c_str(), secs);
    std::fflush(stdout);
    failed += r.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
