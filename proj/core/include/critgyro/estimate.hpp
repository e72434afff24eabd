#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "critgyro/curves.hpp"
#include "critgyro/observables.hpp"

namespace critgyro {

/// Probability masses over an ascending Omega grid.
///
/// Points are stored as an origin plus offsets from it, and every moment is
/// taken in offset coordinates. Translating the whole problem by a constant
/// therefore leaves sigma unchanged whenever the offsets themselves are.
class Posterior {
 public:
  Posterior() = default;
  /// Normalizes `mass`; throws ParameterError on a bad grid or masses.
  Posterior(std::vector<double> grid, std::vector<double> mass);

  std::size_t size() const noexcept { return offset_.size(); }
  double origin() const noexcept { return origin_; }
  double offset(std::size_t i) const { return offset_[i]; }
  double point(std::size_t i) const { return origin_ + offset_[i]; }
  std::vector<double> grid() const;
  std::span<const double> offsets() const noexcept { return offset_; }
  std::span<const double> mass() const noexcept { return mass_; }

  /// Mean in offset coordinates.
  double mean_offset() const;
  double mean() const { return origin_ + mean_offset(); }
  double sigma() const;
  /// Half width at half maximum, linearly interpolated on either flank.
  double hwhm() const;

  /// Indices [first, last) outside of which every mass is exactly zero.
  std::pair<std::size_t, std::size_t> active() const noexcept { return {first_, last_}; }

  /// Multiply by `likelihood` over the active window and renormalize.
  /// Throws DegenerateUpdateError when the product vanishes everywhere.
  void multiply(std::span<const double> likelihood);

 private:
  friend Posterior init_prior(double lo, double hi, int n);
  void normalize();

  double origin_ = 0.0;
  std::vector<double> offset_;
  std::vector<double> mass_;
  std::size_t first_ = 0;
  std::size_t last_ = 0;
};

/// Uniform masses on n evenly spaced points spanning [lo, hi].
Posterior init_prior(double lo, double hi, int n);

enum class Outcome { zero, not_zero };

const char* to_string(Outcome o);

/// One draw R in (0, 1] from exactly one engine step.
double uniform_draw(std::mt19937_64& rng);

/// zero when R <= p, consuming one draw.
Outcome simulate_outcome(double p, std::mt19937_64& rng);

/// Likelihood lookups on a curve in coordinates relative to its center.
/// Results match a binary search on the relative grid bit for bit, with a
/// constant-time path for uniform grids.
class CurveSampler {
 public:
  explicit CurveSampler(const ResonanceCurve& curve);

  double center() const noexcept { return center_; }
  /// P(center + r), flat beyond the grid.
  double at_offset(double r) const;

 private:
  std::vector<double> rel_;
  std::vector<double> p_;
  double center_ = 0.0;
  double inv_step_ = 0.0;
  bool uniform_ = false;
};

/// Posterior update with L(Omega) = P_curve(Omega + delta), or 1 - P for not-zero.
Posterior bayes_update(const Posterior& post, const ResonanceCurve& curve, double delta, Outcome outcome);

/// Omega_c(curve) - mean(post).
double recenter_offset(const Posterior& post, const ResonanceCurve& curve);

/// Catalog curve whose width is closest to kappa * sigma(post).
const ResonanceCurve& retune(const Posterior& post, const CurveCatalog& catalog, double kappa = 4.0);

struct ProtocolConfig {
  double true_omega = 0.90;
  double prior_lo = 0.87;
  double prior_hi = 0.93;
  int grid_size = 4001;
  std::uint64_t seed = 1;
  int measurements = 100;
  /// Retune after this many measurements have been taken.
  std::vector<int> retune_at;
  /// Measurements sharing one applied offset; 200 models a trap array.
  int batch_size = 1;
  /// Measurements between recentering; 0 means batch_size.
  int recenter_interval = 0;
  double initial_g = 0.5;
  double initial_A = 0.04;
  double kappa = 4.0;
  /// The applied offset aims the posterior mean at Omega_c + target_offset.
  double target_offset = 0.0;
  /// Measurement counts at which to keep a copy of the posterior.
  std::vector<int> snapshots;

  bool operator==(const ProtocolConfig&) const = default;
};

/// Throws ParameterError listing every violated constraint.
void validate(const ProtocolConfig& config);

struct MeasurementRecord {
  int index = 0;  // 1-based
  Outcome outcome = Outcome::zero;
  double g = 0.0;
  double anisotropy = 0.0;
  double delta = 0.0;
  double sigma = 0.0;  // after this update
};

struct ProtocolResult {
  std::vector<MeasurementRecord> trajectory;
  std::vector<std::pair<int, Posterior>> snapshots;
  Posterior final_posterior;
};

/// Sequential measurement loop. Degenerate updates are rethrown with the
/// failing measurement index.
ProtocolResult run_protocol(const ProtocolConfig& config, const CurveCatalog& catalog);

/// seed_i = splitmix64(master + i * 0x9E3779B97F4A7C15).
std::uint64_t split_seed(std::uint64_t master, std::uint64_t index);

struct EnsembleResult {
  std::vector<std::uint64_t> seeds;
  /// sigma after each measurement, one row per completed trajectory, in seed order.
  std::vector<std::vector<double>> sigma;
  std::vector<double> final_hwhm;
  int failures = 0;
};

EnsembleResult run_ensemble(const ProtocolConfig& config, const CurveCatalog& catalog, int trajectories,
                            std::uint64_t master_seed);

double median(std::vector<double> values);

/// Median over trajectories of sigma after measurement mu (1-based).
double median_sigma(const EnsembleResult& ensemble, int mu);

/// Median sigma for every mu.
std::vector<double> median_sigma_series(const EnsembleResult& ensemble);

/// Least-squares slope of log sigma against log mu over the last two decades,
/// sampled at about 20 log-spaced mu per decade. sigma[i] belongs to mu = i + 1.
double sigma_scaling(std::span<const double> sigma);

/// Ensemble median posterior HWHM after config.measurements with the
/// measurement point aimed at Omega_c + offset.
double hwhm_proxy(ProtocolConfig config, const CurveCatalog& catalog, double offset, int trajectories,
                  std::uint64_t master_seed);

std::string to_json(const ProtocolConfig& config);

/// Parses a config object; absent keys keep their defaults. Every schema
/// violation is listed in the thrown ParameterError.
ProtocolConfig protocol_from_json(const std::string& text);

/// Replaces config.seed with CRITGYRO_SEED when that variable is set.
/// Returns true when it did.
bool apply_seed_override(ProtocolConfig& config);

/// Columns mu,outcome,g,A,delta,sigma.
void write_trajectory_csv(std::ostream& out, std::span<const MeasurementRecord> trajectory);

/// Columns omega,probability.
void write_posterior_csv(std::ostream& out, const Posterior& post);

}  // namespace critgyro
