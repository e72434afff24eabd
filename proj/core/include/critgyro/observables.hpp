#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "critgyro/fock.hpp"
#include "critgyro/model.hpp"
#include "critgyro/spectrum.hpp"

namespace critgyro {

/// P(0|Omega) sampled on an ascending Omega grid for one (g, A).
struct ResonanceCurve {
  double g = 0.0;
  double anisotropy = 0.0;
  std::vector<double> omega;
  std::vector<double> p0;
  double center = 0.0;  // P = 0.5 crossing
  double width = 0.0;   // 0.9 -> 0.1 separation

  /// Linear interpolation, flat beyond the first and last grid points.
  double evaluate(double omega) const;

  bool operator==(const ResonanceCurve&) const = default;
};

/// Probability that every particle sits in an m = 0 mode.
double p_zero(const Eigen::VectorXd& psi, const FockBasis& basis);

/// rho_kl = <a_l^dag a_k> over basis.modes(), with its spectrum in descending order.
struct Spdm {
  Eigen::MatrixXd rho;
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;

  double trace() const { return rho.trace(); }
};

Spdm spdm(const Eigen::VectorXd& psi, const FockBasis& basis);

double expected_L(const Eigen::VectorXd& psi, const FockBasis& basis);

/// Omega at the first point where `values` falls from >= threshold to < threshold,
/// linearly interpolated. Empty when there is no such crossing.
std::optional<double> first_downward_crossing(std::span<const double> omega, std::span<const double> values,
                                              double threshold);

/// First downward crossing of P = 0.5. Throws RangeError without one.
double critical_frequency(const ResonanceCurve& curve);

/// Omega(P = lo) - Omega(P = hi) from first downward crossings.
double transition_width(const ResonanceCurve& curve, double hi = 0.9, double lo = 0.1);

/// Recompute center and width from the sampled values.
void refresh_metadata(ResonanceCurve& curve);

/// One eigensolve of a sweep, after tie-breaking.
struct SweepPoint {
  double omega = 0.0;
  std::vector<double> energies;  // ascending, as many as requested
  Eigen::VectorXd ground;
  double p0 = 0.0;
  double expected_l = 0.0;
  /// |<n|L|0>| for n = 1 .. energies.size()-1.
  std::vector<double> l_couplings;
};

struct SweepRequest {
  int n_states = 2;
  SolverOptions solver;
  /// Solve only the block of H coupled to the all-(0,0) state. The sweep
  /// starts there and H never leaves it, so this is the adiabatic branch.
  bool follow_sector = true;
};

/// Ground states (and a few excited energies) across an ascending Omega grid.
///
/// Points are solved independently; the degeneracy tie-break then runs in
/// grid order so the selected ground vector follows the previous point.
std::vector<SweepPoint> ground_state_sweep(const Model& model, double g, double anisotropy,
                                           std::span<const double> omegas, const SweepRequest& request = {});

/// Eigenvalue of the natural orbital with the largest (0,0) component minus
/// the largest other SPDM eigenvalue. Positive before the vortex enters.
double spdm_imbalance(const Spdm& rho, std::size_t condensate_mode);

/// First sign change of spdm_imbalance across a sweep, interpolated.
std::optional<double> spdm_crossing(const Model& model, std::span<const SweepPoint> sweep);

struct GapProfile {
  std::vector<double> omega;
  std::vector<double> gap;       // E1 - E0
  std::vector<double> coupling;  // |<1|L|0>|
  /// max_n |<n|L|0>| / (E_n - E0)^2 over the computed excited states.
  std::vector<double> adiabatic_rate;
};

GapProfile gap_profile(const Model& model, double g, double anisotropy, std::span<const double> omegas,
                       int n_states = 5, const SolverOptions& solver = {});

GapProfile gap_profile_from_sweep(std::span<const SweepPoint> sweep);

/// Ramp duration in units of 1/omega_perp from the first profile point to
/// omega_c + offset, integrating adiabatic_rate / eps by the trapezoid rule.
double adiabatic_time(const GapProfile& profile, double omega_c, double offset, double eps = 0.1);

/// One row per sweep point: omega,p0,gap,lambda1,lambda2,expected_L.
void write_sweep_csv(std::ostream& out, const Model& model, std::span<const SweepPoint> sweep);

}  // namespace critgyro
