#include "critgyro/observables.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "critgyro/error.hpp"

namespace critgyro {

double ResonanceCurve::evaluate(double x) const {
  if (omega.empty()) throw StructuralError("ResonanceCurve::evaluate: empty curve");
  if (x <= omega.front()) return p0.front();
  if (x >= omega.back()) return p0.back();
  const auto it = std::upper_bound(omega.begin(), omega.end(), x);
  const auto i = static_cast<std::size_t>(it - omega.begin());
  const double t = (x - omega[i - 1]) / (omega[i] - omega[i - 1]);
  return p0[i - 1] + t * (p0[i] - p0[i - 1]);
}

namespace {

void require_normalized(const Eigen::VectorXd& psi, const FockBasis& basis, const char* who) {
  if (static_cast<std::size_t>(psi.size()) != basis.size()) {
    throw StructuralError(std::string(who) + ": state length does not match basis");
  }
  if (std::abs(psi.norm() - 1.0) > 1e-8) throw InputError(std::string(who) + ": state is not normalized");
}

}  // namespace

double p_zero(const Eigen::VectorXd& psi, const FockBasis& basis) {
  require_normalized(psi, basis, "p_zero");
  double p = 0.0;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    if (basis.all_zero_angular_momentum(i)) p += psi(static_cast<Eigen::Index>(i)) * psi(static_cast<Eigen::Index>(i));
  }
  return std::clamp(p, 0.0, 1.0);
}

Spdm spdm(const Eigen::VectorXd& psi, const FockBasis& basis) {
  require_normalized(psi, basis, "spdm");
  const std::size_t nm = basis.modes().size();
  Spdm out;
  out.rho = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nm), static_cast<Eigen::Index>(nm));
  FockState work;
  for (std::size_t s = 0; s < basis.size(); ++s) {
    const double cs = psi(static_cast<Eigen::Index>(s));
    if (cs == 0.0) continue;
    const auto& occ = basis.state(s).occupations;
    for (std::size_t k = 0; k < nm; ++k) {
      if (occ[k] == 0) continue;
      for (std::size_t l = 0; l < nm; ++l) {
        work.occupations = occ;
        double amp = std::sqrt(static_cast<double>(work.occupations[k]));
        work.occupations[k] -= 1;
        amp *= std::sqrt(static_cast<double>(work.occupations[l] + 1));
        work.occupations[l] += 1;
        if (auto t = basis.find(work)) {
          out.rho(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) +=
              psi(static_cast<Eigen::Index>(*t)) * cs * amp;
        }
      }
    }
  }
  out.rho = 0.5 * (out.rho + out.rho.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(out.rho);
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

double expected_L(const Eigen::VectorXd& psi, const FockBasis& basis) {
  require_normalized(psi, basis, "expected_L");
  double l = 0.0;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const double a = psi(static_cast<Eigen::Index>(i));
    l += a * a * basis.total_L(i);
  }
  return l;
}

std::optional<double> first_downward_crossing(std::span<const double> omega, std::span<const double> values,
                                              double threshold) {
  if (omega.size() != values.size()) throw StructuralError("first_downward_crossing: size mismatch");
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    if (values[i] >= threshold && values[i + 1] < threshold) {
      const double t = (values[i] - threshold) / (values[i] - values[i + 1]);
      return omega[i] + t * (omega[i + 1] - omega[i]);
    }
  }
  return std::nullopt;
}

double critical_frequency(const ResonanceCurve& curve) {
  auto c = first_downward_crossing(curve.omega, curve.p0, 0.5);
  if (!c) throw RangeError("critical_frequency: P(0|Omega) never crosses 0.5 on the grid");
  return *c;
}

double transition_width(const ResonanceCurve& curve, double hi, double lo) {
  if (!(hi > lo)) throw ParameterError("transition_width: hi must exceed lo");
  auto a = first_downward_crossing(curve.omega, curve.p0, hi);
  auto b = first_downward_crossing(curve.omega, curve.p0, lo);
  if (!a || !b) throw RangeError("transition_width: thresholds not crossed on the grid");
  return *b - *a;
}

void refresh_metadata(ResonanceCurve& curve) {
  curve.center = critical_frequency(curve);
  curve.width = transition_width(curve);
}

namespace {

std::vector<std::size_t> sweep_sector(const Model& model, const SparseHamiltonian& base, bool follow_sector) {
  const auto reference = model.basis().condensate_index();
  std::vector<std::size_t> all(base.dimension());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  if (!follow_sector || !reference) return all;
  for (auto& block : connected_blocks(base)) {
    if (std::find(block.begin(), block.end(), *reference) != block.end()) return block;
  }
  return all;
}

}  // namespace

std::vector<SweepPoint> ground_state_sweep(const Model& model, double g, double anisotropy,
                                           std::span<const double> omegas, const SweepRequest& request) {
  for (std::size_t i = 1; i < omegas.size(); ++i) {
    if (!(omegas[i] > omegas[i - 1])) throw ParameterError("ground_state_sweep: grid must be strictly ascending");
  }
  const auto& basis = model.basis();
  const SparseHamiltonian full = model.assemble_static(g, anisotropy);
  const auto sector = sweep_sector(model, full, request.follow_sector);
  const bool restricted = sector.size() != full.dimension();
  const SparseHamiltonian base = restricted ? restrict_to(full, sector) : full;
  Eigen::VectorXd rot(static_cast<Eigen::Index>(sector.size()));
  for (std::size_t j = 0; j < sector.size(); ++j) {
    rot(static_cast<Eigen::Index>(j)) = model.rotation()(static_cast<Eigen::Index>(sector[j]));
  }

  const int k = std::min<int>(std::max(request.n_states, 2), static_cast<int>(sector.size()));
  const bool dense = base.dimension() <= request.solver.dense_threshold;
  const Eigen::MatrixXd base_dense = dense ? base.to_dense() : Eigen::MatrixXd();
  const auto blocks = connected_blocks(base);

  std::vector<EigenResult> results(omegas.size());
  std::vector<std::string> failures(omegas.size());
  const auto n = static_cast<std::ptrdiff_t>(omegas.size());

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double om = omegas[static_cast<std::size_t>(i)];
    try {
      if (dense) {
        Eigen::MatrixXd h = base_dense;
        h.diagonal() += om * rot;
        results[static_cast<std::size_t>(i)] = lowest_k_blocked(h, blocks, k, request.solver.tol);
      } else {
        results[static_cast<std::size_t>(i)] = lowest_k(base.with_diagonal_shift(om * rot), k, request.solver);
      }
    } catch (const Error& e) {
      failures[static_cast<std::size_t>(i)] = e.what();
    }
  }
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    if (!failures[i].empty()) {
      throw ConvergenceError("eigensolve failed at Omega = " + std::to_string(omegas[i]) + ": " + failures[i], INFINITY);
    }
  }

  if (restricted) {
    const auto dim = static_cast<Eigen::Index>(basis.size());
    for (auto& r : results) {
      for (auto& v : r.vectors) {
        Eigen::VectorXd embedded = Eigen::VectorXd::Zero(dim);
        for (std::size_t j = 0; j < sector.size(); ++j) {
          embedded(static_cast<Eigen::Index>(sector[j])) = v(static_cast<Eigen::Index>(j));
        }
        v = std::move(embedded);
      }
    }
  }

  const auto reference = basis.condensate_index();
  std::vector<SweepPoint> out(omegas.size());
  const Eigen::VectorXd l_diag = -model.rotation();
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    auto& r = results[i];
    auto& p = out[i];
    p.omega = omegas[i];
    p.energies = r.energies;
    p.ground = select_ground(r, i > 0 ? &out[i - 1].ground : nullptr, reference);
    p.p0 = p_zero(p.ground, basis);
    p.expected_l = expected_L(p.ground, basis);
    const Eigen::VectorXd l_ground = l_diag.cwiseProduct(p.ground);
    for (std::size_t s = 1; s < r.vectors.size(); ++s) p.l_couplings.push_back(std::abs(r.vectors[s].dot(l_ground)));
  }
  return out;
}

double spdm_imbalance(const Spdm& rho, std::size_t condensate_mode) {
  const auto n = rho.eigenvalues.size();
  Eigen::Index tracked = 0;
  rho.eigenvectors.row(static_cast<Eigen::Index>(condensate_mode)).cwiseAbs().maxCoeff(&tracked);
  double other = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j != tracked) other = std::max(other, rho.eigenvalues(j));
  }
  return rho.eigenvalues(tracked) - other;
}

std::optional<double> spdm_crossing(const Model& model, std::span<const SweepPoint> sweep) {
  const auto mode = model.basis().mode_index(Mode{0, 0});
  if (!mode) throw StructuralError("spdm_crossing: basis has no (0,0) mode");
  std::vector<double> om;
  std::vector<double> d;
  for (const auto& p : sweep) {
    om.push_back(p.omega);
    d.push_back(spdm_imbalance(spdm(p.ground, model.basis()), *mode));
  }
  return first_downward_crossing(om, d, 0.0);
}

GapProfile gap_profile_from_sweep(std::span<const SweepPoint> sweep) {
  GapProfile prof;
  for (const auto& p : sweep) {
    if (p.energies.size() < 2) throw StructuralError("gap_profile: sweep needs at least two states");
    prof.omega.push_back(p.omega);
    prof.gap.push_back(p.energies[1] - p.energies[0]);
    prof.coupling.push_back(p.l_couplings.at(0));
    double rate = 0.0;
    for (std::size_t s = 1; s < p.energies.size(); ++s) {
      const double d = p.energies[s] - p.energies[0];
      if (d <= 0.0) continue;
      rate = std::max(rate, p.l_couplings[s - 1] / (d * d));
    }
    prof.adiabatic_rate.push_back(rate);
  }
  return prof;
}

GapProfile gap_profile(const Model& model, double g, double anisotropy, std::span<const double> omegas,
                       int n_states, const SolverOptions& solver) {
  if (!(anisotropy > 0.0)) throw ParameterError("gap_profile: anisotropy must be positive");
  const auto sweep = ground_state_sweep(model, g, anisotropy, omegas, {std::max(n_states, 2), solver});
  return gap_profile_from_sweep(sweep);
}

double adiabatic_time(const GapProfile& profile, double omega_c, double offset, double eps) {
  if (!(eps > 0.0)) throw ParameterError("adiabatic_time: eps must be positive");
  const auto& om = profile.omega;
  const double end = omega_c + offset;
  if (om.size() < 2 || end < om.front() || end > om.back()) {
    throw RangeError("adiabatic_time: ramp endpoint outside the profile grid");
  }
  double t = 0.0;
  for (std::size_t i = 0; i + 1 < om.size() && om[i] < end; ++i) {
    const double a = om[i];
    const double b = std::min(om[i + 1], end);
    const double fa = profile.adiabatic_rate[i];
    double fb = profile.adiabatic_rate[i + 1];
    if (b < om[i + 1]) fb = fa + (fb - fa) * (b - a) / (om[i + 1] - a);
    t += 0.5 * (fa + fb) * (b - a);
  }
  return t / eps;
}

void write_sweep_csv(std::ostream& out, const Model& model, std::span<const SweepPoint> sweep) {
  const auto prec = out.precision(17);
  out << "omega,p0,gap,lambda1,lambda2,expected_L\n";
  for (const auto& p : sweep) {
    const auto rho = spdm(p.ground, model.basis());
    const double gap = p.energies.size() > 1 ? p.energies[1] - p.energies[0] : 0.0;
    out << p.omega << ',' << p.p0 << ',' << gap << ',' << rho.eigenvalues(0) << ','
        << (rho.eigenvalues.size() > 1 ? rho.eigenvalues(1) : 0.0) << ',' << p.expected_l << '\n';
  }
  out.precision(prec);
}

}  // namespace critgyro
