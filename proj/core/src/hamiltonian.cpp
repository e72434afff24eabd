#include "critgyro/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numbers>
#include <ostream>

#include "critgyro/error.hpp"

namespace critgyro {

ModelParams ModelParams::standard(int n_particles, double g, double anisotropy, double omega) {
  ModelParams p;
  p.n_particles = n_particles;
  p.g = g;
  p.anisotropy = anisotropy;
  p.omega = omega;
  p.n_ll = 2;
  p.l_max = n_particles + 2;
  return p;
}

SparseHamiltonian::SparseHamiltonian(std::size_t dimension, std::vector<Entry> upper)
    : dim_(dimension), entries_(std::move(upper)) {
  for (const auto& e : entries_) {
    if (e.row > e.col || e.col >= dim_) throw StructuralError("SparseHamiltonian: entry outside upper triangle");
  }
  std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
}

double SparseHamiltonian::at(std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  auto it = std::lower_bound(entries_.begin(), entries_.end(), std::pair{i, j},
                             [](const Entry& e, const std::pair<std::size_t, std::size_t>& key) {
                               return e.row != key.first ? e.row < key.first : e.col < key.second;
                             });
  if (it == entries_.end() || it->row != i || it->col != j) return 0.0;
  return it->value;
}

Eigen::VectorXd SparseHamiltonian::diagonal() const {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim_));
  for (const auto& e : entries_) {
    if (e.row == e.col) d(static_cast<Eigen::Index>(e.row)) = e.value;
  }
  return d;
}

Eigen::MatrixXd SparseHamiltonian::to_dense() const {
  const auto n = static_cast<Eigen::Index>(dim_);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : entries_) {
    const auto r = static_cast<Eigen::Index>(e.row);
    const auto c = static_cast<Eigen::Index>(e.col);
    m(r, c) = e.value;
    m(c, r) = e.value;
  }
  return m;
}

SparseHamiltonian SparseHamiltonian::with_diagonal_shift(const Eigen::VectorXd& shift) const {
  if (static_cast<std::size_t>(shift.size()) != dim_) throw StructuralError("with_diagonal_shift: size mismatch");
  std::vector<Entry> out;
  out.reserve(entries_.size() + dim_);
  std::vector<char> seen(dim_, 0);
  for (const auto& e : entries_) {
    if (e.row == e.col) {
      out.push_back({e.row, e.col, e.value + shift(static_cast<Eigen::Index>(e.row))});
      seen[e.row] = 1;
    } else {
      out.push_back(e);
    }
  }
  for (std::size_t i = 0; i < dim_; ++i) {
    const double s = shift(static_cast<Eigen::Index>(i));
    if (!seen[i] && s != 0.0) out.push_back({i, i, s});
  }
  return SparseHamiltonian(dim_, std::move(out));
}

SparseHamiltonian assemble(const FockBasis& basis, const ModelParams& params, const ElementCache& cache) {
  if (!cache.matches(basis.modes())) throw StructuralError("assemble: element cache built for a different mode list");
  if (params.n_particles != basis.params().n_particles) {
    throw StructuralError("assemble: particle number differs from the basis");
  }

  const auto modes = basis.modes();
  const std::size_t nm = modes.size();
  const std::size_t dim = basis.size();
  std::vector<SparseHamiltonian::Entry> upper;

  std::map<std::size_t, double> column;
  FockState work;
  for (std::size_t s = 0; s < dim; ++s) {
    column.clear();
    const auto& occ = basis.state(s).occupations;

    double diag = 0.0;
    for (std::size_t k = 0; k < nm; ++k) {
      if (occ[k] == 0) continue;
      diag += occ[k] * (2.0 * modes[k].n + std::abs(modes[k].m) - params.omega * modes[k].m + 1.0);
    }
    column[s] += diag;

    // Anisotropy: A V a_{k1}^dag a_{k2}.
    if (params.anisotropy != 0.0) {
      for (std::size_t k2 = 0; k2 < nm; ++k2) {
        if (occ[k2] == 0) continue;
        for (std::size_t k1 = 0; k1 < nm; ++k1) {
          const double v = cache.v_raw(k1, k2);
          if (v == 0.0) continue;
          work.occupations = occ;
          double amp = std::sqrt(static_cast<double>(work.occupations[k2]));
          work.occupations[k2] -= 1;
          amp *= std::sqrt(static_cast<double>(work.occupations[k1] + 1));
          work.occupations[k1] += 1;
          if (auto t = basis.find(work)) column[*t] += params.anisotropy * v * amp;
        }
      }
    }

    // Interaction: (g/2) sum U a_{k1}^dag a_{k2}^dag a_{l1} a_{l2} over ordered index tuples.
    if (params.g != 0.0) {
      for (std::size_t l2 = 0; l2 < nm; ++l2) {
        if (occ[l2] == 0) continue;
        for (std::size_t l1 = 0; l1 < nm; ++l1) {
          const int avail = occ[l1] - (l1 == l2 ? 1 : 0);
          if (avail <= 0) continue;
          const double ann = std::sqrt(static_cast<double>(occ[l2])) * std::sqrt(static_cast<double>(avail));
          const int total_m = modes[l1].m + modes[l2].m;
          for (const auto& [k1, k2] : cache.pairs_with_total_m(total_m)) {
            const double u = cache.u_raw(k1, k2, l1, l2);
            if (u == 0.0) continue;
            work.occupations = occ;
            work.occupations[l2] -= 1;
            work.occupations[l1] -= 1;
            double amp = ann * std::sqrt(static_cast<double>(work.occupations[k2] + 1));
            work.occupations[k2] += 1;
            amp *= std::sqrt(static_cast<double>(work.occupations[k1] + 1));
            work.occupations[k1] += 1;
            if (auto t = basis.find(work)) column[*t] += 0.5 * params.g * u * amp;
          }
        }
      }
    }

    // Column s gives H[t][s]; keep the t <= s half.
    for (const auto& [t, value] : column) {
      if (t > s) break;
      if (std::abs(value) < kSparsityThreshold) continue;
      upper.push_back({t, s, value});
    }
  }
  return SparseHamiltonian(dim, std::move(upper));
}

void matvec(const SparseHamiltonian& h, std::span<const double> v, std::span<double> out) {
  if (v.size() != h.dimension() || out.size() != h.dimension()) {
    throw StructuralError("matvec: vector length does not match matrix dimension");
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (const auto& e : h.entries()) {
    out[e.row] += e.value * v[e.col];
    if (e.row != e.col) out[e.col] += e.value * v[e.row];
  }
}

Eigen::VectorXd matvec(const SparseHamiltonian& h, const Eigen::VectorXd& v) {
  Eigen::VectorXd out(v.size());
  matvec(h, std::span<const double>(v.data(), static_cast<std::size_t>(v.size())),
         std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
  return out;
}

Eigen::VectorXd rotation_diagonal(const FockBasis& basis) {
  Eigen::VectorXd d(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i) d(static_cast<Eigen::Index>(i)) = -basis.total_L(i);
  return d;
}

double physical_to_g(double scattering_length_m, double mass_kg, double omega_z_rad_s) {
  constexpr double hbar = 1.054571817e-34;
  if (scattering_length_m < 0.0 || mass_kg <= 0.0 || omega_z_rad_s <= 0.0) {
    throw ParameterError("physical_to_g: inputs must be positive");
  }
  return scattering_length_m * std::sqrt(8.0 * std::numbers::pi * mass_kg * omega_z_rad_s / hbar);
}

void write_matrix_coo(std::ostream& out, const SparseHamiltonian& h) {
  const auto prec = out.precision(17);
  for (const auto& e : h.entries()) {
    out << e.row << ' ' << e.col << ' ' << e.value << '\n';
    if (e.row != e.col) out << e.col << ' ' << e.row << ' ' << e.value << '\n';
  }
  out.precision(prec);
}

}  // namespace critgyro
