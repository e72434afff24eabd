#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "critgyro/fock.hpp"
#include "critgyro/melem.hpp"

namespace critgyro {

/// Dimensionless inputs of the rotating-frame Hamiltonian (energies in units of hbar*omega_perp).
struct ModelParams {
  int n_particles = 6;
  double g = 0.5;
  double anisotropy = 0.04;
  double omega = 0.0;
  int n_ll = 2;
  int l_max = 8;

  static ModelParams standard(int n_particles, double g, double anisotropy, double omega);

  /// Anisotropy beyond which converged solutions are not expected.
  static constexpr double kAnisotropyWarning = 0.1;
  bool anisotropy_suspicious() const noexcept { return anisotropy >= kAnisotropyWarning; }
};

/// Real symmetric sparse matrix stored as its upper triangle (row <= col).
class SparseHamiltonian {
 public:
  struct Entry {
    std::size_t row;
    std::size_t col;
    double value;
  };

  SparseHamiltonian() = default;
  SparseHamiltonian(std::size_t dimension, std::vector<Entry> upper);

  std::size_t dimension() const noexcept { return dim_; }
  std::span<const Entry> entries() const noexcept { return entries_; }
  std::size_t stored_entries() const noexcept { return entries_.size(); }

  /// H[i][j] with the mirror rule applied.
  double at(std::size_t i, std::size_t j) const;

  Eigen::VectorXd diagonal() const;
  Eigen::MatrixXd to_dense() const;

  /// Copy with diag_shift[i] added to every diagonal element.
  SparseHamiltonian with_diagonal_shift(const Eigen::VectorXd& diag_shift) const;

 private:
  std::size_t dim_ = 0;
  std::vector<Entry> entries_;  // sorted by (row, col)
};

/// Entries with |value| below this are not stored.
constexpr double kSparsityThreshold = 1e-14;

/// All five terms: 2 sum n N_k + sum |m| N_k - Omega L + N + anisotropy + interaction.
SparseHamiltonian assemble(const FockBasis& basis, const ModelParams& params, const ElementCache& cache);

/// y = H v. Throws StructuralError on a dimension mismatch.
Eigen::VectorXd matvec(const SparseHamiltonian& h, const Eigen::VectorXd& v);
void matvec(const SparseHamiltonian& h, std::span<const double> v, std::span<double> out);

/// Diagonal of -L over the basis, the derivative dH/dOmega.
Eigen::VectorXd rotation_diagonal(const FockBasis& basis);

/// g = a_s sqrt(8 pi M omega_z / hbar) in SI units. a_s may be zero.
double physical_to_g(double scattering_length_m, double mass_kg, double omega_z_rad_s);

/// "row col value" lines of the full symmetric matrix, 0-based.
void write_matrix_coo(std::ostream& out, const SparseHamiltonian& h);

}  // namespace critgyro
