#pragma once

#include <Eigen/Dense>
#include <memory>

#include "critgyro/fock.hpp"
#include "critgyro/hamiltonian.hpp"
#include "critgyro/melem.hpp"

namespace critgyro {

/// Basis and matrix-element cache for one particle number, shared by every
/// (g, A, Omega) evaluated on it. Read-only after construction.
class Model {
 public:
  /// n_ll = 2 and l_max = N + 2.
  explicit Model(int n_particles);
  Model(int n_particles, int n_ll, int l_max);

  const FockBasis& basis() const noexcept { return basis_; }
  const ElementCache& cache() const noexcept { return cache_; }
  int n_particles() const noexcept { return basis_.params().n_particles; }

  ModelParams params(double g, double anisotropy, double omega) const;

  /// Hamiltonian at Omega = 0; H(Omega) = H(0) + Omega * rotation().
  SparseHamiltonian assemble_static(double g, double anisotropy) const;
  SparseHamiltonian assemble(double g, double anisotropy, double omega) const;

  /// -L on the diagonal.
  const Eigen::VectorXd& rotation() const noexcept { return rotation_; }

 private:
  FockBasis basis_;
  ElementCache cache_;
  Eigen::VectorXd rotation_;
};

}  // namespace critgyro
