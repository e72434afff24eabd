#include "critgyro/model.hpp"

namespace critgyro {

Model::Model(int n_particles) : Model(n_particles, 2, n_particles + 2) {}

Model::Model(int n_particles, int n_ll, int l_max)
    : basis_(enumerate_basis(n_particles, n_ll, l_max)),
      cache_(basis_.modes()),
      rotation_(rotation_diagonal(basis_)) {}

ModelParams Model::params(double g, double anisotropy, double omega) const {
  ModelParams p;
  p.n_particles = basis_.params().n_particles;
  p.n_ll = basis_.params().n_ll;
  p.l_max = basis_.params().l_max;
  p.g = g;
  p.anisotropy = anisotropy;
  p.omega = omega;
  return p;
}

SparseHamiltonian Model::assemble_static(double g, double anisotropy) const {
  return critgyro::assemble(basis_, params(g, anisotropy, 0.0), cache_);
}

SparseHamiltonian Model::assemble(double g, double anisotropy, double omega) const {
  return critgyro::assemble(basis_, params(g, anisotropy, omega), cache_);
}

}  // namespace critgyro
