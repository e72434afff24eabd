#pragma once

// Brute-force reference implementations for the test suite. Nothing here is
// shared with the library beyond plain data types.

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

using ModeNM = std::pair<int, int>;      // (n, m)
using Occupation = std::map<ModeNM, int>;  // only nonzero counts

/// Every (n, m) with n + (|m| - m)/2 <= n_ll - 1 and m <= l_max, by scanning a generous box.
std::vector<ModeNM> naive_modes(int n_ll, int l_max);

/// Every multiset of n_particles modes, filtered by both truncations.
std::vector<Occupation> naive_basis(int n_particles, int n_ll, int l_max);

int total_L(const Occupation& occ);

/// Exact integrals by monomial expansion with rational arithmetic.
double integral_I1(ModeNM k1, ModeNM k2);
double integral_I2(ModeNM k1, ModeNM k2, ModeNM l1, ModeNM l2);

/// Coupling coefficients with the prefactors written out from scratch.
double v_coefficient(ModeNM k1, ModeNM k2);                       // per unit A
double u_coefficient(ModeNM k1, ModeNM k2, ModeNM l1, ModeNM l2);  // per unit g

struct DenseSystem {
  std::vector<Occupation> states;
  std::map<Occupation, int> index;
  Eigen::MatrixXd h;
};

/// Dense H from explicit creation/annihilation on occupation maps.
DenseSystem dense_hamiltonian(int n_particles, double g, double anisotropy, double omega);

/// rho(k, l) = <a_l^dag a_k> by explicit operator action; modes in naive_modes order.
Eigen::MatrixXd spdm(const DenseSystem& sys, const Eigen::VectorXd& psi, const std::vector<ModeNM>& modes);

/// Piecewise-linear curve lookup by std::upper_bound with flat ends.
double interpolate(const std::vector<double>& x, const std::vector<double>& y, double at);

/// prior * likelihood / sum over the full grid, no windowing.
std::vector<double> bayes_exhaustive(const std::vector<double>& prior, const std::vector<double>& likelihood);

double mean(const std::vector<double>& x, const std::vector<double>& w);
double stddev(const std::vector<double>& x, const std::vector<double>& w);

}  // namespace oracle
