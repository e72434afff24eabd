#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "critgyro/hamiltonian.hpp"

namespace critgyro {

/// Lowest eigenpairs in ascending order.
struct EigenResult {
  std::vector<double> energies;
  std::vector<Eigen::VectorXd> vectors;
  std::vector<double> residuals;  // ||H v - E v||
};

struct SolverOptions {
  double tol = 1e-10;
  /// Dimensions up to this use dense diagonalization.
  std::size_t dense_threshold = 2000;
  std::uint64_t seed = 0x5eed5eedULL;
  /// Lanczos step cap; 0 means 10 * dimension.
  std::size_t max_iterations = 0;
};

EigenResult lowest_k(const SparseHamiltonian& h, int k, const SolverOptions& options = {});

EigenResult lowest_k_dense(const Eigen::MatrixXd& h, int k, double tol = 1e-10);

/// Lanczos with full reorthogonalization, regardless of dimension.
EigenResult lowest_k_lanczos(const SparseHamiltonian& h, int k, const SolverOptions& options = {});

std::pair<double, Eigen::VectorXd> ground_state(const SparseHamiltonian& h, const SolverOptions& options = {});

/// Index sets of the connected components of the sparsity graph of h.
/// H is block diagonal over them, so each block can be diagonalized alone.
std::vector<std::vector<std::size_t>> connected_blocks(const SparseHamiltonian& h);

/// Principal submatrix of h on `indices` (ascending), renumbered 0..size-1.
SparseHamiltonian restrict_to(const SparseHamiltonian& h, std::span<const std::size_t> indices);

/// Dense solve of each block, merged into the k lowest pairs of the full matrix.
EigenResult lowest_k_blocked(const Eigen::MatrixXd& h, std::span<const std::vector<std::size_t>> blocks, int k,
                             double tol = 1e-10);

/// Eigenvector sign fixed so that its largest-magnitude component is positive.
void normalize_sign(Eigen::VectorXd& v);

/// Gaps below this count as degenerate for ground-state selection.
constexpr double kDegeneracyGap = 1e-12;

/// Ground vector of `result` with the sweep tie-break applied.
///
/// When E1 - E0 < kDegeneracyGap the vector with the larger overlap with
/// `previous` wins; without a previous vector, the larger |amplitude| on
/// `reference_index` wins.
Eigen::VectorXd select_ground(const EigenResult& result, const Eigen::VectorXd* previous,
                              std::optional<std::size_t> reference_index);

}  // namespace critgyro
