#include "critgyro/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "critgyro/error.hpp"

namespace critgyro {

void normalize_sign(Eigen::VectorXd& v) {
  if (v.size() == 0) return;
  Eigen::Index idx = 0;
  v.cwiseAbs().maxCoeff(&idx);
  if (v(idx) < 0.0) v = -v;
}

namespace {

void check_k(int k, std::size_t dim) {
  if (k < 1) throw ParameterError("lowest_k: k must be >= 1");
  if (static_cast<std::size_t>(k) > dim) throw ParameterError("lowest_k: k exceeds dimension");
}

}  // namespace

EigenResult lowest_k_dense(const Eigen::MatrixXd& h, int k, double tol) {
  check_k(k, static_cast<std::size_t>(h.rows()));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  if (solver.info() != Eigen::Success) throw ConvergenceError("dense eigensolver failed", INFINITY);

  EigenResult r;
  double worst = 0.0;
  for (int i = 0; i < k; ++i) {
    Eigen::VectorXd v = solver.eigenvectors().col(i);
    normalize_sign(v);
    const double e = solver.eigenvalues()(i);
    const double res = (h * v - e * v).norm();
    worst = std::max(worst, res);
    r.energies.push_back(e);
    r.vectors.push_back(std::move(v));
    r.residuals.push_back(res);
  }
  if (worst > tol) throw ConvergenceError("dense eigensolver residual above tolerance", worst);
  return r;
}

EigenResult lowest_k_lanczos(const SparseHamiltonian& h, int k, const SolverOptions& options) {
  const std::size_t dim = h.dimension();
  check_k(k, dim);
  const auto n = static_cast<Eigen::Index>(dim);
  const std::size_t cap = options.max_iterations > 0 ? options.max_iterations : 10 * dim;
  const std::size_t krylov_max = std::min(dim, cap);

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  auto random_vector = [&] {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
    return v;
  };

  Eigen::MatrixXd basis(n, static_cast<Eigen::Index>(krylov_max));
  std::vector<double> alpha;
  std::vector<double> beta;  // beta[j] couples column j and j+1
  Eigen::VectorXd w(n);

  auto orthogonalize = [&](Eigen::VectorXd& v, Eigen::Index cols) {
    for (int pass = 0; pass < 2; ++pass) {
      if (cols == 0) break;
      const Eigen::VectorXd coeffs = basis.leftCols(cols).transpose() * v;
      v.noalias() -= basis.leftCols(cols) * coeffs;
    }
  };

  Eigen::VectorXd start = random_vector();
  start.normalize();
  basis.col(0) = start;

  double best_residual = INFINITY;
  const std::size_t check_every = 8;

  for (std::size_t j = 0; j < krylov_max; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    matvec(h, std::span<const double>(basis.col(jj).data(), dim), std::span<double>(w.data(), dim));
    const double a = basis.col(jj).dot(w);
    alpha.push_back(a);
    orthogonalize(w, jj + 1);
    double b = w.norm();

    const bool last = j + 1 == krylov_max;
    const bool check = last || (j + 1 >= static_cast<std::size_t>(k) && ((j + 1) % check_every == 0 || b < 1e-12));

    if (check) {
      const auto m = static_cast<Eigen::Index>(alpha.size());
      Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
      for (Eigen::Index i = 0; i < m; ++i) {
        t(i, i) = alpha[static_cast<std::size_t>(i)];
        if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri(t);
      bool converged = m >= k;
      for (int i = 0; i < k && converged; ++i) {
        const double est = std::abs(b * tri.eigenvectors()(m - 1, i));
        if (est > options.tol) converged = false;
      }
      if (converged || last) {
        EigenResult r;
        double worst = 0.0;
        for (int i = 0; i < std::min<int>(k, static_cast<int>(m)); ++i) {
          Eigen::VectorXd v = basis.leftCols(m) * tri.eigenvectors().col(i);
          v.normalize();
          normalize_sign(v);
          const double e = tri.eigenvalues()(i);
          const double res = (matvec(h, v) - e * v).norm();
          worst = std::max(worst, res);
          r.energies.push_back(e);
          r.vectors.push_back(std::move(v));
          r.residuals.push_back(res);
        }
        best_residual = std::min(best_residual, worst);
        if (static_cast<int>(r.energies.size()) == k && worst <= options.tol) return r;
        if (last) break;
      }
    }

    if (j + 1 == krylov_max) break;
    if (b < 1e-12) {
      // Invariant subspace: continue from a fresh direction orthogonal to the Krylov basis.
      w = random_vector();
      orthogonalize(w, jj + 1);
      w.normalize();
      b = 0.0;
      basis.col(jj + 1) = w;
    } else {
      basis.col(jj + 1) = w / b;
    }
    beta.push_back(b);
  }
  throw ConvergenceError("Lanczos did not converge within " + std::to_string(krylov_max) +
                             " steps (best residual " + std::to_string(best_residual) + ")",
                         best_residual);
}

EigenResult lowest_k(const SparseHamiltonian& h, int k, const SolverOptions& options) {
  if (h.dimension() <= options.dense_threshold) return lowest_k_dense(h.to_dense(), k, options.tol);
  return lowest_k_lanczos(h, k, options);
}

std::pair<double, Eigen::VectorXd> ground_state(const SparseHamiltonian& h, const SolverOptions& options) {
  auto r = lowest_k(h, 1, options);
  return {r.energies.front(), std::move(r.vectors.front())};
}

Eigen::VectorXd select_ground(const EigenResult& result, const Eigen::VectorXd* previous,
                              std::optional<std::size_t> reference_index) {
  if (result.vectors.size() < 2 || result.energies[1] - result.energies[0] >= kDegeneracyGap) {
    return result.vectors.front();
  }
  const auto& v0 = result.vectors[0];
  const auto& v1 = result.vectors[1];
  if (previous != nullptr) {
    return std::abs(previous->dot(v1)) > std::abs(previous->dot(v0)) ? v1 : v0;
  }
  if (reference_index) {
    const auto i = static_cast<Eigen::Index>(*reference_index);
    return std::abs(v1(i)) > std::abs(v0(i)) ? v1 : v0;
  }
  return v0;
}

}  // namespace critgyro

namespace critgyro {

std::vector<std::vector<std::size_t>> connected_blocks(const SparseHamiltonian& h) {
  const std::size_t n = h.dimension();
  std::vector<std::size_t> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const auto& e : h.entries()) {
    if (e.row == e.col) continue;
    const auto a = find(e.row);
    const auto b = find(e.col);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<std::vector<std::size_t>> blocks;
  std::vector<std::ptrdiff_t> slot(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = find(i);
    if (slot[r] < 0) {
      slot[r] = static_cast<std::ptrdiff_t>(blocks.size());
      blocks.emplace_back();
    }
    blocks[static_cast<std::size_t>(slot[r])].push_back(i);
  }
  return blocks;
}

SparseHamiltonian restrict_to(const SparseHamiltonian& h, std::span<const std::size_t> indices) {
  constexpr auto npos = static_cast<std::size_t>(-1);
  std::vector<std::size_t> local(h.dimension(), npos);
  for (std::size_t j = 0; j < indices.size(); ++j) {
    if (indices[j] >= h.dimension() || (j > 0 && indices[j] <= indices[j - 1])) {
      throw StructuralError("restrict_to: indices must be ascending and in range");
    }
    local[indices[j]] = j;
  }
  std::vector<SparseHamiltonian::Entry> out;
  for (const auto& e : h.entries()) {
    if (local[e.row] != npos && local[e.col] != npos) out.push_back({local[e.row], local[e.col], e.value});
  }
  return SparseHamiltonian(indices.size(), std::move(out));
}

EigenResult lowest_k_blocked(const Eigen::MatrixXd& h, std::span<const std::vector<std::size_t>> blocks, int k,
                             double tol) {
  const auto n = h.rows();
  check_k(k, static_cast<std::size_t>(n));
  struct Candidate {
    double energy;
    std::size_t block;
    Eigen::Index column;
  };
  std::vector<Candidate> candidates;
  std::vector<Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>> solvers(blocks.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& idx = blocks[b];
    const auto m = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd sub(m, m);
    for (Eigen::Index r = 0; r < m; ++r) {
      for (Eigen::Index c = 0; c < m; ++c) {
        sub(r, c) = h(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(r)]),
                      static_cast<Eigen::Index>(idx[static_cast<std::size_t>(c)]));
      }
    }
    solvers[b].compute(sub);
    if (solvers[b].info() != Eigen::Success) throw ConvergenceError("block eigensolver failed", INFINITY);
    for (Eigen::Index c = 0; c < std::min<Eigen::Index>(k, m); ++c) {
      candidates.push_back({solvers[b].eigenvalues()(c), b, c});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.energy < b.energy; });

  EigenResult r;
  double worst = 0.0;
  for (int i = 0; i < k; ++i) {
    const auto& c = candidates[static_cast<std::size_t>(i)];
    const auto& idx = blocks[c.block];
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    const Eigen::VectorXd local = solvers[c.block].eigenvectors().col(c.column);
    for (std::size_t j = 0; j < idx.size(); ++j) v(static_cast<Eigen::Index>(idx[j])) = local(static_cast<Eigen::Index>(j));
    normalize_sign(v);
    const double res = (h * v - c.energy * v).norm();
    worst = std::max(worst, res);
    r.energies.push_back(c.energy);
    r.vectors.push_back(std::move(v));
    r.residuals.push_back(res);
  }
  if (worst > tol) throw ConvergenceError("block eigensolver residual above tolerance", worst);
  return r;
}

}  // namespace critgyro
